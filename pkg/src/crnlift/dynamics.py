"""Dynamics within stoichiometric classes.

Conservation laws confine trajectories to affine classes; this module picks
free coordinates for a class in exact arithmetic, and provides integration,
Newton-based equilibrium location with eigenvalue classification relative to
the class, and single-shooting periodic orbits with Floquet multipliers.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from . import exact
from .kinetics import DomainError, KineticModel, _rate_jacobian_unchecked, _rates_unchecked
from .network import conservation_laws


class ConvergenceError(RuntimeError):
    """Newton or shooting iteration failed; carries the last iterate."""

    def __init__(self, message: str, last=None, fold_suspected: bool = False):
        super().__init__(message)
        self.last = last
        self.fold_suspected = fold_suspected


@dataclass(eq=False)
class ReducedSystem:
    """Dynamics in free coordinates of one stoichiometric class.

    ``rhs`` and ``jacobian`` act on reduced states; ``embedding`` maps a
    reduced state to the full species vector on the class.
    """

    dimension: int
    rhs: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray]
    embedding: Callable[[np.ndarray], np.ndarray]
    class_levels: tuple[float, ...]
    species: tuple[str, ...] = ()
    free_indices: tuple[int, ...] = ()

    def project(self, x_full) -> np.ndarray:
        x_full = np.asarray(x_full, dtype=float)
        if not self.free_indices:
            return x_full
        return x_full[list(self.free_indices)]


@dataclass(eq=False)
class Trajectory:
    """Integrator output: sampled times/states plus dense interpolant."""

    t: np.ndarray
    states: np.ndarray  # shape (len(t), dimension)
    dense: object
    success: bool
    message: str
    system: ReducedSystem

    def states_full(self) -> np.ndarray:
        return np.array([self.system.embedding(u) for u in self.states])

    def at(self, t: float) -> np.ndarray:
        return np.atleast_1d(self.dense(t))


@dataclass(frozen=True, eq=False)
class EquilibriumRecord:
    """An equilibrium with eigenvalues and stability relative to its class."""

    point: np.ndarray  # full species coordinates
    reduced: np.ndarray  # free coordinates
    reduced_eigenvalues: np.ndarray
    classification: str  # stable | unstable | saddle | nonhyperbolic
    residual: float


@dataclass(frozen=True, eq=False)
class PeriodicOrbitRecord:
    """A periodic orbit located by shooting, with Floquet multipliers."""

    anchor: np.ndarray  # full species coordinates of a point on the orbit
    reduced_anchor: np.ndarray
    period: float
    floquet: np.ndarray
    stability: str  # linearly stable | unstable | nonhyperbolic
    residual: float


# ---------------------------------------------------------------------------
# class reduction
# ---------------------------------------------------------------------------


def _select_eliminated(basis: list[tuple[Fraction, ...]], n: int) -> list[int]:
    """Pick one coordinate per conservation law, scanning from the last species.

    Greedy exact elimination: a column is selected if it is independent of the
    already-selected ones within the row space of the basis. Preferring late
    columns keeps the original species as free coordinates where possible.
    """
    rows = [list(r) for r in basis]
    k = len(rows)
    selected: list[int] = []
    work = [list(r) for r in rows]
    for col in range(n - 1, -1, -1):
        if len(selected) == k:
            break
        pivot_row = None
        for i in range(len(selected), k):
            if work[i][col] != 0:
                pivot_row = i
                break
        if pivot_row is None:
            continue
        r = len(selected)
        work[r], work[pivot_row] = work[pivot_row], work[r]
        inv = Fraction(1, 1) / work[r][col]
        work[r] = [v * inv for v in work[r]]
        for i in range(k):
            if i != r and work[i][col] != 0:
                f = work[i][col]
                work[i] = [a - f * b for a, b in zip(work[i], work[r])]
        selected.append(col)
    if len(selected) != k:
        raise ValueError("conservation basis is rank-deficient")
    return sorted(selected)


def _class_is_feasible(basis_float: np.ndarray, levels: np.ndarray, n: int) -> bool:
    """True if {x : W x = levels} meets the open positive orthant (LP check)."""
    from scipy.optimize import linprog

    # maximise t subject to W x = levels, x_i >= t, 0 <= t <= 1
    k = basis_float.shape[0]
    c = np.zeros(n + 1)
    c[-1] = -1.0
    a_eq = np.hstack([basis_float, np.zeros((k, 1))])
    a_ub = np.hstack([-np.eye(n), np.ones((n, 1))])  # t - x_i <= 0
    bounds = [(None, None)] * n + [(0.0, 1.0)]
    res = linprog(c, A_ub=a_ub, b_ub=np.zeros(n), A_eq=a_eq, b_eq=levels, bounds=bounds,
                  method="highs")
    return bool(res.success and -res.fun > 1e-12)


def reduce_to_class(
    model: KineticModel,
    levels: Sequence[float],
    eliminate: Sequence[int] | None = None,
    interior_point=None,
    check_feasible: bool = True,
) -> ReducedSystem:
    """Restrict a model to the stoichiometric class with the given law values.

    One level per conservation law (in the canonical basis order). The
    eliminated coordinates are chosen in exact arithmetic, preferring to keep
    the earliest species free; ``eliminate`` overrides the choice. Feasibility
    of the positive class is verified by a small LP unless an
    ``interior_point`` on the class is supplied.
    """
    net = model.net
    n = net.n_species
    basis = conservation_laws(net)
    k = len(basis)
    if len(levels) != k:
        raise ValueError(f"network has {k} conservation laws, got {len(levels)} levels")
    levels = np.asarray(levels, dtype=float)

    if k == 0:
        return ReducedSystem(
            dimension=n,
            rhs=lambda u: _full_rhs(model, u),
            jacobian=lambda u: _full_jacobian(model, u),
            embedding=lambda u: np.asarray(u, dtype=float),
            class_levels=(),
            species=net.species,
            free_indices=tuple(range(n)),
        )

    if interior_point is not None:
        x0 = np.asarray(interior_point, dtype=float)
        basis_float = np.array([[float(v) for v in row] for row in basis])
        if not np.allclose(basis_float @ x0, levels, rtol=0, atol=1e-8 * (1 + abs(levels).max())):
            raise ValueError("interior point does not lie on the requested class")
        if not np.all(x0 > 0):
            raise ValueError("interior point is not positive")
    elif check_feasible:
        basis_float = np.array([[float(v) for v in row] for row in basis])
        if not _class_is_feasible(basis_float, levels, n):
            raise ValueError("class does not intersect the positive orthant")

    if eliminate is None:
        eliminated = _select_eliminated(basis, n)
    else:
        eliminated = sorted(eliminate)
        if len(eliminated) != k:
            raise ValueError(f"need {k} eliminated coordinates, got {len(eliminated)}")
    free = [j for j in range(n) if j not in eliminated]

    # W_J u_J = levels - W_I u_I  =>  u_J = offset + M u_I  (exact inverse)
    w_elim = [[row[j] for j in eliminated] for row in basis]
    try:
        w_elim_inv = exact.invert(w_elim)
    except ValueError:
        raise ValueError(f"coordinates {eliminated} cannot be eliminated (singular block)")
    w_free = [[row[j] for j in free] for row in basis]
    m_exact = exact.matmul(w_elim_inv, w_free)
    m_float = -np.array([[float(v) for v in row] for row in m_exact]) if free else \
        np.zeros((k, 0))
    inv_float = np.array([[float(v) for v in row] for row in w_elim_inv])
    offset = inv_float @ levels

    free_arr = np.array(free, dtype=int)
    elim_arr = np.array(eliminated, dtype=int)

    def embedding(u):
        u = np.asarray(u, dtype=float)
        x = np.empty(n)
        x[free_arr] = u
        x[elim_arr] = offset + m_float @ u
        return x

    def rhs(u):
        return _full_rhs(model, embedding(u))[free_arr]

    def jacobian(u):
        j_full = _full_jacobian(model, embedding(u))
        return j_full[np.ix_(free_arr, free_arr)] + j_full[np.ix_(free_arr, elim_arr)] @ m_float

    return ReducedSystem(
        dimension=len(free),
        rhs=rhs,
        jacobian=jacobian,
        embedding=embedding,
        class_levels=tuple(float(v) for v in levels),
        species=net.species,
        free_indices=tuple(free),
    )


def _full_rhs(model: KineticModel, x: np.ndarray) -> np.ndarray:
    v = _rates_unchecked(model, x)
    if not np.all(np.isfinite(v)):
        raise DomainError(f"rate evaluation not finite at {x}")
    return model.gamma @ v


def _full_jacobian(model: KineticModel, x: np.ndarray) -> np.ndarray:
    dv = _rate_jacobian_unchecked(model, x)
    if not np.all(np.isfinite(dv)):
        raise DomainError(f"rate derivative not finite at {x}")
    return model.gamma @ dv


# ---------------------------------------------------------------------------
# integration
# ---------------------------------------------------------------------------


def _guarded(f: Callable[[np.ndarray], np.ndarray], dim: int):
    """Wrap an rhs so domain violations surface as NaN (step rejection)."""

    def wrapped(t, y):
        try:
            return f(y)
        except DomainError:
            return np.full(dim, np.nan)

    return wrapped


def integrate(
    sys: ReducedSystem,
    x0,
    t_end: float,
    tol: float = 1e-10,
    t_eval=None,
    method: str = "RK45",
    max_step: float = np.inf,
) -> Trajectory:
    """Adaptive explicit Runge-Kutta integration with dense output.

    Local error per step is controlled by ``tol`` (relative, with absolute
    floor three orders tighter). Domain violations make the step error
    non-finite, which shrinks the step; if the step size underflows the
    trajectory ends at the last valid state with ``success=False``.
    """
    x0 = np.asarray(x0, dtype=float)
    sys.rhs(x0)  # a start outside the domain is a caller error, not a domain exit
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        sol = solve_ivp(
            _guarded(sys.rhs, sys.dimension),
            (0.0, float(t_end)),
            x0,
            method=method,
            rtol=tol,
            atol=tol * 1e-3,
            dense_output=True,
            t_eval=t_eval,
            max_step=max_step,
        )
    return Trajectory(
        t=sol.t,
        states=sol.y.T,
        dense=sol.sol,
        success=bool(sol.success),
        message=sol.message,
        system=sys,
    )


# ---------------------------------------------------------------------------
# equilibria
# ---------------------------------------------------------------------------


def _classify_eigenvalues(eigs: np.ndarray, tol: float = 1e-8) -> str:
    real = eigs.real
    if np.any(np.abs(real) <= tol):
        return "nonhyperbolic"
    if np.all(real < 0):
        return "stable"
    if np.all(real > 0):
        return "unstable"
    return "saddle"


def _newton(sys: ReducedSystem, seed: np.ndarray, tol: float, max_iter: int):
    """Damped Newton; converged when the residual is small relative to the
    state scale or to the local function scale |J| (1 + |u|), whichever is
    larger (large-magnitude vector fields bottom out in roundoff long before
    an absolute residual threshold is reachable)."""
    u = np.array(seed, dtype=float)
    f = sys.rhs(u)
    for _ in range(max_iter):
        norm = np.linalg.norm(f, np.inf)
        state_scale = 1.0 + np.linalg.norm(u, np.inf)
        if norm <= tol * state_scale:
            return u, f
        jac = sys.jacobian(u)
        f_scale = max(1.0, float(np.abs(jac).max()) * state_scale)
        if norm <= tol * f_scale:
            return u, f
        try:
            step = np.linalg.solve(jac, -f)
        except np.linalg.LinAlgError:
            raise ConvergenceError(
                "Jacobian singular away from a root (fold suspected)",
                last=u,
                fold_suspected=True,
            )
        if np.linalg.norm(step, np.inf) <= tol * state_scale:
            # at the floating-point floor of the residual
            u = u + step
            return u, sys.rhs(u)
        lam = 1.0
        while True:
            try:
                f_new = sys.rhs(u + lam * step)
                if np.linalg.norm(f_new, np.inf) < (1.0 - 1e-4 * lam) * max(norm, tol * f_scale):
                    break
            except DomainError:
                pass
            lam *= 0.5
            if lam < 2**-30:
                raise ConvergenceError("Newton line search stalled", last=u)
        u = u + lam * step
        f = f_new
    raise ConvergenceError(f"Newton failed to converge in {max_iter} iterations", last=u)


def find_equilibrium(
    sys: ReducedSystem,
    seed,
    tol: float = 1e-12,
    max_iter: int = 100,
    hyperbolicity_tol: float = 1e-8,
) -> EquilibriumRecord:
    """Damped Newton with the analytic Jacobian, classified by reduced eigenvalues."""
    u, f = _newton(sys, np.asarray(seed, dtype=float), tol, max_iter)
    eigs = np.linalg.eigvals(sys.jacobian(u))
    eigs = eigs[np.lexsort((eigs.imag, eigs.real))]
    return EquilibriumRecord(
        point=sys.embedding(u),
        reduced=u,
        reduced_eigenvalues=eigs,
        classification=_classify_eigenvalues(eigs, hyperbolicity_tol),
        residual=float(np.linalg.norm(f, np.inf)),
    )


def find_all_equilibria(
    sys: ReducedSystem,
    search_box,
    grid: int = 10,
    tol: float = 1e-12,
    positivity_tol: float = 1e-9,
    dedup_tol: float = 1e-6,
) -> list[EquilibriumRecord]:
    """Newton from a lattice of seeds; positive equilibria, deduplicated and sorted.

    ``search_box`` is one (lo, hi) pair per reduced coordinate (a single pair
    is broadcast). Only equilibria whose full embedded state is strictly
    positive are reported.
    """
    box = list(search_box)
    if len(box) == 2 and np.isscalar(box[0]):
        box = [tuple(box)] * sys.dimension
    if len(box) != sys.dimension:
        raise ValueError(f"search box has {len(box)} intervals for dimension {sys.dimension}")
    axes = [np.linspace(lo, hi, grid) for lo, hi in box]
    mesh = np.meshgrid(*axes, indexing="ij")
    seeds = np.stack([m.ravel() for m in mesh], axis=-1)

    found: list[EquilibriumRecord] = []
    for seed in seeds:
        try:
            rec = find_equilibrium(sys, seed, tol=tol)
        except (ConvergenceError, DomainError):
            continue
        if np.any(rec.point <= positivity_tol * (1.0 + np.linalg.norm(rec.point, np.inf))):
            continue
        scale = 1.0 + np.linalg.norm(rec.reduced, np.inf)
        if any(np.linalg.norm(rec.reduced - other.reduced, np.inf) <= dedup_tol * scale
               for other in found):
            continue
        found.append(rec)
    found.sort(key=lambda r: tuple(r.reduced))
    return found


# ---------------------------------------------------------------------------
# periodic orbits (single shooting)
# ---------------------------------------------------------------------------


def _flow_with_monodromy(sys: ReducedSystem, u0: np.ndarray, t_span: float,
                         tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Integrate the state together with the variational equations."""
    dim = sys.dimension

    def rhs_aug(t, z):
        u = z[:dim]
        try:
            du = sys.rhs(u)
            j = sys.jacobian(u)
        except DomainError:
            return np.full(dim + dim * dim, np.nan)
        phi = z[dim:].reshape(dim, dim)
        return np.concatenate([du, (j @ phi).ravel()])

    z0 = np.concatenate([u0, np.eye(dim).ravel()])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        sol = solve_ivp(rhs_aug, (0.0, t_span), z0, method="DOP853", rtol=tol, atol=tol * 1e-2)
    if not sol.success:
        raise ConvergenceError(f"variational integration failed: {sol.message}")
    z_end = sol.y[:, -1]
    return z_end[:dim], z_end[dim:].reshape(dim, dim)


def _first_return_time(sys: ReducedSystem, anchor: np.ndarray, normal: np.ndarray,
                       t_guess: float, t_max: float, tol: float) -> float:
    """First crossing time of the section ``normal . (u - anchor) = 0``, same direction.

    The trajectory starts exactly on the section, so a short arc is integrated
    before the crossing event is armed.
    """
    skip = 0.01 * t_guess
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        lead = solve_ivp(
            _guarded(sys.rhs, sys.dimension),
            (0.0, skip),
            anchor,
            method="DOP853",
            rtol=tol,
            atol=tol * 1e-2,
        )
    if not lead.success:
        raise ConvergenceError(f"integration failed before leaving the section: {lead.message}")

    def event(t, y):
        return float(normal @ (y - anchor))

    event.terminal = True
    event.direction = 1.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        sol = solve_ivp(
            _guarded(sys.rhs, sys.dimension),
            (skip, t_max),
            lead.y[:, -1],
            method="DOP853",
            rtol=tol,
            atol=tol * 1e-2,
            events=event,
        )
    if sol.t_events[0].size == 0:
        raise ConvergenceError(f"no return to the section within t = {t_max}")
    return float(sol.t_events[0][0])


def find_periodic_orbit(
    sys: ReducedSystem,
    seed,
    t_guess: float,
    tol: float = 1e-10,
    ode_tol: float = 1e-12,
    max_iter: int = 30,
    multiplier_tol: float = 1e-6,
) -> PeriodicOrbitRecord:
    """Locate a periodic orbit by single shooting on a Poincare section.

    The section passes through the seed orthogonally to the flow; Newton
    updates point and period simultaneously using the monodromy matrix from
    the variational equations. Floquet multipliers are the monodromy
    eigenvalues; one of them should be 1 for a true orbit.
    """
    if sys.dimension < 2:
        raise ValueError("periodic orbits need dimension >= 2")
    u = np.asarray(seed, dtype=float)
    f0 = sys.rhs(u)
    f0_norm = np.linalg.norm(f0)
    if f0_norm < 1e-10 * (1.0 + np.linalg.norm(u)):
        raise ConvergenceError("seed is an equilibrium: degenerate section")
    normal = f0 / f0_norm
    anchor = u.copy()

    period = _first_return_time(sys, anchor, normal, t_guess, 10.0 * t_guess, ode_tol)
    monodromy = np.eye(sys.dimension)
    residual = np.inf
    for _ in range(max_iter):
        u_end, monodromy = _flow_with_monodromy(sys, u, period, ode_tol)
        gap = u_end - u
        residual = np.linalg.norm(gap, np.inf)
        if residual <= tol:
            break
        f_end = sys.rhs(u_end)
        # bordered Newton system for (delta_u, delta_T)
        dim = sys.dimension
        a = np.zeros((dim + 1, dim + 1))
        a[:dim, :dim] = monodromy - np.eye(dim)
        a[:dim, dim] = f_end
        a[dim, :dim] = normal
        b = np.zeros(dim + 1)
        b[:dim] = -gap
        b[dim] = -float(normal @ (u - anchor))
        try:
            delta = np.linalg.solve(a, b)
        except np.linalg.LinAlgError:
            delta, *_ = np.linalg.lstsq(a, b, rcond=None)
        step = 1.0
        while step >= 2**-16:
            u_try = u + step * delta[:dim]
            t_try = period + step * delta[dim]
            if t_try > 0:
                try:
                    end_try, _ = _flow_with_monodromy(sys, u_try, t_try, ode_tol)
                    if np.linalg.norm(end_try - u_try, np.inf) < residual:
                        break
                except ConvergenceError:
                    pass
            step *= 0.5
        else:
            raise ConvergenceError("shooting line search stalled", last=u)
        u = u + step * delta[:dim]
        period = period + step * delta[dim]
    else:
        raise ConvergenceError(
            f"shooting failed to converge (residual {residual:.2e})", last=u
        )

    speed = np.linalg.norm(sys.rhs(u))
    if speed < 1e-8 * (1.0 + np.linalg.norm(u)):
        raise ConvergenceError(
            "shooting collapsed onto an equilibrium (zero-amplitude orbit)", last=u
        )
    floquet = np.linalg.eigvals(monodromy)
    trivial = int(np.argmin(np.abs(floquet - 1.0)))
    others = np.delete(floquet, trivial)
    if others.size == 0:
        stability = "nonhyperbolic"
    else:
        radius = np.max(np.abs(others))
        if radius < 1.0 - multiplier_tol:
            stability = "linearly stable"
        elif radius > 1.0 + multiplier_tol:
            stability = "unstable"
        else:
            stability = "nonhyperbolic"
    order = np.lexsort((floquet.imag, floquet.real, np.abs(floquet)))
    return PeriodicOrbitRecord(
        anchor=sys.embedding(u),
        reduced_anchor=u,
        period=float(period),
        floquet=floquet[order],
        stability=stability,
        residual=float(residual),
    )
