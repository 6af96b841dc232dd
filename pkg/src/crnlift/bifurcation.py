"""Bifurcation detection along parameter paths and the homogenised Brusselator.

Scans track an equilibrium branch by Newton continuation, detect sign changes
of the Jacobian determinant (folds) or trace (Andronov-Hopf points), bracket
them by bisection and polish with an augmented Newton solve so the defining
residuals vanish to near machine precision. For planar systems the first
focal value distinguishes supercritical from subcritical Hopf points.

The homogenised Brusselator admits a closed-form treatment: its equilibrium
branch, fold set, Hopf set, Bogdanov-Takens and Bautin points are all explicit
in the rate constants, which this module evaluates directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .dynamics import ConvergenceError, EquilibriumRecord, ReducedSystem, find_equilibrium


class BranchLostError(RuntimeError):
    """Equilibrium branch could not be continued; carries the last good parameter."""

    def __init__(self, message: str, last_parameter: float):
        super().__init__(message)
        self.last_parameter = last_parameter


@dataclass(frozen=True, eq=False)
class BifurcationPoint:
    kind: str  # fold | hopf | bautin | bogdanov_takens
    parameters: dict[str, float]
    state: np.ndarray  # full species coordinates
    reduced_state: np.ndarray
    diagnostics: dict[str, float] = field(default_factory=dict)


SystemFactory = Callable[[float], ReducedSystem]


def _det_trace(sys: ReducedSystem, u: np.ndarray) -> tuple[float, float]:
    jac = sys.jacobian(u)
    return float(np.linalg.det(jac)), float(np.trace(jac))


def _solve_on_branch(
    make_system: SystemFactory,
    p: float,
    seed: np.ndarray,
    newton_tol: float,
    jump_tol: float | None = 0.5,
) -> tuple[ReducedSystem, EquilibriumRecord]:
    """Newton at parameter p from the previous branch point.

    A solution far from the seed means Newton escaped to a different
    equilibrium (for instance a boundary one after the branch folded); that is
    treated as a continuation failure, not a branch point.
    """
    sys = make_system(p)
    rec = find_equilibrium(sys, seed, tol=newton_tol)
    if jump_tol is not None:
        gap = np.linalg.norm(rec.reduced - seed, np.inf)
        if gap > jump_tol * (1.0 + np.linalg.norm(seed, np.inf)):
            raise ConvergenceError(
                f"Newton left the tracked branch at p = {p} (jump {gap:.3g})", last=rec.reduced
            )
    return sys, rec


def _bisect_sign_change(
    make_system: SystemFactory,
    quantity: Callable[[ReducedSystem, np.ndarray], float],
    p_lo: float,
    p_hi: float,
    u_lo: np.ndarray,
    u_hi: np.ndarray,
    rel_tol: float,
    newton_tol: float,
) -> tuple[float, np.ndarray]:
    """Bisect a parameter interval on the sign of a branch quantity."""
    sys_lo = make_system(p_lo)
    q_lo = quantity(sys_lo, u_lo)
    while abs(p_hi - p_lo) > rel_tol * max(1.0, abs(p_lo), abs(p_hi)):
        p_mid = 0.5 * (p_lo + p_hi)
        seed = 0.5 * (u_lo + u_hi)
        try:
            sys_mid, rec = _solve_on_branch(make_system, p_mid, seed, newton_tol)
        except ConvergenceError:
            # shrink toward the known-good side
            p_hi, u_hi = p_mid, seed
            continue
        q_mid = quantity(sys_mid, rec.reduced)
        if q_mid == 0.0:
            return p_mid, rec.reduced
        if (q_mid > 0) == (q_lo > 0):
            p_lo, u_lo, q_lo = p_mid, rec.reduced, q_mid
        else:
            p_hi, u_hi = p_mid, rec.reduced
    return 0.5 * (p_lo + p_hi), 0.5 * (u_lo + u_hi)


def _bisect_branch_end(
    make_system: SystemFactory,
    p_good: float,
    p_bad: float,
    u_good: np.ndarray,
    rel_tol: float,
    newton_tol: float,
) -> tuple[float, np.ndarray]:
    """Bisect on continuability to localise where the branch terminates."""
    while abs(p_bad - p_good) > rel_tol * max(1.0, abs(p_good), abs(p_bad)):
        p_mid = 0.5 * (p_good + p_bad)
        try:
            _, rec = _solve_on_branch(make_system, p_mid, u_good, newton_tol)
        except ConvergenceError:
            p_bad = p_mid
            continue
        p_good, u_good = p_mid, rec.reduced
    return p_good, u_good


def _augmented_polish(
    make_system: SystemFactory,
    quantity: Callable[[ReducedSystem, np.ndarray], float],
    p: float,
    u: np.ndarray,
    tol: float = 1e-13,
    max_iter: int = 40,
) -> tuple[float, np.ndarray, ReducedSystem]:
    """Newton on [rhs(u; p); quantity(u; p)] = 0 in the unknowns (u, p).

    Bisection alone cannot push a fold determinant below ~sqrt(machine eps)
    because det scales like the square root of the parameter distance; the
    augmented solve converges quadratically to the exact codimension-one point.
    """
    dim = len(u)
    z = np.append(np.array(u, dtype=float), p)

    def eval_all(z):
        sys = make_system(z[-1])
        f = sys.rhs(z[:dim])
        q = quantity(sys, z[:dim])
        return sys, np.append(f, q)

    sys, res = eval_all(z)
    for _ in range(max_iter):
        scale = 1.0 + np.linalg.norm(z, np.inf)
        if np.linalg.norm(res, np.inf) <= tol * scale:
            return float(z[-1]), z[:dim], sys
        jac = np.zeros((dim + 1, dim + 1))
        jac[:dim, :dim] = sys.jacobian(z[:dim])
        # finite differences for the parameter column and the quantity row
        for idx in range(dim + 1):
            h = 1e-6 * (1.0 + abs(z[idx]))
            z_plus = z.copy()
            z_plus[idx] += h
            z_minus = z.copy()
            z_minus[idx] -= h
            _, res_plus = eval_all(z_plus)
            _, res_minus = eval_all(z_minus)
            if idx == dim:
                jac[:dim, dim] = (res_plus[:dim] - res_minus[:dim]) / (2 * h)
            jac[dim, idx] = (res_plus[dim] - res_minus[dim]) / (2 * h)
        try:
            step = np.linalg.solve(jac, -res)
        except np.linalg.LinAlgError:
            step, *_ = np.linalg.lstsq(jac, -res, rcond=None)
        best = None
        lam = 1.0
        while lam >= 2**-20:
            z_try = z + lam * step
            try:
                sys_try, res_try = eval_all(z_try)
            except (ConvergenceError, ValueError):
                lam *= 0.5
                continue
            if np.linalg.norm(res_try, np.inf) < np.linalg.norm(res, np.inf):
                best = (z_try, sys_try, res_try)
                break
            lam *= 0.5
        if best is None:
            break
        z, sys, res = best
    scale = 1.0 + np.linalg.norm(z, np.inf)
    if np.linalg.norm(res, np.inf) > 1e-8 * scale:
        raise ConvergenceError("augmented bifurcation solve did not converge", last=z)
    return float(z[-1]), z[:dim], sys


def _scan(
    make_system: SystemFactory,
    values: Sequence[float],
    seed,
    kind: str,
    param_name: str,
    newton_tol: float,
    bisect_rel_tol: float,
) -> list[BifurcationPoint]:
    values = [float(v) for v in values]
    if len(values) < 2:
        raise ValueError("need at least two parameter samples")

    if kind == "fold":
        quantity = lambda sys, u: _det_trace(sys, u)[0]
    else:
        quantity = lambda sys, u: _det_trace(sys, u)[1]

    points: list[BifurcationPoint] = []

    def append_point(p_star, u_star, sys_star):
        point = _make_point(kind, param_name, p_star, u_star, sys_star)
        # trace zero with nonpositive determinant is not a Hopf point
        if kind == "hopf" and point.diagnostics["det"] <= 0:
            return
        for other in points:
            if abs(other.parameters[param_name] - p_star) <= 1e-8 * (1.0 + abs(p_star)):
                return
        points.append(point)

    prev_p = values[0]
    try:
        prev_sys, rec = _solve_on_branch(make_system, prev_p, np.asarray(seed, dtype=float),
                                         newton_tol, jump_tol=None)
    except ConvergenceError as err:
        raise BranchLostError(f"no equilibrium at the first sample {prev_p}", prev_p) from err
    prev_u = rec.reduced
    prev_q = quantity(prev_sys, prev_u)
    prev_det = _det_trace(prev_sys, prev_u)[0]
    if prev_q == 0.0:
        p_star, u_star, sys_star = _augmented_polish(make_system, quantity, prev_p, prev_u)
        append_point(p_star, u_star, sys_star)

    for p in values[1:]:
        try:
            sys, rec = _solve_on_branch(make_system, p, prev_u, newton_tol)
        except ConvergenceError as err:
            if kind == "fold":
                # the branch may terminate in a fold: localise the endpoint,
                # then solve the fold conditions exactly from there
                p_end, u_end = _bisect_branch_end(
                    make_system, prev_p, p, prev_u, bisect_rel_tol, newton_tol
                )
                try:
                    p_star, u_star, sys_star = _augmented_polish(
                        make_system, quantity, p_end, u_end
                    )
                except ConvergenceError:
                    raise BranchLostError(
                        f"branch lost between {prev_p} and {p}", prev_p
                    ) from err
                append_point(p_star, u_star, sys_star)
                return points
            raise BranchLostError(f"branch lost between {prev_p} and {p}", prev_p) from err
        q = quantity(sys, rec.reduced)
        det = _det_trace(sys, rec.reduced)[0]
        if q == 0.0:
            p_star, u_star, sys_star = _augmented_polish(make_system, quantity, p, rec.reduced)
            append_point(p_star, u_star, sys_star)
        elif (q > 0) != (prev_q > 0) and prev_q != 0:
            if kind != "hopf" or det > 0 or prev_det > 0:
                p_mid, u_mid = _bisect_sign_change(
                    make_system, quantity, prev_p, p, prev_u, rec.reduced,
                    bisect_rel_tol, newton_tol,
                )
                p_star, u_star, sys_star = _augmented_polish(make_system, quantity, p_mid, u_mid)
                append_point(p_star, u_star, sys_star)
        prev_p, prev_u, prev_q, prev_det = p, rec.reduced, q, det
    return points


def _make_point(kind: str, param_name: str, p: float, u: np.ndarray,
                sys: ReducedSystem) -> BifurcationPoint:
    det, trace = _det_trace(sys, u)
    diagnostics = {"det": det, "trace": trace}
    if kind == "hopf" and sys.dimension == 2 and det > 0:
        diagnostics["L1"] = focal_value_L1(sys, u)
    return BifurcationPoint(
        kind=kind,
        parameters={param_name: p},
        state=sys.embedding(u),
        reduced_state=np.array(u),
        diagnostics=diagnostics,
    )


def fold_scan(
    make_system: SystemFactory,
    values: Sequence[float],
    seed,
    param_name: str = "p",
    newton_tol: float = 1e-12,
    bisect_rel_tol: float = 1e-10,
) -> list[BifurcationPoint]:
    """Fold points along an equilibrium branch over sampled parameter values.

    The branch is continued by Newton from each previous solution; folds are
    detected either as determinant sign changes or as loss of the branch, and
    are polished so |det J| drops to roughly machine precision.
    """
    return _scan(make_system, values, seed, "fold", param_name, newton_tol, bisect_rel_tol)


def hopf_scan(
    make_system: SystemFactory,
    values: Sequence[float],
    seed,
    param_name: str = "p",
    newton_tol: float = 1e-12,
    bisect_rel_tol: float = 1e-10,
) -> list[BifurcationPoint]:
    """Andronov-Hopf points (trace zero, det positive) along an equilibrium branch.

    Each returned point carries the first focal value ``L1`` in its
    diagnostics; negative means supercritical.
    """
    probe = make_system(float(values[0]))
    if probe.dimension != 2:
        raise ValueError("hopf_scan requires a planar reduced system")
    return _scan(make_system, values, seed, "hopf", param_name, newton_tol, bisect_rel_tol)


# ---------------------------------------------------------------------------
# first focal value for planar systems
# ---------------------------------------------------------------------------


def focal_value_L1(sys: ReducedSystem, equilibrium, fd_step: float = 1e-4) -> float:
    """First focal value of a planar vector field at a Hopf configuration.

    The system is shifted to the equilibrium and brought to the normal frame
    in which the linear part is the rotation [[0, -w], [w, 0]]; the classical
    third-order normal-form combination of partial derivatives then gives the
    focal value. Derivatives up to third order are obtained from the analytic
    Jacobian by Richardson-extrapolated central differences. Only the sign and
    zero set are normalisation-independent.
    """
    if sys.dimension != 2:
        raise ValueError("focal value is defined for planar systems")
    u0 = np.asarray(equilibrium, dtype=float)
    jac = sys.jacobian(u0)
    trace = float(np.trace(jac))
    det = float(np.linalg.det(jac))
    scale = 1.0 + float(np.abs(jac).max())
    if det <= 0 or abs(trace) > 1e-5 * scale:
        raise ValueError(
            f"not a Hopf configuration: trace = {trace:.3e}, det = {det:.3e}"
        )
    omega = math.sqrt(det - 0.25 * trace * trace)

    # traceless part has eigenvalues exactly +-i*omega
    j0 = jac - 0.5 * trace * np.eye(2)
    a, b = j0[0, 0], j0[0, 1]
    c = j0[1, 0]
    if abs(b) >= abs(c):
        p_mat = np.array([[b, 0.0], [-a, -omega]])
    else:
        p_mat = np.array([[a, -omega], [c, 0.0]])
    p_mat = p_mat / np.max(np.abs(p_mat))
    p_inv = np.linalg.inv(p_mat)

    def transformed_jacobian(w):
        return p_inv @ sys.jacobian(u0 + p_mat @ w) @ p_mat

    g0 = transformed_jacobian(np.zeros(2))
    rotation = np.array([[0.0, -omega], [omega, 0.0]])
    if not np.allclose(g0 - 0.5 * trace * np.eye(2), rotation, atol=1e-6 * (1 + omega)):
        raise AssertionError("normal-frame transformation failed")

    evals: dict[tuple[float, float], np.ndarray] = {}

    def g_at(s1, s2):
        key = (s1, s2)
        if key not in evals:
            evals[key] = transformed_jacobian(np.array([s1, s2]))
        return evals[key]

    def first_partial(axis, h):
        d = lambda hh: (g_at(*_offset(axis, hh)) - g_at(*_offset(axis, -hh))) / (2 * hh)
        return (4.0 * d(h / 2) - d(h)) / 3.0

    def second_partial(axis, h):
        d = lambda hh: (g_at(*_offset(axis, hh)) - 2.0 * g0 + g_at(*_offset(axis, -hh))) / hh**2
        return (4.0 * d(h / 2) - d(h)) / 3.0

    def _offset(axis, h):
        return (h, 0.0) if axis == 0 else (0.0, h)

    dx = first_partial(0, fd_step)
    dy = first_partial(1, fd_step)
    sxx = second_partial(0, fd_step)
    syy = second_partial(1, fd_step)

    f_xx, f_yy = dx[0, 0], dy[0, 1]
    f_xy = 0.5 * (dy[0, 0] + dx[0, 1])
    g_xx, g_yy = dx[1, 0], dy[1, 1]
    g_xy = 0.5 * (dy[1, 0] + dx[1, 1])
    f_xxx, f_xyy = sxx[0, 0], syy[0, 0]
    g_xxy, g_yyy = sxx[1, 1], syy[1, 1]

    return (f_xxx + f_xyy + g_xxy + g_yyy) / 16.0 + (
        f_xy * (f_xx + f_yy) - g_xy * (g_xx + g_yy) - f_xx * g_xx + f_yy * g_yy
    ) / (16.0 * omega)


# ---------------------------------------------------------------------------
# homogenised Brusselator: closed-form branch and bifurcation sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BrusselatorParams:
    """Rate constants of the homogenised Brusselator with derived quantities.

    The positive equilibria form the branch (t, k3/(k4 t), k2 t / k1) for
    t > 0; on the class x + y + z = c there are 0, 1 or 2 of them according to
    whether c is below, at or above ``c_star``.
    """

    k1: float
    k2: float
    k3: float
    k4: float

    def __post_init__(self):
        for name in ("k1", "k2", "k3", "k4"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    @property
    def a(self) -> float:
        return self.k2 / self.k1

    @property
    def b(self) -> float:
        return self.k3 / self.k1

    @property
    def c_star(self) -> float:
        return 2.0 * math.sqrt((self.k1 + self.k2) * self.k3 / (self.k1 * self.k4))

    @property
    def t_star(self) -> float:
        return math.sqrt(self.k1 * self.k3 / ((self.k1 + self.k2) * self.k4))

    def class_level(self, t: float) -> float:
        """Value of x + y + z on the equilibrium with parameter t."""
        return t * (self.k1 + self.k2) / self.k1 + self.k3 / (self.k4 * t)

    def equilibrium_state(self, t: float) -> np.ndarray:
        return np.array([t, self.k3 / (self.k4 * t), self.k2 * t / self.k1])

    def equilibrium_t(self, c: float) -> tuple[float, ...]:
        """Branch parameters of the equilibria on the class x + y + z = c.

        The discriminant is compared against its own roundoff level so that
        c equal to c_star (up to floating error) reports the double root.
        """
        ratio = (self.k1 + self.k2) / self.k1
        disc = c * c - 4.0 * ratio * self.k3 / self.k4
        floor = 64.0 * np.finfo(float).eps * c * c
        if disc < -floor:
            return ()
        if disc <= floor:
            return (c / (2.0 * ratio),)
        root = math.sqrt(disc)
        return ((c - root) / (2.0 * ratio), (c + root) / (2.0 * ratio))

    def jacobian_det(self, t: float) -> float:
        return (self.k1 + self.k2) * self.k4 * t * t - self.k1 * self.k3

    def jacobian_trace(self, t: float) -> float:
        return -self.k4 * t * t + (self.k3 - self.k1 - self.k2)


def boundary_equilibrium_check(k, c: float) -> dict:
    """Eigenvalues of the class-restricted Jacobian at the corner state (0, c, 0).

    The corner Jacobian is [[-k1-k2-k3, -k1], [k3, 0]]; its discriminant is
    (k1+k2-k3)^2 + 4 k2 k3 > 0, so both eigenvalues are real and negative and
    the corner attracts within every class, independently of k4 and c.
    """
    k1, k2, k3, k4 = (float(v) for v in k)
    if min(k1, k2, k3, k4) <= 0 or c <= 0:
        raise ValueError("rate constants and c must be positive")
    j0 = np.array([[-k1 - k2 - k3, -k1], [k3, 0.0]])
    disc = (k1 + k2 - k3) ** 2 + 4.0 * k2 * k3
    assert disc > 0
    eigs = np.sort(np.linalg.eigvals(j0).real)
    assert np.all(np.isreal(np.linalg.eigvals(j0)))
    stable = bool(np.all(eigs < 0))
    assert stable
    return {"eigenvalues": (float(eigs[0]), float(eigs[1])), "stable": stable}


def _p_coefficients(a):
    """Coefficients of P(a, .) in descending powers of b; works for Fractions too."""
    return [
        2 - a,
        -(5 + 3 * a - a * a),
        5 + 12 * a + 8 * a * a + a**3,
        -(4 + 13 * a + 15 * a * a + 7 * a**3 + a**4),
    ]


def brusselator_P(a, b):
    """Focal-value numerator P(a, b); exact when given Fractions."""
    c3, c2, c1, c0 = _p_coefficients(a)
    return ((c3 * b + c2) * b + c1) * b + c0


def brusselator_L1_closed_form(a: float, b: float) -> float:
    """Closed-form focal value factor P(a, b) / Q(a, b) on the Hopf set.

    Valid for a b > (1 + a)^2 (positive determinant) where the denominator
    Q = (a b - (1+a)^2)^{3/2} (b - a - 2) is positive; callers multiply by the
    positive factor 1/t^2 to obtain the focal value itself, so only the sign
    and zero set are meaningful.
    """
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    gap = a * b - (1.0 + a) ** 2
    if gap <= 0:
        raise ValueError(f"outside the Hopf set: a*b - (1+a)^2 = {gap} <= 0")
    if b - a - 2.0 <= 0:
        raise ValueError(f"denominator factor b - a - 2 = {b - a - 2.0} <= 0")
    q = gap**1.5 * (b - a - 2.0)
    return brusselator_P(a, b) / q


def brusselator_gh_candidates(k1: float, k2: float, c: float,
                              cond_tol: float = 1e-3) -> list[dict]:
    """Roots of P(a, b) = 0 along the Hopf set for fixed a = k2/k1 and class c.

    Each candidate reports the (k3, k4, t) location on the class together with
    a conditioning flag: when dP/db nearly vanishes at the root (the root is
    nearly double), the Bautin point is ill-conditioned and its detection is
    unreliable.
    """
    a = k2 / k1
    coeffs = _p_coefficients(a)
    trimmed = np.trim_zeros(np.array(coeffs, dtype=float), "f")
    if trimmed.size <= 1:
        return []
    roots = np.roots(trimmed)
    b_min = (1.0 + a) ** 2 / a
    candidates = []
    deriv = np.polyder(np.array(coeffs, dtype=float))
    for root in roots:
        # a nearly-double real root surfaces as a complex pair with a tiny
        # imaginary part; keep it so the ill-conditioning can be reported
        if abs(root.imag) > 1e-5 * max(1.0, abs(root.real)):
            continue
        b = float(root.real)
        if b <= b_min:
            continue
        if any(abs(c["b"] - b) <= 1e-6 * max(1.0, b) for c in candidates):
            continue
        k3 = b * k1
        denom = (k1 + k2) / k1 + k3 / (k3 - k1 - k2)
        t = c / denom
        k4 = (k3 - k1 - k2) / (t * t)
        p_b = float(np.polyval(deriv, b))
        poly_scale = max(abs(cf) * b**e for e, cf in zip((3, 2, 1, 0), coeffs)) / max(b, 1.0)
        candidates.append(
            {
                "a": a,
                "b": b,
                "k3": k3,
                "k4": k4,
                "t": t,
                "dP_db": p_b,
                "ill_conditioned": abs(p_b) < cond_tol * poly_scale,
            }
        )
    candidates.sort(key=lambda d: d["b"])
    return candidates


@dataclass(frozen=True, eq=False)
class BrusselatorDiagram:
    """Fold/Hopf curves and distinguished points in the (k3, k4) plane."""

    k1: float
    k2: float
    c: float
    fold_curve: np.ndarray  # columns (k3, k4)
    hopf_curve: np.ndarray  # columns (k3, k4)
    bt_point: dict
    gh_points: list[dict]
    notes: tuple[str, ...] = ()


def brusselator_bifurcation_sets(
    k1: float,
    k2: float,
    c: float,
    k3_range: tuple[float, float] | None = None,
    samples: int = 200,
) -> BrusselatorDiagram:
    """Bifurcation diagram data of the homogenised Brusselator on a fixed class.

    The fold set satisfies c^2 = 4 (k1+k2) k3 / (k1 k4), the Hopf set is
    obtained by eliminating t from the zero-trace and class conditions, the
    Bogdanov-Takens point sits where k2 k3 = (k1+k2)^2 meets the fold set, and
    Bautin points are the focal-value roots along the Hopf set.
    """
    if min(k1, k2, c) <= 0:
        raise ValueError("k1, k2 and c must be positive")
    k3_bt = (k1 + k2) ** 2 / k2
    if k3_range is None:
        k3_range = (0.25 * k3_bt, 4.0 * k3_bt)
    k3_lo, k3_hi = (float(v) for v in k3_range)

    k3_grid = np.linspace(k3_lo, k3_hi, samples)
    fold_k4 = 4.0 * (k1 + k2) * k3_grid / (k1 * c * c)
    fold_curve = np.column_stack([k3_grid, fold_k4])

    hopf_rows = []
    for k3 in k3_grid:
        if k2 * k3 <= (k1 + k2) ** 2:
            continue
        denom = (k1 + k2) / k1 + k3 / (k3 - k1 - k2)
        t = c / denom
        k4 = (k3 - k1 - k2) / (t * t)
        hopf_rows.append((k3, k4))
    hopf_curve = np.array(hopf_rows) if hopf_rows else np.empty((0, 2))

    t_bt = c * k1 / (2.0 * (k1 + k2))
    k4_bt = k1 * k3_bt / ((k1 + k2) * t_bt * t_bt)
    bt_point = {"k3": k3_bt, "k4": k4_bt, "t": t_bt}

    notes = []
    gh_points = brusselator_gh_candidates(k1, k2, c)
    gh_in_range = [g for g in gh_points if k3_lo <= g["k3"] <= k3_hi]
    if not gh_in_range:
        notes.append("no Bautin point in the requested k3 range")
    if not (k3_lo <= k3_bt <= k3_hi):
        notes.append("Bogdanov-Takens point outside the requested k3 range")
    for g in gh_in_range:
        if g["ill_conditioned"]:
            notes.append(
                f"Bautin point at k3 = {g['k3']:.6g} is ill-conditioned (nearly double root)"
            )

    return BrusselatorDiagram(
        k1=k1,
        k2=k2,
        c=c,
        fold_curve=fold_curve,
        hopf_curve=hopf_curve,
        bt_point=bt_point,
        gh_points=gh_in_range,
        notes=tuple(notes),
    )


def focal_sign_grid(
    a_values: Sequence[float],
    b_values: Sequence[float],
) -> list[tuple[float, float, int, int]]:
    """Sign of P(a, b) on a grid restricted to the Hopf region a b > (1+a)^2.

    Rows are (a, b, sign_P, on_boundary) where on_boundary marks cells whose
    distance to the det-zero curve a b = (1+a)^2 is below the local grid
    resolution (the locus of Bogdanov-Takens points).
    """
    a_values = list(a_values)
    b_values = list(b_values)
    da = max((max(a_values) - min(a_values)) / max(len(a_values) - 1, 1), 1e-12)
    db = max((max(b_values) - min(b_values)) / max(len(b_values) - 1, 1), 1e-12)
    rows = []
    for a in a_values:
        for b in b_values:
            gap = a * b - (1.0 + a) ** 2
            if gap <= 0:
                continue
            p = brusselator_P(a, b)
            sign = 0 if p == 0 else (1 if p > 0 else -1)
            # linearised distance of the cell to the boundary curve
            boundary = int(abs(gap) <= a * db / 2 + abs(b - 2.0 * (1.0 + a)) * da / 2)
            rows.append((a, b, sign, boundary))
    return rows


def lotka_first_integral(k, x: float, y: float) -> float:
    """Conserved quantity x^(-k3) y^(-k1) e^(k2 (x+y)) of the Lotka system."""
    k1, k2, k3 = (float(v) for v in k)
    if x <= 0 or y <= 0:
        raise ValueError("the first integral is defined on the open positive quadrant")
    return x ** (-k3) * y ** (-k1) * math.exp(k2 * (x + y))
