"""Adding a linearly dependent species to a kinetic model.

Given a model on n species and a rational dependency vector c, the lifted
network gains one species whose stoichiometric-matrix row is c^t Gamma, so the
rank is unchanged. Scaling the rate constants by eps**alpha and selecting the
invariant set ``y = 1/eps + c^t x`` yields, in the x coordinates, a vector
field that converges to the original one on compact positive sets as eps -> 0;
nondegenerate equilibria and periodic orbits of the original model therefore
persist in the lifted one. All operations here emit the concrete rate
constants and class selections realising that construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import dynamics
from .kinetics import (
    DomainError,
    ExponentMatrix,
    KineticModel,
    _rate_jacobian_unchecked,
    _rates_unchecked,
    rate_vector,
)
from .network import CRN, NetworkError, Reaction, conservation_laws, network_rank, \
    stoichiometric_matrix


class LiftError(NetworkError):
    """Invalid lifting data (sign constraints, name collision, rank change)."""


def _as_fraction_vector(values, length: int, what: str) -> tuple[Fraction, ...]:
    out = []
    for v in values:
        if isinstance(v, float) and not v.is_integer():
            f = Fraction(v).limit_denominator(10**9)
        else:
            f = Fraction(v)
        out.append(f)
    if len(out) != length:
        raise LiftError(f"{what} has length {len(out)}, expected {length}")
    return tuple(out)


@dataclass(frozen=True, eq=False)
class LiftSpec:
    """Data defining one lifted species.

    c is the dependency vector (the new stoichiometric row is c^t Gamma),
    alpha the exponent of the new species in each reaction rate, and
    reactant_coeffs the coefficient of the new species in each reactant
    complex. For mass-action lifts alpha equals reactant_coeffs.
    """

    c: tuple[Fraction, ...]
    alpha: np.ndarray
    reactant_coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        alpha = np.asarray(self.alpha, dtype=float)
        alpha.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)

    @property
    def c_float(self) -> np.ndarray:
        return np.array([float(v) for v in self.c])


@dataclass(frozen=True, eq=False)
class LiftedFamily:
    """A base model plus lifting data, generating one lifted model per eps > 0."""

    base: KineticModel
    spec: LiftSpec
    lifted_net: CRN
    species_name: str

    def scaled_kappa(self, eps: float) -> np.ndarray:
        return scaled_rate_constants(self.base.kappa, self.spec.alpha, eps)

    def model_at(self, eps: float) -> KineticModel:
        """Concrete lifted kinetic model with rate constants eps**alpha * kappa."""
        base_A = self.base.exponents
        entries = np.hstack([base_A.entries, self.spec.alpha[:, None]])
        exponents = ExponentMatrix(entries, exact=base_A.exact)
        return KineticModel(self.lifted_net, exponents, self.scaled_kappa(eps))

    def lifted_state(self, x, eps: float) -> np.ndarray:
        """Embed base coordinates into the selected invariant set y = 1/eps + c.x."""
        x = np.asarray(x, dtype=float)
        return np.append(x, 1.0 / eps + self.spec.c_float @ x)

    def selected_levels(self, eps: float, base_levels=()) -> list[float]:
        """Values of the lifted network's conservation laws on the selected class.

        The canonical conservation basis of the lifted network is evaluated on
        the affine set ``{(x, 1/eps + c^t x) : x in base class}``. When the base
        network has conservation laws of its own, their levels must be given.
        """
        base_basis = conservation_laws(self.base.net)
        if len(base_levels) != len(base_basis):
            raise ValueError(
                f"base network has {len(base_basis)} conservation laws, "
                f"got {len(base_levels)} levels"
            )
        lifted_basis = conservation_laws(self.lifted_net)
        n = self.base.net.n_species
        levels = []
        for w in lifted_basis:
            beta = w[n]
            u = [w[j] + beta * self.spec.c[j] for j in range(n)]  # in the base left kernel
            value = float(beta) / eps
            if any(v != 0 for v in u):
                # expand u in the canonical base basis (RREF: coefficients read off pivots)
                coeffs = _expand_in_basis(u, base_basis)
                value += sum(float(ci) * li for ci, li in zip(coeffs, base_levels))
            levels.append(value)
        return levels

    def reduced_system(self, eps: float) -> "dynamics.ReducedSystem":
        """Dynamics on the selected class in base coordinates (requires full-rank base)."""
        if conservation_laws(self.base.net):
            raise LiftError(
                "base network has conservation laws; reduce the lifted model "
                "with reduce_to_class instead"
            )
        n = self.base.net.n_species
        return dynamics.ReducedSystem(
            dimension=n,
            rhs=lambda x: reduced_lifted_rhs(self, x, eps, _checked=False),
            jacobian=lambda x: reduced_lifted_jacobian(self, x, eps),
            embedding=lambda x: self.lifted_state(x, eps),
            class_levels=tuple(self.selected_levels(eps)),
            species=self.lifted_net.species,
            free_indices=tuple(range(n)),
        )


def _expand_in_basis(u, basis) -> list[Fraction]:
    """Coefficients of u in an RREF basis; raises if u is outside the span."""
    pivots = []
    for row in basis:
        for j, v in enumerate(row):
            if v != 0:
                pivots.append(j)
                break
    coeffs = [u[p] for p in pivots]
    residual = list(u)
    for ci, row in zip(coeffs, basis):
        residual = [r - ci * v for r, v in zip(residual, row)]
    if any(v != 0 for v in residual):
        raise ValueError("vector is not in the span of the conservation basis")
    return coeffs


def lift_species(model: KineticModel, c, name: str, r=None) -> LiftedFamily:
    """Add a linearly dependent species with dependency vector c.

    The new species enters reaction j with reactant coefficient ``r_j``
    (default: the minimal choice ``max(0, -(c^t Gamma)_j)``) and product
    coefficient ``r_j + (c^t Gamma)_j``; its rate exponent is alpha_j = r_j,
    the mass-action value. Rank preservation and the new conservation law
    ``(-c, 1)`` are asserted in exact arithmetic.
    """
    net = model.net
    n, m = net.n_species, net.n_reactions
    if name in net.species:
        raise LiftError(f"species {name!r} already present")
    c_frac = _as_fraction_vector(c, n, "c")
    gamma = stoichiometric_matrix(net)
    d = [sum((c_frac[i] * gamma.rows[i][j] for i in range(n)), Fraction(0)) for j in range(m)]

    if r is None:
        r_frac = tuple(max(Fraction(0), -dj) for dj in d)
    else:
        r_frac = _as_fraction_vector(r, m, "r")
    for j, (rj, dj) in enumerate(zip(r_frac, d)):
        if rj < 0:
            raise LiftError(f"reactant coefficient r[{j}] = {rj} is negative")
        if rj + dj < 0:
            raise LiftError(
                f"product coefficient r[{j}] + (c^t Gamma)[{j}] = {rj + dj} is negative"
            )

    new_index = n
    reactions = []
    for j, rxn in enumerate(net.reactions):
        reactant = rxn.reactant.merged({new_index: r_frac[j]}) if r_frac[j] else rxn.reactant
        p_coeff = r_frac[j] + d[j]
        product = rxn.product.merged({new_index: p_coeff}) if p_coeff else rxn.product
        reactions.append(Reaction(reactant, product, rxn.rate, rxn.exponents))
    lifted_net = CRN(net.species + (name,), tuple(reactions))

    lifted_gamma = stoichiometric_matrix(lifted_net)
    assert list(lifted_gamma.rows[new_index]) == d, "lifted row must equal c^t Gamma"
    if network_rank(lifted_net) != network_rank(net):
        raise AssertionError("lifting changed the network rank")
    witness = [-ci for ci in c_frac] + [Fraction(1)]
    assert all(
        sum((witness[i] * lifted_gamma.rows[i][j] for i in range(n + 1)), Fraction(0)) == 0
        for j in range(m)
    ), "(-c, 1) must be a conservation law of the lifted network"

    alpha = np.array([float(v) for v in r_frac])
    spec = LiftSpec(c=c_frac, alpha=alpha, reactant_coeffs=r_frac)
    return LiftedFamily(base=model, spec=spec, lifted_net=lifted_net, species_name=name)


def scaled_rate_constants(kappa, alpha, eps: float) -> np.ndarray:
    """kappa_j' = eps**alpha_j * kappa_j."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    kappa = np.asarray(kappa, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    return kappa * eps**alpha


def selected_class_level(eps: float) -> float:
    """Value 1/eps of the new conservation law y - c^t x on the selected class."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    return 1.0 / eps


def epsilon_bound(c, box) -> float:
    """1 / sup |c^t x| over an axis-aligned positive box; 1 when c = 0.

    The supremum of a linear functional over a box is attained coordinatewise,
    so it is computed exactly from the per-coordinate extremes.
    """
    c = np.asarray(c, dtype=float)
    box = [(float(lo), float(hi)) for lo, hi in box]
    if len(box) != len(c):
        raise ValueError(f"box has {len(box)} intervals for {len(c)} coordinates")
    for lo, hi in box:
        if not (0 < lo <= hi):
            raise ValueError(f"degenerate or non-positive box interval [{lo}, {hi}]")
    if np.all(c == 0):
        return 1.0
    hi_sum = sum(max(ci * lo, ci * hi) for ci, (lo, hi) in zip(c, box))
    lo_sum = sum(min(ci * lo, ci * hi) for ci, (lo, hi) in zip(c, box))
    sup = max(abs(hi_sum), abs(lo_sum))
    return 1.0 / sup


def _class_factor(family: LiftedFamily, x: np.ndarray, eps: float) -> float:
    g = 1.0 + eps * float(family.spec.c_float @ x)
    if g <= 0:
        raise DomainError(
            f"state leaves the lifted coordinate chart: 1 + eps*c.x = {g} <= 0"
        )
    return g


def reduced_lifted_rhs(family: LiftedFamily, x, eps: float, _checked: bool = True) -> np.ndarray:
    """Dynamics on the selected invariant set in base coordinates.

    Equals ``Gamma @ (v(x) * (1 + eps c^t x)**alpha)``; at eps = 0 this is
    exactly the base vector field.
    """
    x = np.asarray(x, dtype=float)
    base = family.base
    if _checked:
        v = rate_vector(base, x)
    else:
        v = _rates_unchecked(base, x)
        if not np.all(np.isfinite(v)):
            raise DomainError(f"rate evaluation not finite at {x}")
    g = _class_factor(family, x, eps)
    return base.gamma @ (v * g ** family.spec.alpha)


def reduced_lifted_jacobian(family: LiftedFamily, x, eps: float) -> np.ndarray:
    """Analytic Jacobian of :func:`reduced_lifted_rhs` in the base coordinates."""
    x = np.asarray(x, dtype=float)
    base = family.base
    v = _rates_unchecked(base, x)
    dv = _rate_jacobian_unchecked(base, x)
    if not (np.all(np.isfinite(v)) and np.all(np.isfinite(dv))):
        raise DomainError(f"rate derivative not finite at {x}")
    g = _class_factor(family, x, eps)
    alpha = family.spec.alpha
    scaled = dv * (g**alpha)[:, None]
    chain = np.outer(v * alpha * g ** (alpha - 1.0), eps * family.spec.c_float)
    return base.gamma @ (scaled + chain)
