"""Power-law and mass-action kinetics: rates, vector fields, analytic Jacobians.

A kinetic model pairs a network with an exponent matrix A (one row per
reaction) and a positive rate-constant vector kappa; the vector field is
``Gamma @ (kappa * x**A)``. Rates are defined on the open positive orthant;
boundary points are accepted only where no negative exponent blows up.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .network import CRN, reactant_matrix, stoichiometric_matrix


class DomainError(ValueError):
    """Evaluation requested outside the domain of the rate function."""


@dataclass(frozen=True, eq=False)
class ExponentMatrix:
    """m-by-n matrix of reaction exponents; row i gives the exponents of reaction i.

    ``exact`` records whether the entries were converted losslessly from the
    rational reactant coefficients (true for any mass-action model whose
    coefficients are exactly representable in binary floating point).
    """

    entries: np.ndarray
    exact: bool = True

    def __post_init__(self):
        arr = np.asarray(self.entries, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)
        # integral exponent matrices extend polynomially to all of R^n
        object.__setattr__(self, "_integral", bool(np.all(arr == np.round(arr))))

    @property
    def n_reactions(self) -> int:
        return self.entries.shape[0]

    @property
    def n_species(self) -> int:
        return self.entries.shape[1]


@dataclass(frozen=True, eq=False)
class KineticModel:
    """A network with fixed power-law kinetics: rate_i = kappa_i * prod_j x_j**A_ij."""

    net: CRN
    exponents: ExponentMatrix
    kappa: np.ndarray

    def __post_init__(self):
        kappa = np.asarray(self.kappa, dtype=float)
        kappa.setflags(write=False)
        object.__setattr__(self, "kappa", kappa)
        m, n = self.exponents.entries.shape
        if (m, n) != (self.net.n_reactions, self.net.n_species):
            raise ValueError(
                f"exponent matrix is {m}x{n}, network has "
                f"{self.net.n_reactions} reactions and {self.net.n_species} species"
            )
        if kappa.shape != (m,):
            raise ValueError(f"kappa has shape {kappa.shape}, expected ({m},)")
        if not np.all(kappa > 0):
            raise ValueError("rate constants must be strictly positive")
        gamma = stoichiometric_matrix(self.net).as_float()
        gamma.setflags(write=False)
        object.__setattr__(self, "_gamma", gamma)

    @property
    def gamma(self) -> np.ndarray:
        """Stoichiometric matrix as floats (exact version lives on the network)."""
        return self._gamma

    def with_kappa(self, kappa) -> "KineticModel":
        return KineticModel(self.net, self.exponents, np.asarray(kappa, dtype=float))


def mass_action_exponents(net: CRN) -> ExponentMatrix:
    """Exponents equal to the reactant coefficients of each reaction."""
    reactants = reactant_matrix(net)
    entries = np.array(
        [[float(reactants.rows[j][i]) for j in range(net.n_species)]
         for i in range(net.n_reactions)],
        dtype=float,
    )
    exact = all(
        Fraction(float(c)) == c for row in reactants.rows for c in row
    )
    return ExponentMatrix(entries, exact=exact)


def mass_action_model(net: CRN, kappa) -> KineticModel:
    return KineticModel(net, mass_action_exponents(net), np.asarray(kappa, dtype=float))


def model_from_network(net: CRN, kappa=None) -> KineticModel:
    """Build a model from a parsed network, honouring carried metadata.

    Exponents default to mass action and are then overridden per reaction by
    any ``exp:`` annotations from the file. If ``kappa`` is omitted, every
    reaction must carry a rate constant.
    """
    exponents = mass_action_exponents(net)
    entries = np.array(exponents.entries)
    overridden = False
    for i, rxn in enumerate(net.reactions):
        if rxn.exponents:
            overridden = True
            for j, value in rxn.exponents:
                entries[i, j] = value
    if overridden:
        exponents = ExponentMatrix(entries, exact=False)
    if kappa is None:
        rates = net.rate_constants()
        missing = [i for i, r in enumerate(rates) if r is None]
        if missing:
            raise ValueError(f"no rate constants given and reactions {missing} carry none")
        kappa = np.array(rates, dtype=float)
    return KineticModel(net, exponents, np.asarray(kappa, dtype=float))


def _check_domain(model: KineticModel, x: np.ndarray):
    if np.any(x < 0):
        raise DomainError(f"state {x} has negative components")
    zero = x == 0
    if np.any(zero):
        A = model.exponents.entries
        if np.any(A[:, zero] < 0):
            raise DomainError("zero concentration with a negative exponent")


def _monomials(A: ExponentMatrix, x: np.ndarray) -> np.ndarray:
    """prod_j x_j**A_ij for each reaction i; extends to negative x when A is integral."""
    with np.errstate(divide="ignore", invalid="ignore"):
        powers = np.power(x[None, :], A.entries)
    return np.prod(powers, axis=1)


def _rates_unchecked(model: KineticModel, x: np.ndarray) -> np.ndarray:
    return model.kappa * _monomials(model.exponents, x)


def rate_vector(model: KineticModel, x) -> np.ndarray:
    """Reaction rates kappa * x**A at a nonnegative state.

    Strictly positive states are always accepted; a zero component is accepted
    only if no reaction has a negative exponent for that species.
    """
    x = np.asarray(x, dtype=float)
    _check_domain(model, x)
    v = _rates_unchecked(model, x)
    if not np.all(np.isfinite(v)):
        raise DomainError(f"rate evaluation not finite at {x}")
    return v


def ode_rhs(model: KineticModel, x) -> np.ndarray:
    """Vector field Gamma @ rate_vector at x."""
    return model.gamma @ rate_vector(model, x)


def _rate_jacobian_unchecked(model: KineticModel, x: np.ndarray) -> np.ndarray:
    """m-by-n matrix of partial derivatives d(rate_i)/d(x_j)."""
    A = model.exponents.entries
    v = _rates_unchecked(model, x)
    if np.all(x != 0):
        return v[:, None] * A / x[None, :]
    # boundary: differentiate the monomial in the zero coordinates directly
    m, n = A.shape
    dv = np.empty((m, n))
    nonzero = x != 0
    with np.errstate(divide="ignore", invalid="ignore"):
        dv[:, nonzero] = v[:, None] * A[:, nonzero] / x[None, nonzero]
    for j in np.nonzero(~nonzero)[0]:
        with np.errstate(divide="ignore", invalid="ignore"):
            a = A[:, j]
            # d/dx_j x_j**a at x_j = 0: zero unless a == 1, where the rest of the
            # monomial survives; a in (0, 1) diverges and is rejected by the caller
            rest = np.prod(np.power(np.delete(x, j)[None, :], np.delete(A, j, axis=1)), axis=1)
            col = np.zeros(m)
            col[a == 1] = (model.kappa * rest)[a == 1]
            col[(a > 0) & (a < 1)] = np.inf
            col[a < 0] = np.inf
            dv[:, j] = col
    return dv


def ode_jacobian(model: KineticModel, x) -> np.ndarray:
    """Analytic Jacobian of the vector field, entry (p, q) = sum_i Gamma_pi dv_i/dx_q."""
    x = np.asarray(x, dtype=float)
    _check_domain(model, x)
    dv = _rate_jacobian_unchecked(model, x)
    if not np.all(np.isfinite(dv)):
        raise DomainError(f"rate derivative not finite at {x}")
    return model.gamma @ dv
