"""Shared helpers: random networks and models for property-style tests."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from crnlift.kinetics import KineticModel, mass_action_model
from crnlift.network import CRN, Complex, Reaction


def random_crn(rng: np.random.Generator, max_species: int = 6, max_reactions: int = 8,
               max_coeff: int = 3) -> CRN:
    n = int(rng.integers(1, max_species + 1))
    m = int(rng.integers(1, max_reactions + 1))
    reactions = []
    while len(reactions) < m:
        reactant = rng.integers(0, max_coeff + 1, size=n)
        product = rng.integers(0, max_coeff + 1, size=n)
        if np.array_equal(reactant, product):
            continue
        reactions.append(
            Reaction(
                Complex.of({i: int(c) for i, c in enumerate(reactant) if c}),
                Complex.of({i: int(c) for i, c in enumerate(product) if c}),
            )
        )
    return CRN(tuple(f"S{i}" for i in range(n)), tuple(reactions))


def random_model(rng: np.random.Generator, **kwargs) -> KineticModel:
    net = random_crn(rng, **kwargs)
    kappa = rng.uniform(0.2, 3.0, size=net.n_reactions)
    return mass_action_model(net, kappa)


def random_rational_vector(rng: np.random.Generator, n: int,
                           denominators=(1, 2, 3)) -> list[Fraction]:
    out = []
    for _ in range(n):
        num = int(rng.integers(-3, 4))
        den = int(rng.choice(denominators))
        out.append(Fraction(num, den))
    return out
