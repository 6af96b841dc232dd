"""Canonical example networks used throughout the tests and documentation."""

from __future__ import annotations

from .network import CRN, parse_network

SCHLOGL = """\
# reversible Schlogl model: cubic scalar dynamics with three equilibria
0 <-> X ; kf = 6, kr = 11
2 X <-> 3 X ; kf = 6, kr = 1
"""

LOTKA = """\
# Lotka reactions: a conservative predator-prey oscillator
X -> 2 X
X + Y -> 2 Y
Y -> 0
"""

LOTKA_LIFTED = """\
# Lotka reactions with a third species closing the mass balance
species: X, Y, Z
X + Z -> 2 X
X + Y -> 2 Y
Y -> Z
"""

LVA = """\
# Lotka-Volterra autocatalator with one reversible reaction
2 X <-> 3 X
X + Y -> 2 Y
Y -> 0
"""

LVA_HOMOGENISED = """\
# mass-balanced autocatalator
species: X, Y, Z
2 X + Z <-> 3 X
X + Y -> 2 Y
Y -> Z
"""

BRUSSELATOR = """\
# Brusselator: inflow/outflow plus cubic autocatalysis
0 <-> X
X -> Y
2 X + Y -> 3 X
"""

BRUSSELATOR_HOMOGENISED = """\
# Brusselator with the exchange species made explicit
species: X, Y, Z
Z <-> X
X -> Y
2 X + Y -> 3 X
"""


def schlogl() -> CRN:
    return parse_network(SCHLOGL)


def lotka() -> CRN:
    return parse_network(LOTKA)


def lotka_lifted() -> CRN:
    return parse_network(LOTKA_LIFTED)


def lva() -> CRN:
    return parse_network(LVA)


def lva_homogenised() -> CRN:
    return parse_network(LVA_HOMOGENISED)


def brusselator() -> CRN:
    return parse_network(BRUSSELATOR)


def brusselator_homogenised() -> CRN:
    return parse_network(BRUSSELATOR_HOMOGENISED)
