"""Reaction network representation and exact stoichiometric algebra.

A network is an ordered list of species names together with an ordered list of
reactions; each reaction is an ordered pair of complexes (formal nonnegative
rational combinations of species). All stoichiometric computations — reaction
vectors, rank, conservation laws — are carried out in exact rational
arithmetic, so results never depend on a floating-point tolerance. Floats only
appear at the kinetics boundary.

The module also implements the canonical line-oriented text format::

    # comment
    species: X, Y, Z              # optional, fixes the species order
    2 X + Y -> 3 X ; k = 6
    X <-> 0 ; kf = 11, kr = 6     # expands to two irreversible reactions
    X + Y -> 2 Y ; k = 1, exp: X = 1.0, Y = 1.0

Coefficients are nonnegative decimals or fractions such as ``3/2``; a bare
``0`` denotes the empty complex. Rate constants and exponent overrides belong
to kinetic models, but are carried through parsing as reaction metadata.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from . import exact

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUMBER_RE = re.compile(r"\d+(?:\.\d+)?(?:/\d+)?|\.\d+")


class NetworkError(ValueError):
    """Base class for network construction and parsing errors."""


class NetworkSyntaxError(NetworkError):
    """Syntax error in the text format, with 1-based line and column."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class DegenerateReactionError(NetworkError):
    """A reaction whose reactant and product complexes coincide."""

    def __init__(self, message: str, reactions: Sequence[int] = ()):
        super().__init__(message)
        self.reactions = tuple(reactions)


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value).limit_denominator(10**12)
    raise TypeError(f"cannot interpret {value!r} as a rational coefficient")


@dataclass(frozen=True)
class Complex:
    """Formal nonnegative rational combination of species.

    ``items`` holds ``(species_index, coefficient)`` pairs sorted by index with
    all coefficients strictly positive; absent species have coefficient zero.
    """

    items: tuple[tuple[int, Fraction], ...]

    @staticmethod
    def of(coefficients: Mapping[int, object]) -> "Complex":
        pairs = []
        for idx, raw in coefficients.items():
            coeff = _as_fraction(raw)
            if coeff < 0:
                raise NetworkError(f"negative stoichiometric coefficient {coeff} for species index {idx}")
            if coeff != 0:
                pairs.append((int(idx), coeff))
        pairs.sort()
        return Complex(tuple(pairs))

    @staticmethod
    def empty() -> "Complex":
        return Complex(())

    def coefficient(self, index: int) -> Fraction:
        for idx, coeff in self.items:
            if idx == index:
                return coeff
        return Fraction(0)

    def as_dict(self) -> dict[int, Fraction]:
        return dict(self.items)

    @property
    def molecularity(self) -> Fraction:
        return sum((c for _, c in self.items), Fraction(0))

    def map_indices(self, mapping: Mapping[int, int]) -> "Complex":
        """Relabel species indices, dropping entries absent from ``mapping``."""
        return Complex.of({mapping[i]: c for i, c in self.items if i in mapping})

    def merged(self, extra: Mapping[int, object]) -> "Complex":
        d = self.as_dict()
        for idx, raw in extra.items():
            d[idx] = d.get(idx, Fraction(0)) + _as_fraction(raw)
        return Complex.of(d)


@dataclass(frozen=True)
class Reaction:
    """Ordered pair of complexes, with optional kinetic metadata from parsing.

    ``rate`` and ``exponents`` are carried through parsing for later use by
    kinetic models; they do not affect stoichiometric identity.
    """

    reactant: Complex
    product: Complex
    rate: float | None = None
    exponents: tuple[tuple[int, float], ...] | None = None

    def __post_init__(self):
        if self.reactant == self.product:
            raise DegenerateReactionError(
                f"reactant and product complexes are identical: {self.reactant.items}"
            )

    def with_metadata(self, rate=None, exponents=None) -> "Reaction":
        return Reaction(self.reactant, self.product, rate, exponents)


@dataclass(frozen=True)
class CRN:
    """Ordered species and ordered reactions; immutable after construction."""

    species: tuple[str, ...]
    reactions: tuple[Reaction, ...]

    def __post_init__(self):
        seen = set()
        for name in self.species:
            if name in seen:
                raise NetworkError(f"duplicate species name {name!r}")
            seen.add(name)
        n = len(self.species)
        for j, rxn in enumerate(self.reactions):
            for cpx in (rxn.reactant, rxn.product):
                for idx, _ in cpx.items:
                    if not 0 <= idx < n:
                        raise NetworkError(f"reaction {j} references species index {idx} (have {n})")

    @property
    def n_species(self) -> int:
        return len(self.species)

    @property
    def n_reactions(self) -> int:
        return len(self.reactions)

    def species_index(self, name: str) -> int:
        try:
            return self.species.index(name)
        except ValueError:
            raise NetworkError(f"unknown species {name!r}") from None

    def rate_constants(self) -> tuple[float | None, ...]:
        return tuple(r.rate for r in self.reactions)


@dataclass(frozen=True)
class StoichMatrix:
    """Exact stoichiometric matrix: rows = species, columns = reactions."""

    rows: tuple[tuple[Fraction, ...], ...]

    @property
    def n_species(self) -> int:
        return len(self.rows)

    @property
    def n_reactions(self) -> int:
        return len(self.rows[0]) if self.rows else 0

    def column(self, j: int) -> tuple[Fraction, ...]:
        return tuple(row[j] for row in self.rows)

    def as_lists(self) -> list[list[Fraction]]:
        return [list(row) for row in self.rows]

    def as_float(self):
        import numpy as np

        return np.array([[float(v) for v in row] for row in self.rows], dtype=float)


def stoichiometric_matrix(net: CRN) -> StoichMatrix:
    """Matrix whose j-th column is product minus reactant coefficients of reaction j."""
    rows = []
    for i in range(net.n_species):
        rows.append(
            tuple(r.product.coefficient(i) - r.reactant.coefficient(i) for r in net.reactions)
        )
    return StoichMatrix(tuple(rows))


def reactant_matrix(net: CRN) -> StoichMatrix:
    """Reactant coefficients arranged like the stoichiometric matrix."""
    rows = []
    for i in range(net.n_species):
        rows.append(tuple(r.reactant.coefficient(i) for r in net.reactions))
    return StoichMatrix(tuple(rows))


def network_rank(net: CRN) -> int:
    """Rank of the stoichiometric matrix, exact."""
    if net.n_species == 0 or net.n_reactions == 0:
        return 0
    return exact.rank(stoichiometric_matrix(net).as_lists())


def conservation_laws(net: CRN) -> list[tuple[Fraction, ...]]:
    """Canonical basis of the left kernel of the stoichiometric matrix.

    Each basis vector w satisfies w^t Gamma = 0 so w . x is constant along
    trajectories. The basis is in reduced row echelon form, leading entries +1.
    """
    if net.n_species == 0:
        return []
    if net.n_reactions == 0:
        return [
            tuple(Fraction(int(i == j)) for j in range(net.n_species))
            for i in range(net.n_species)
        ]
    basis = exact.left_nullspace(stoichiometric_matrix(net).as_lists())
    return [tuple(row) for row in basis]


def is_homogeneous(net: CRN) -> bool:
    """True iff every reaction conserves molecularity.

    Equivalent to the all-ones vector lying in the left kernel of the
    stoichiometric matrix; both characterisations are computed and must agree.
    """
    by_molecularity = all(
        r.reactant.molecularity == r.product.molecularity for r in net.reactions
    )
    gamma = stoichiometric_matrix(net)
    ones_in_kernel = all(
        sum(gamma.column(j), Fraction(0)) == 0 for j in range(net.n_reactions)
    )
    if by_molecularity != ones_in_kernel:
        raise AssertionError("molecularity and left-kernel homogeneity checks disagree")
    return by_molecularity


def homogenise(net: CRN, new_species: str, padding=0) -> CRN:
    """Add one species so that every reaction conserves molecularity.

    Each reaction with molecularity deficit ``d = m_reactant - m_product``
    receives the new species with coefficient ``max(0, -d) + padding`` on the
    reactant side and ``max(0, d) + padding`` on the product side. ``padding``
    is a single nonnegative rational or a per-reaction sequence; the default 0
    is the minimal choice. Rank is preserved (asserted exactly).
    """
    if new_species in net.species:
        raise NetworkError(f"species {new_species!r} already present")
    if isinstance(padding, (list, tuple)):
        if len(padding) != net.n_reactions:
            raise NetworkError(
                f"padding has length {len(padding)}, expected {net.n_reactions}"
            )
        pads = [_as_fraction(p) for p in padding]
    else:
        pads = [_as_fraction(padding)] * net.n_reactions
    if any(p < 0 for p in pads):
        raise NetworkError("padding must be nonnegative")

    new_index = net.n_species
    reactions = []
    for rxn, pad in zip(net.reactions, pads):
        deficit = rxn.reactant.molecularity - rxn.product.molecularity
        r_coeff = max(Fraction(0), -deficit) + pad
        p_coeff = max(Fraction(0), deficit) + pad
        reactant = rxn.reactant.merged({new_index: r_coeff}) if r_coeff else rxn.reactant
        product = rxn.product.merged({new_index: p_coeff}) if p_coeff else rxn.product
        reactions.append(Reaction(reactant, product, rxn.rate, rxn.exponents))
    result = CRN(net.species + (new_species,), tuple(reactions))
    assert is_homogeneous(result)
    assert network_rank(result) == network_rank(net)
    return result


def induced_subnetwork(
    net: CRN,
    keep_species: Iterable[int] | None = None,
    keep_reactions: Iterable[int] | None = None,
) -> CRN:
    """Drop reactions and/or delete species from all complexes.

    Raises :class:`DegenerateReactionError` naming any kept reaction whose
    reactant and product complexes become identical after species deletion.
    """
    keep_s = set(range(net.n_species)) if keep_species is None else set(keep_species)
    keep_r = set(range(net.n_reactions)) if keep_reactions is None else set(keep_reactions)
    for idx in keep_s:
        if not 0 <= idx < net.n_species:
            raise NetworkError(f"species index {idx} out of range")
    for idx in keep_r:
        if not 0 <= idx < net.n_reactions:
            raise NetworkError(f"reaction index {idx} out of range")

    kept_species = [i for i in range(net.n_species) if i in keep_s]
    remap = {old: new for new, old in enumerate(kept_species)}
    degenerate = []
    reactions = []
    for j in sorted(keep_r):
        rxn = net.reactions[j]
        reactant = rxn.reactant.map_indices(remap)
        product = rxn.product.map_indices(remap)
        if reactant == product:
            degenerate.append(j)
            continue
        reactions.append(Reaction(reactant, product, rxn.rate, rxn.exponents))
    if degenerate:
        raise DegenerateReactionError(
            "species deletion produced degenerate reactions (reactant = product) "
            f"at original indices {degenerate}",
            degenerate,
        )
    return CRN(tuple(net.species[i] for i in kept_species), tuple(reactions))


# ---------------------------------------------------------------------------
# text format
# ---------------------------------------------------------------------------


def _strip_comment(line: str) -> str:
    pos = line.find("#")
    return line if pos < 0 else line[:pos]


def _parse_coefficient(token: str, lineno: int, col: int) -> Fraction:
    try:
        if "/" in token:
            return Fraction(token)
        return Fraction(token)
    except (ValueError, ZeroDivisionError):
        raise NetworkSyntaxError(f"bad coefficient {token!r}", lineno, col)


class _ComplexParser:
    """Recursive-descent scanner for one side of a reaction arrow."""

    def __init__(self, text: str, lineno: int, offset: int):
        self.text = text
        self.pos = 0
        self.lineno = lineno
        self.offset = offset  # column of text[0] in the original line

    def error(self, message: str) -> NetworkSyntaxError:
        return NetworkSyntaxError(message, self.lineno, self.offset + self.pos + 1)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def parse(self) -> list[tuple[Fraction, str]]:
        terms = []
        self.skip_ws()
        if not self.text[self.pos :].strip():
            raise self.error("empty complex (use 0 for the empty complex)")
        while True:
            terms.append(self.parse_term())
            self.skip_ws()
            if self.pos >= len(self.text):
                break
            if self.text[self.pos] == "+":
                self.pos += 1
                self.skip_ws()
                continue
            raise self.error(f"unexpected {self.text[self.pos]!r} in complex")
        return terms

    def parse_term(self) -> tuple[Fraction, str]:
        self.skip_ws()
        m = _NUMBER_RE.match(self.text, self.pos)
        coeff = Fraction(1)
        if m:
            coeff = _parse_coefficient(m.group(), self.lineno, self.offset + self.pos + 1)
            self.pos = m.end()
            self.skip_ws()
        name_match = _NAME_RE.match(self.text, self.pos)
        if name_match is None:
            raise self.error("expected species name")
        self.pos = name_match.end()
        return (coeff, name_match.group())


def _parse_complex(text: str, lineno: int, offset: int, species_order: list[str],
                   fixed_order: bool) -> Complex:
    stripped = text.strip()
    if stripped == "0":
        return Complex.empty()
    parser = _ComplexParser(text, lineno, offset)
    terms = parser.parse()
    coeffs: dict[int, Fraction] = {}
    for coeff, name in terms:
        if name not in species_order:
            if fixed_order:
                raise NetworkSyntaxError(
                    f"species {name!r} not listed in species header", lineno, offset + 1
                )
            species_order.append(name)
        idx = species_order.index(name)
        coeffs[idx] = coeffs.get(idx, Fraction(0)) + coeff
    return Complex.of(coeffs)


def _parse_float(token: str, lineno: int, col: int) -> float:
    try:
        if "/" in token:
            return float(Fraction(token))
        return float(token)
    except ValueError:
        raise NetworkSyntaxError(f"bad numeric value {token!r}", lineno, col)


def _parse_annotations(text: str, lineno: int, offset: int, reversible: bool,
                       species_order: list[str]):
    """Parse the clause after ';': rate constants and exponent overrides."""
    rates: dict[str, float] = {}
    exponents: dict[str, float] = {}
    exp_pos = text.find("exp:")
    rate_part = text if exp_pos < 0 else text[:exp_pos]
    exp_part = None if exp_pos < 0 else text[exp_pos + 4 :]

    for piece in rate_part.split(","):
        piece = piece.strip()
        if not piece:
            continue
        if "=" not in piece:
            raise NetworkSyntaxError(f"bad annotation {piece!r}", lineno, offset + 1)
        key, _, value = piece.partition("=")
        key = key.strip()
        if key not in ("k", "kf", "kr"):
            raise NetworkSyntaxError(f"unknown annotation key {key!r}", lineno, offset + 1)
        rates[key] = _parse_float(value.strip(), lineno, offset + 1)

    if exp_part is not None:
        for piece in exp_part.split(","):
            piece = piece.strip()
            if not piece:
                continue
            if "=" not in piece:
                raise NetworkSyntaxError(f"bad exponent override {piece!r}", lineno, offset + 1)
            name, _, value = piece.partition("=")
            name = name.strip()
            if not _NAME_RE.fullmatch(name):
                raise NetworkSyntaxError(f"bad species name {name!r} in exponent override",
                                         lineno, offset + 1)
            exponents[name] = _parse_float(value.strip(), lineno, offset + 1)

    if reversible:
        if "k" in rates:
            raise NetworkSyntaxError("reversible reaction takes kf/kr, not k", lineno, offset + 1)
        forward, backward = rates.get("kf"), rates.get("kr")
    else:
        if "kf" in rates or "kr" in rates:
            raise NetworkSyntaxError("irreversible reaction takes k, not kf/kr", lineno, offset + 1)
        forward, backward = rates.get("k"), None
    return forward, backward, exponents


def parse_network(text: str) -> CRN:
    """Parse the canonical text format into a network.

    Species are ordered by first appearance unless a ``species:`` header fixes
    the order; reversible arrows expand into two irreversible reactions with
    the forward direction first. Rate constants and exponent overrides are
    attached to the resulting reactions as metadata.
    """
    species_order: list[str] = []
    fixed_order = False
    reactions: list[Reaction] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line.strip():
            continue
        stripped = line.strip()
        if stripped.startswith("species:"):
            if reactions or species_order:
                raise NetworkSyntaxError("species header must precede all reactions",
                                         lineno, line.index("species:") + 1)
            names = [n.strip() for n in stripped[len("species:"):].split(",") if n.strip()]
            for name in names:
                if not _NAME_RE.fullmatch(name):
                    raise NetworkSyntaxError(f"bad species name {name!r}", lineno, 1)
                if name in species_order:
                    raise NetworkSyntaxError(f"duplicate species {name!r} in header", lineno, 1)
                species_order.append(name)
            fixed_order = True
            continue

        body, _, annotation = line.partition(";")
        reversible = "<->" in body
        arrow = "<->" if reversible else "->"
        left, sep, right = body.partition(arrow)
        if not sep:
            raise NetworkSyntaxError("expected '->' or '<->'", lineno, len(line) + 1)
        lhs = _parse_complex(left, lineno, 0, species_order, fixed_order)
        rhs = _parse_complex(right, lineno, body.index(arrow) + len(arrow), species_order,
                             fixed_order)
        kf, kr, exp_by_name = _parse_annotations(
            annotation, lineno, len(body) + 1, reversible, species_order
        ) if annotation.strip() else (None, None, {})

        def resolve_exponents():
            if not exp_by_name:
                return None
            pairs = []
            for name, value in exp_by_name.items():
                if name not in species_order:
                    raise NetworkSyntaxError(
                        f"exponent override for unknown species {name!r}", lineno, 1
                    )
                pairs.append((species_order.index(name), value))
            return tuple(sorted(pairs))

        exps = resolve_exponents()
        try:
            reactions.append(Reaction(lhs, rhs, kf, exps))
            if reversible:
                reactions.append(Reaction(rhs, lhs, kr, exps))
        except DegenerateReactionError:
            raise NetworkSyntaxError("reactant and product complexes are identical", lineno, 1)

    return CRN(tuple(species_order), tuple(reactions))


def _format_coefficient(c: Fraction) -> str:
    return str(c) if c.denominator != 1 else str(c.numerator)


def _format_complex(cpx: Complex, species: Sequence[str]) -> str:
    if not cpx.items:
        return "0"
    parts = []
    for idx, coeff in cpx.items:
        if coeff == 1:
            parts.append(species[idx])
        else:
            parts.append(f"{_format_coefficient(coeff)} {species[idx]}")
    return " + ".join(parts)


def format_network(net: CRN) -> str:
    """Serialize to the canonical text format; inverse of :func:`parse_network`."""
    lines = [f"species: {', '.join(net.species)}"]
    for rxn in net.reactions:
        line = f"{_format_complex(rxn.reactant, net.species)} -> {_format_complex(rxn.product, net.species)}"
        annotations = []
        if rxn.rate is not None:
            annotations.append(f"k = {rxn.rate!r}")
        if rxn.exponents:
            exp = ", ".join(f"{net.species[i]} = {v!r}" for i, v in rxn.exponents)
            annotations.append(f"exp: {exp}")
        if annotations:
            line += " ; " + ", ".join(annotations)
        lines.append(line)
    return "\n".join(lines) + "\n"
