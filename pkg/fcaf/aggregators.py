"""Fuzzy classification aggregation functions (FCAFs).

An Fcaf maps a continuum profile to one social classification. The shipped
rules are the measure-weighted means, dictators, the four single-axiom
counterexamples, the odd-h family for two objects and two types, and a
deliberately type-inconsistent per-type mean.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from pydantic import ValidationError

from .classification import ClassPoint, Profile, unit_row
from .errors import ArgumentError
from .function_space import PiecewiseFn
from .measure import Measure, integrate, mixture
from .schemas import (
    AGGREGATOR_ADAPTER,
    DictatorSpec,
    NonIndependentSpec,
    NonOptimalSpec,
    NonZeroUnanimousSpec,
    OddHMeanSpec,
    PerTypeMeanSpec,
    WeightedMeanSpec,
)

logger = logging.getLogger(__name__)

OPTIMALITY = "optimality"
INDEPENDENCE = "independence"
SYMMETRY = "symmetry"
ZERO_UNANIMITY = "zero_unanimity"
UNANIMITY = "unanimity"
COHERENCE = "coherence"
NON_DICTATORSHIP = "non_dictatorship"
ANONYMITY = "anonymity"

AXIOMS = (
    OPTIMALITY,
    INDEPENDENCE,
    SYMMETRY,
    ZERO_UNANIMITY,
    UNANIMITY,
    COHERENCE,
    NON_DICTATORSHIP,
    ANONYMITY,
)

DEFAULT_SHAPE = (6, 3)
PAIR_SHAPE = (2, 2)
VERTEX_TOL = 1e-12

Rule = Callable[[Profile], ClassPoint]


@dataclass(frozen=True)
class Fcaf:
    """A named aggregation rule plus the axioms it claims to satisfy.

    `shape` is the (m, p) the axiom suites and the extraction harness probe
    the rule with.
    """
    name: str
    rule: Rule = field(repr=False, compare=False)
    claimed_axioms: frozenset[str] = frozenset()
    shape: tuple[int, int] = DEFAULT_SHAPE

    def __post_init__(self):
        unknown = set(self.claimed_axioms) - set(AXIOMS)
        if unknown:
            raise ArgumentError(f"Unknown axioms claimed by {self.name}: {sorted(unknown)}")
        m, p = self.shape
        if m < 2 or p < 2 or p > m:
            raise ArgumentError(f"Invalid probing shape {self.shape} for {self.name}")
        object.__setattr__(self, "claimed_axioms", frozenset(self.claimed_axioms))
        object.__setattr__(self, "shape", (int(m), int(p)))

    def aggregate(self, c: Profile) -> ClassPoint:
        return self.rule(c)

    def __call__(self, c: Profile) -> ClassPoint:
        return self.rule(c)

    def with_shape(self, shape: Optional[Sequence[int]]) -> "Fcaf":
        if shape is None:
            return self
        return Fcaf(self.name, self.rule, self.claimed_axioms, tuple(shape))


def _per_entry(c: Profile, fn: Callable[[PiecewiseFn], float]) -> ClassPoint:
    return ClassPoint(tuple(tuple(fn(f) for f in row) for row in c.entries))


def _mean_claims(mu: Measure) -> frozenset[str]:
    claims = set(AXIOMS)
    if mu.mass_at(0.0) > 0.0 or mu.mass_at(1.0) > 0.0:
        # point masses at the ends read point overrides there
        claims.discard(COHERENCE)
    if not mu.is_lebesgue:
        claims.discard(ANONYMITY)
    if mu.is_dirac:
        claims.discard(NON_DICTATORSHIP)
    return frozenset(claims)


def weighted_mean(mu: Measure, name: str = "weighted_mean", shape=DEFAULT_SHAPE) -> Fcaf:
    """alpha_mu: integrate every entry function against mu."""

    def rule(c: Profile) -> ClassPoint:
        return _per_entry(c, lambda f: integrate(mu, f))

    return Fcaf(name, rule, _mean_claims(mu), shape)


def dictator(i: float, shape=DEFAULT_SHAPE) -> Fcaf:
    """The degenerate mean at individual i: returns c_i, atoms respected."""
    if not 0.0 <= i <= 1.0:
        raise ArgumentError(f"Dictator {i} outside [0, 1]")
    claims = set(AXIOMS) - {NON_DICTATORSHIP, ANONYMITY}
    if i in (0.0, 1.0):
        claims.discard(COHERENCE)

    def rule(c: Profile) -> ClassPoint:
        return c.at(i)

    return Fcaf(f"dictator({i:g})", rule, frozenset(claims), shape)


def _is_vertex(row: Sequence[float]) -> bool:
    return any(
        all(abs(v - u) <= VERTEX_TOL for v, u in zip(row, unit_row(len(row), k)))
        for k in range(len(row))
    )


def vertex_or_uniform(shape=DEFAULT_SHAPE) -> Fcaf:
    """c_0(x) where c_0(x) is a vertex e_k, else the uniform row.

    Column sums of the output can fall below 1 when some rows fall back to
    uniform and others are vertices.
    """

    def rule(c: Profile) -> ClassPoint:
        first = c.at(0.0)
        uniform = tuple(1.0 / c.p for _ in range(c.p))
        return ClassPoint(tuple(row if _is_vertex(row) else uniform for row in first.values))

    return Fcaf("vertex_or_uniform", rule, frozenset({INDEPENDENCE, SYMMETRY, NON_DICTATORSHIP}), shape)


def lean_switch(shape=DEFAULT_SHAPE) -> Fcaf:
    """c_0 when x_1 leans to type 0 at least as much as x_2 on average, else c_1."""
    lebesgue = Measure.lebesgue()

    def rule(c: Profile) -> ClassPoint:
        lean_first = integrate(lebesgue, c.entry(0, 0))
        lean_second = integrate(lebesgue, c.entry(1, 0))
        return c.at(0.0) if lean_first >= lean_second else c.at(1.0)

    claims = frozenset({OPTIMALITY, ZERO_UNANIMITY, UNANIMITY, NON_DICTATORSHIP})
    return Fcaf("lean_switch", rule, claims, shape)


def swapped_dictator(shape=DEFAULT_SHAPE) -> Fcaf:
    """Dictator at 0 with the outputs for x_1 and x_2 exchanged."""

    def rule(c: Profile) -> ClassPoint:
        rows = list(c.at(0.0).values)
        rows[0], rows[1] = rows[1], rows[0]
        return ClassPoint(tuple(rows))

    return Fcaf("swapped_dictator", rule, frozenset({OPTIMALITY, NON_DICTATORSHIP}), shape)


def _linear_h(u: float) -> float:
    return u


def _cube_h(u: float) -> float:
    return 0.5 * (2.0 * u) ** 3


ODD_H = {"linear": _linear_h, "cube": _cube_h}


def odd_h_mean(variant: str = "cube", mu: Optional[Measure] = None) -> Fcaf:
    """h(integral - 1/2) + 1/2 per entry, for two objects and two types only."""
    if variant not in ODD_H:
        raise ArgumentError(f"Unknown odd-h variant {variant!r}, expected one of {sorted(ODD_H)}")
    h = ODD_H[variant]
    mu = mu or Measure.lebesgue()

    def rule(c: Profile) -> ClassPoint:
        if (c.m, c.p) != PAIR_SHAPE:
            raise ArgumentError(f"odd_h_mean needs m = p = 2, got m={c.m}, p={c.p}")
        return _per_entry(c, lambda f: h(integrate(mu, f) - 0.5) + 0.5)

    if variant == "linear":
        claims = _mean_claims(mu)
    else:
        claims = {OPTIMALITY, INDEPENDENCE, SYMMETRY, ZERO_UNANIMITY, NON_DICTATORSHIP}
        if mu.is_lebesgue:
            claims.add(ANONYMITY)
    return Fcaf(f"odd_h_mean[{variant}]", rule, frozenset(claims), PAIR_SHAPE)


def per_type_mean(measures: Sequence[Measure], shape=DEFAULT_SHAPE) -> Fcaf:
    """Type t >= 1 integrates against measures[t-1]; type 0 takes the remainder.

    Rows still sum to 1, but distinct measures make the probed CDFs disagree
    between types.
    """
    measures = tuple(measures)
    if len(measures) != shape[1] - 1:
        raise ArgumentError(f"per_type_mean needs {shape[1] - 1} measures for p={shape[1]}, got {len(measures)}")

    def rule(c: Profile) -> ClassPoint:
        if c.p != len(measures) + 1:
            raise ArgumentError(f"per_type_mean built for p={len(measures) + 1}, got p={c.p}")
        rows = []
        for row in c.entries:
            tail = [integrate(mu, f) for mu, f in zip(measures, row[1:])]
            rows.append((1.0 - sum(tail), *tail))
        return ClassPoint(tuple(rows))

    claims = {INDEPENDENCE, SYMMETRY}
    if not all(mu.is_dirac and mu.masses == measures[0].masses for mu in measures):
        claims.add(NON_DICTATORSHIP)
    return Fcaf("per_type_mean", rule, frozenset(claims), shape)


def from_spec(data) -> Fcaf:
    """Build an Fcaf from aggregator JSON (a dict or an already-parsed spec)."""
    if isinstance(data, dict):
        try:
            spec = AGGREGATOR_ADAPTER.validate_python(data)
        except ValidationError:
            logger.error(f"Rejected aggregator spec: {data}")
            raise
    else:
        spec = data

    if isinstance(spec, WeightedMeanSpec):
        fcaf = weighted_mean(Measure.from_spec(spec.measure))
    elif isinstance(spec, DictatorSpec):
        fcaf = dictator(spec.i)
    elif isinstance(spec, NonOptimalSpec):
        fcaf = vertex_or_uniform()
    elif isinstance(spec, NonIndependentSpec):
        fcaf = lean_switch()
    elif isinstance(spec, NonZeroUnanimousSpec):
        fcaf = swapped_dictator()
    elif isinstance(spec, OddHMeanSpec):
        mu = Measure.from_spec(spec.measure) if spec.measure else None
        fcaf = odd_h_mean(spec.variant, mu)
    elif isinstance(spec, PerTypeMeanSpec):
        measures = [Measure.from_spec(m) for m in spec.measures]
        fcaf = per_type_mean(measures, shape=spec.shape or (DEFAULT_SHAPE[0], len(measures) + 1))
    else:
        raise ArgumentError(f"Unsupported aggregator spec {spec!r}")

    if spec.shape is not None:
        if isinstance(spec, OddHMeanSpec) and tuple(spec.shape) != PAIR_SHAPE:
            raise ArgumentError(f"odd_h_mean only probes shape {PAIR_SHAPE}, got {spec.shape}")
        fcaf = fcaf.with_shape(spec.shape)
    return fcaf


def two_piece_measure() -> Measure:
    """Density 1/2 on [0, 1/2) and 3/2 on [1/2, 1]."""
    return Measure(PiecewiseFn.step([0.0, 0.5, 1.0], [0.5, 1.5]))


def gallery() -> list[Fcaf]:
    """Every shipped aggregator, in a fixed order."""
    lebesgue = Measure.lebesgue()
    return [
        weighted_mean(lebesgue, "weighted_mean[lebesgue]"),
        weighted_mean(Measure.power_weight(2), "weighted_mean[3i^2]"),
        weighted_mean(Measure.dirac(0.3), "weighted_mean[dirac 0.3]"),
        weighted_mean(mixture(lebesgue, Measure.dirac(0.7), 0.5), "weighted_mean[mixture]"),
        weighted_mean(two_piece_measure(), "weighted_mean[two_piece]"),
        dictator(0.3),
        dictator(0.0),
        vertex_or_uniform(),
        lean_switch(),
        swapped_dictator(),
        odd_h_mean("linear"),
        odd_h_mean("cube"),
        per_type_mean([lebesgue, Measure.dirac(0.0)]),
    ]
