"""Sampled falsification checkers for the aggregation axioms.

Every checker drives an Fcaf through a deterministic probe family and returns
PASS (no counterexample among the probes it ran) or FAIL with a witness that
`recheck` can re-evaluate. Probe families are nested: independence probes are
part of the symmetry family, zero-unanimity probes are part of unanimity, and
unanimity probes are part of coherence. A strong axiom therefore cannot pass
while its weaker consequence fails.
"""
import logging
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from .aggregators import (
    ANONYMITY,
    AXIOMS,
    COHERENCE,
    INDEPENDENCE,
    NON_DICTATORSHIP,
    OPTIMALITY,
    SYMMETRY,
    UNANIMITY,
    ZERO_UNANIMITY,
    Fcaf,
    dictator,
    lean_switch,
    swapped_dictator,
    vertex_or_uniform,
)
from .classification import (
    Profile,
    agreeing_pair,
    constant_column_profile,
    indicator_probe_profile,
    inject_point_rectangle,
    pinned_profile,
    random_profile,
    separating_profile,
    swap_profile,
    uniform_point,
)
from .config import DEFAULT_GRID_N, DEFAULT_PROBES, DEFAULT_TOLERANCE
from .errors import ArgumentError
from .function_space import ess_bounds
from .seeding import derive_seed, make_rng

logger = logging.getLogger(__name__)

PASS = "pass"
FAIL = "fail"

ATOMS_VARIANT = "atoms"
UNANIMITY_LEVELS = (0.75, 0.5, 1.0, 0.25)
HALF_SWAPS = ((0.0, 0.25, 0.5), (0.25, 0.25, 0.5))
SWAP_GRID = 16
EXTRA_SEPARATING_PROBES = 2
ENDPOINT_AMPLITUDE = 0.05

IMPLICATIONS = (
    (SYMMETRY, INDEPENDENCE),
    (COHERENCE, UNANIMITY),
    (UNANIMITY, ZERO_UNANIMITY),
    (ANONYMITY, NON_DICTATORSHIP),
)


@dataclass(frozen=True)
class Witness:
    """A re-runnable counterexample.

    kind is one of:
      pair     output (object, type) on profiles[0] vs (partner, type) on profiles[1]
      target   output (object, type) vs `expected`
      column   sum of output column `type` vs `expected`
      bounds   output (object, type) vs the essential range `bounds`
      cell     output vs the classification of cell `cell` on every profile
    """
    kind: str
    profiles: tuple[Profile, ...]
    object_index: Optional[int] = None
    type_index: Optional[int] = None
    partner_index: Optional[int] = None
    observed: Optional[float] = None
    expected: Optional[float] = None
    deviation: float = 0.0
    bounds: Optional[tuple[float, float]] = None
    cell: Optional[tuple[float, float]] = None
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "object": self.object_index,
            "type": self.type_index,
            "partner": self.partner_index,
            "observed": self.observed,
            "expected": self.expected,
            "deviation": self.deviation,
            "bounds": list(self.bounds) if self.bounds else None,
            "cell": list(self.cell) if self.cell else None,
            "note": self.note,
            "profiles": [c.to_dict() for c in self.profiles],
        }


@dataclass(frozen=True)
class AxiomReport:
    axiom: str
    verdict: str
    probes: int
    witness: Optional[Witness] = None
    variants: dict = field(default_factory=dict)
    grid_n: Optional[int] = None

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def to_dict(self) -> dict:
        data = {
            "axiom": self.axiom,
            "verdict": self.verdict,
            "probes": self.probes,
            "witness": self.witness.to_dict() if self.witness else None,
        }
        if self.grid_n is not None:
            data["grid_n"] = self.grid_n
        if self.variants:
            data["variants"] = {name: r.to_dict() for name, r in self.variants.items()}
        return data


def _run(axiom: str, witnesses: Iterable[Witness], tol: float, **extra) -> AxiomReport:
    """Evaluate probes lazily and stop at the first violation."""
    count = 0
    for witness in witnesses:
        count += 1
        if witness.deviation > tol:
            logger.debug(f"{axiom}: violation at probe {count}, deviation {witness.deviation:.3e}")
            return AxiomReport(axiom, FAIL, count, witness, **extra)
    return AxiomReport(axiom, PASS, count, **extra)


def _worst(pairs: Iterable[tuple[int, float]]) -> tuple[int, float]:
    return max(pairs, key=lambda item: item[1])


def _pair_witness(alpha: Fcaf, first: Profile, second: Profile, x: int, y: int, note: str = "") -> Witness:
    a, b = alpha(first), alpha(second)
    t, deviation = _worst((t, abs(a.values[x][t] - b.values[y][t])) for t in range(a.p))
    return Witness("pair", (first, second), x, t, y, b.values[y][t], a.values[x][t], deviation, note=note)


def _target_witness(alpha: Fcaf, c: Profile, x: int, t: int, expected: float) -> Witness:
    observed = alpha(c).values[x][t]
    return Witness("target", (c,), x, t, observed=observed, expected=expected, deviation=abs(observed - expected))


def _bounds_witness(alpha: Fcaf, c: Profile) -> Witness:
    out = alpha(c)
    worst = None
    for x, row in enumerate(out.values):
        for t, v in enumerate(row):
            lo, hi = ess_bounds(c.entry(x, t))
            deviation = max(lo - v, v - hi, 0.0)
            if worst is None or deviation > worst.deviation:
                worst = Witness("bounds", (c,), x, t, observed=v, deviation=deviation, bounds=(lo, hi))
    return worst


# Optimality


def _optimality_probes(alpha: Fcaf, seed: int, n: int) -> Iterator[Witness]:
    m, p = alpha.shape
    top = m - p + 1
    for k in range(n):
        rng = make_rng(seed, OPTIMALITY, k)
        t = int(rng.integers(p))
        if top == 1:
            h = 1.0
        elif k % 3 == 0:
            h = float(top)
        elif k % 3 == 1:
            h = 1.0
        else:
            h = float(rng.uniform(1.0, top))
        c = constant_column_profile(derive_seed(seed, OPTIMALITY, k), m, p, t, h)
        observed = alpha(c).column_sum(t)
        yield Witness("column", (c,), type_index=t, observed=observed, expected=h, deviation=abs(observed - h))


def check_optimality(alpha: Fcaf, seed: int, probes: int = DEFAULT_PROBES,
                     tol: float = DEFAULT_TOLERANCE) -> AxiomReport:
    """Constant column sums must survive aggregation."""
    return _run(OPTIMALITY, _optimality_probes(alpha, seed, probes), tol)


# Independence and symmetry


def _independence_probes(alpha: Fcaf, seed: int, n: int, with_atoms: bool) -> Iterator[Witness]:
    m, p = alpha.shape
    for k in range(n):
        j = k % m
        first, second = agreeing_pair(derive_seed(seed, INDEPENDENCE, k), j, m, p, with_atoms=with_atoms)
        yield _pair_witness(alpha, first, second, j, j)


def check_independence(alpha: Fcaf, seed: int, probes: int = DEFAULT_PROBES,
                       tol: float = DEFAULT_TOLERANCE) -> AxiomReport:
    """An object's output may depend only on its own row.

    The primary verdict uses rows that agree exactly; the "atoms" variant
    uses rows that agree only almost everywhere.
    """
    variant = _run(INDEPENDENCE, _independence_probes(alpha, seed, probes, True), tol)
    return _run(INDEPENDENCE, _independence_probes(alpha, seed, probes, False), tol,
                variants={ATOMS_VARIANT: variant})


def _row_swap_probes(alpha: Fcaf, seed: int, n: int) -> Iterator[Witness]:
    m, p = alpha.shape
    for k in range(n):
        rng = make_rng(seed, SYMMETRY, k)
        x, y = (int(v) for v in rng.choice(m, 2, replace=False))
        c = random_profile(derive_seed(seed, SYMMETRY, k), m, p)
        yield _pair_witness(alpha, c, c.with_rows_swapped(x, y), x, y, note="row swap")


def _symmetry_probes(alpha: Fcaf, seed: int, n: int) -> Iterator[Witness]:
    yield from _independence_probes(alpha, seed, n, False)
    yield from _row_swap_probes(alpha, seed, n)


def check_symmetry(alpha: Fcaf, seed: int, probes: int = DEFAULT_PROBES,
                   tol: float = DEFAULT_TOLERANCE) -> AxiomReport:
    """Equal rows (under any relabelling of objects) must get equal outputs."""
    return _run(SYMMETRY, _symmetry_probes(alpha, seed, probes), tol)


# Zero unanimity, unanimity, coherence


def _override_at_endpoint(c: Profile, rng: np.random.Generator, x: int, t: int) -> Profile:
    """Lift entry (x, t) at one endpoint, keeping both constraints there."""
    q = float(rng.choice([0.0, 1.0]))
    y = int(rng.choice([j for j in range(c.m) if j != x]))
    u = int(rng.choice([s for s in range(c.p) if s != t]))
    return inject_point_rectangle(c, q, x, y, t, u)


def _pinned_probes(alpha: Fcaf, seed: int, n: int, label: str, with_atoms: bool,
                   levels: Optional[Sequence[float]]) -> Iterator[Witness]:
    m, p = alpha.shape
    for k in range(n):
        rng = make_rng(seed, label, k)
        x = k % m
        t = int(rng.integers(p))
        if levels is None:
            h = 0.0
        elif k < len(levels):
            h = levels[k]
        else:
            h = float(rng.uniform(0.0, 1.0))
        c = pinned_profile(derive_seed(seed, label, k), m, p, x, t, h)
        if with_atoms:
            c = _override_at_endpoint(c, rng, x, t)
        yield _target_witness(alpha, c, x, t, h)


def _zero_probes(alpha, seed, n, with_atoms) -> Iterator[Witness]:
    return _pinned_probes(alpha, seed, n, ZERO_UNANIMITY, with_atoms, None)


def _unanimity_probes(alpha, seed, n, with_atoms) -> Iterator[Witness]:
    yield from _zero_probes(alpha, seed, n, with_atoms)
    yield from _pinned_probes(alpha, seed, n, UNANIMITY, with_atoms, UNANIMITY_LEVELS)


def check_zero_unanimity(alpha: Fcaf, seed: int, probes: int = DEFAULT_PROBES,
                         tol: float = DEFAULT_TOLERANCE) -> AxiomReport:
    variant = _run(ZERO_UNANIMITY, _zero_probes(alpha, seed, probes, True), tol)
    return _run(ZERO_UNANIMITY, _zero_probes(alpha, seed, probes, False), tol,
                variants={ATOMS_VARIANT: variant})


def check_unanimity(alpha: Fcaf, seed: int, probes: int = DEFAULT_PROBES,
                    tol: float = DEFAULT_TOLERANCE) -> AxiomReport:
    variant = _run(UNANIMITY, _unanimity_probes(alpha, seed, probes, True), tol)
    return _run(UNANIMITY, _unanimity_probes(alpha, seed, probes, False), tol,
                variants={ATOMS_VARIANT: variant})


def _endpoint_profiles(alpha: Fcaf, seed: int, n: int) -> Iterator[Profile]:
    """Profiles with point overrides at 0 and 1, where a degenerate example puts its atoms."""
    m, p = alpha.shape
    for k in range(n):
        rng = make_rng(seed, COHERENCE, "endpoints", k)
        if k == 0:
            c = Profile.lift(uniform_point(m, p))
        else:
            c = random_profile(derive_seed(seed, COHERENCE, "endpoints", k), m, p, amplitude=ENDPOINT_AMPLITUDE)
        for q in (0.0, 1.0):
            x, y = (int(v) for v in rng.choice(m, 2, replace=False))
            t, u = (int(v) for v in rng.choice(p, 2, replace=False))
            c = inject_point_rectangle(c, q, x, y, t, u)
        yield c


def _coherence_probes(alpha: Fcaf, seed: int, n: int) -> Iterator[Witness]:
    m, p = alpha.shape
    yield from _unanimity_probes(alpha, seed, n, False)
    for k in range(n):
        yield _bounds_witness(alpha, random_profile(derive_seed(seed, COHERENCE, k), m, p))
    for c in _endpoint_profiles(alpha, seed, n):
        yield _bounds_witness(alpha, c)


def check_coherence(alpha: Fcaf, seed: int, probes: int = DEFAULT_PROBES,
                    tol: float = DEFAULT_TOLERANCE) -> AxiomReport:
    """Every output entry must lie within the essential range of its entry function."""
    return _run(COHERENCE, _coherence_probes(alpha, seed, probes), tol)


# Non-dictatorship


def separating_offsets(grid_n: int, p: int) -> list[float]:
    """Distinct positive tilts, one per cell."""
    return [(k + 1) / (grid_n + 1) / (2 * p) for k in range(grid_n)]


def _separating_family(alpha: Fcaf, seed: int, grid_n: int) -> list[Profile]:
    m, p = alpha.shape
    base = separating_offsets(grid_n, p)
    shift = max(1, grid_n // 3)
    family = [
        separating_profile(m, p, base),
        separating_profile(m, p, [-base[(k + shift) % grid_n] for k in range(grid_n)]),
    ]
    rng = make_rng(seed, NON_DICTATORSHIP, grid_n)
    for _ in range(EXTRA_SEPARATING_PROBES):
        order = rng.permutation(grid_n)
        signs = rng.choice([-1.0, 1.0], grid_n)
        family.append(separating_profile(m, p, [float(s) * base[int(o)] for s, o in zip(signs, order)]))
    return family


def _cell_gap(alpha: Fcaf, c: Profile, cell: int, grid_n: int) -> float:
    return alpha(c).max_difference(c.at((cell + 0.5) / grid_n))


def check_non_dictatorship(alpha: Fcaf, seed: int, grid_n: int = DEFAULT_GRID_N,
                           tol: float = DEFAULT_TOLERANCE) -> AxiomReport:
    """Grid-relative: no cell of width 1/grid_n may reproduce the output on every separating profile."""
    if grid_n < 2:
        raise ArgumentError(f"grid_n must be at least 2, got {grid_n}")
    family = _separating_family(alpha, seed, grid_n)
    candidates = set(range(grid_n))
    used = 0
    for c in family:
        used += 1
        out = alpha(c)
        candidates = {k for k in candidates if out.max_difference(c.at((k + 0.5) / grid_n)) <= tol}
        if not candidates:
            return AxiomReport(NON_DICTATORSHIP, PASS, used, grid_n=grid_n)

    cell = min(candidates)
    gap = max(_cell_gap(alpha, c, cell, grid_n) for c in family)
    witness = Witness(
        "cell",
        tuple(family),
        observed=gap,
        expected=0.0,
        deviation=gap,
        cell=(cell / grid_n, (cell + 1) / grid_n),
        note=f"output matches cell {cell} of {grid_n} on every separating profile",
    )
    logger.debug(f"{NON_DICTATORSHIP}: {alpha.name} matches cell {cell}")
    return AxiomReport(NON_DICTATORSHIP, FAIL, used, witness, grid_n=grid_n)


# Anonymity


def _swap_witness(alpha: Fcaf, c: Profile, start: float, length: float, shift: float) -> Witness:
    swapped = swap_profile(c, start, length, shift)
    note = f"J=[{start:g}, {start + length:g}], s={shift:g}"
    out, out_swapped = alpha(c), alpha(swapped)
    x, t, deviation = max(
        ((x, t, abs(a - b)) for x, (row_a, row_b) in enumerate(zip(out.values, out_swapped.values))
         for t, (a, b) in enumerate(zip(row_a, row_b))),
        key=lambda item: item[2],
    )
    return Witness("pair", (c, swapped), x, t, x, out_swapped.values[x][t], out.values[x][t], deviation, note=note)


def _anonymity_probes(alpha: Fcaf, seed: int, n: int, grid_n: int) -> Iterator[Witness]:
    m, p = alpha.shape
    separating = separating_profile(m, p, separating_offsets(grid_n, p))
    for start, length, shift in HALF_SWAPS:
        yield _swap_witness(alpha, separating, start, length, shift)
    yield _swap_witness(alpha, indicator_probe_profile(m, p, 1, (0.0, 0.25)), *HALF_SWAPS[0])
    for k in range(n):
        rng = make_rng(seed, ANONYMITY, k)
        length = int(rng.integers(1, 5))
        shift = int(rng.integers(length + 1, SWAP_GRID - length + 1))
        start = int(rng.integers(0, SWAP_GRID - shift - length + 1))
        c = random_profile(derive_seed(seed, ANONYMITY, k), m, p)
        yield _swap_witness(alpha, c, start / SWAP_GRID, length / SWAP_GRID, shift / SWAP_GRID)


def check_anonymity(alpha: Fcaf, seed: int, probes: int = DEFAULT_PROBES,
                    tol: float = DEFAULT_TOLERANCE, grid_n: int = DEFAULT_GRID_N) -> AxiomReport:
    """Swapping two disjoint blocks of individuals must not change the output."""
    return _run(ANONYMITY, _anonymity_probes(alpha, seed, probes, grid_n), tol)


# Suites


def run_suite(alpha: Fcaf, seed: int, probes: int = DEFAULT_PROBES, grid_n: int = DEFAULT_GRID_N,
              tol: float = DEFAULT_TOLERANCE, axioms: Sequence[str] = AXIOMS) -> list[AxiomReport]:
    """Run the requested checkers in canonical order."""
    checkers = {
        OPTIMALITY: lambda: check_optimality(alpha, seed, probes, tol),
        INDEPENDENCE: lambda: check_independence(alpha, seed, probes, tol),
        SYMMETRY: lambda: check_symmetry(alpha, seed, probes, tol),
        ZERO_UNANIMITY: lambda: check_zero_unanimity(alpha, seed, probes, tol),
        UNANIMITY: lambda: check_unanimity(alpha, seed, probes, tol),
        COHERENCE: lambda: check_coherence(alpha, seed, probes, tol),
        NON_DICTATORSHIP: lambda: check_non_dictatorship(alpha, seed, grid_n, tol),
        ANONYMITY: lambda: check_anonymity(alpha, seed, probes, tol, grid_n),
    }
    reports = []
    for axiom in AXIOMS:
        if axiom not in axioms:
            continue
        report = checkers[axiom]()
        logger.info(f"{alpha.name}: {axiom} -> {report.verdict} ({report.probes} probes)")
        reports.append(report)
    return reports


def observed_axioms(reports: Iterable[AxiomReport]) -> frozenset[str]:
    return frozenset(r.axiom for r in reports if r.passed)


def claims_match(alpha: Fcaf, reports: Sequence[AxiomReport]) -> bool:
    """Whether the observed pass set equals the claimed axioms, over the axioms that ran."""
    ran = {r.axiom for r in reports}
    return observed_axioms(reports) == alpha.claimed_axioms & ran


@dataclass(frozen=True)
class ImplicationReport:
    verdicts: dict
    violations: tuple[tuple[str, str, str], ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "verdicts": self.verdicts,
            "violations": [{"aggregator": a, "passes": s, "fails": w} for a, s, w in self.violations],
            "ok": self.ok,
        }


def implication_violations(name: str, verdicts: dict) -> list[tuple[str, str, str]]:
    return [
        (name, strong, weak)
        for strong, weak in IMPLICATIONS
        if verdicts.get(strong) == PASS and verdicts.get(weak) == FAIL
    ]


def implication_matrix(alphas: Sequence[Fcaf], seed: int, probes: int = DEFAULT_PROBES,
                       grid_n: int = DEFAULT_GRID_N, tol: float = DEFAULT_TOLERANCE,
                       suites: Optional[dict] = None) -> ImplicationReport:
    """Run every checker on every aggregator and collect broken implications.

    `suites` maps aggregator names to already computed reports.
    """
    verdicts = {}
    violations = []
    for alpha in alphas:
        reports = (suites or {}).get(alpha.name) or run_suite(alpha, seed, probes, grid_n, tol)
        row = {r.axiom: r.verdict for r in reports}
        verdicts[alpha.name] = row
        violations.extend(implication_violations(alpha.name, row))
    if violations:
        logger.warning(f"Implication violations: {violations}")
    return ImplicationReport(verdicts, tuple(violations))


IMPOSSIBILITY_AXIOMS = (OPTIMALITY, INDEPENDENCE, ZERO_UNANIMITY, NON_DICTATORSHIP)


def counterexamples() -> list[tuple[Fcaf, str]]:
    """Each single-axiom counterexample with the axiom it is built to violate."""
    return [
        (vertex_or_uniform(), OPTIMALITY),
        (lean_switch(), INDEPENDENCE),
        (swapped_dictator(), ZERO_UNANIMITY),
        (dictator(0.0), NON_DICTATORSHIP),
    ]


@dataclass(frozen=True)
class CounterexampleRow:
    aggregator: str
    designated: str
    verdicts: dict

    @property
    def fails_designated(self) -> bool:
        return self.verdicts[self.designated] == FAIL

    @property
    def passes_others(self) -> bool:
        return all(v == PASS for axiom, v in self.verdicts.items() if axiom != self.designated)

    def to_dict(self) -> dict:
        return {
            "aggregator": self.aggregator,
            "designated": self.designated,
            "verdicts": self.verdicts,
            "fails_designated": self.fails_designated,
            "passes_others": self.passes_others,
        }


def counterexample_matrix(seed: int, probes: int = DEFAULT_PROBES, grid_n: int = DEFAULT_GRID_N,
                          tol: float = DEFAULT_TOLERANCE) -> list[CounterexampleRow]:
    """The four theorem-axiom verdicts for every single-axiom counterexample."""
    rows = []
    for alpha, designated in counterexamples():
        reports = run_suite(alpha, seed, probes, grid_n, tol, axioms=IMPOSSIBILITY_AXIOMS)
        rows.append(CounterexampleRow(alpha.name, designated, {r.axiom: r.verdict for r in reports}))
    return rows


def recheck(alpha: Fcaf, report: AxiomReport) -> float:
    """Re-evaluate a FAIL witness and return its deviation.

    For a "cell" witness the returned value is the largest gap between the
    output and the matched cell, so a reproduced failure is a value at or
    below the tolerance. For every other kind a reproduced failure exceeds it.
    """
    w = report.witness
    if w is None:
        raise ArgumentError(f"{report.axiom} report has no witness to recheck")
    if w.kind == "pair":
        a, b = alpha(w.profiles[0]), alpha(w.profiles[1])
        return abs(a.values[w.object_index][w.type_index] - b.values[w.partner_index][w.type_index])
    if w.kind == "target":
        return abs(alpha(w.profiles[0]).values[w.object_index][w.type_index] - w.expected)
    if w.kind == "column":
        return abs(alpha(w.profiles[0]).column_sum(w.type_index) - w.expected)
    if w.kind == "bounds":
        v = alpha(w.profiles[0]).values[w.object_index][w.type_index]
        lo, hi = w.bounds
        return max(lo - v, v - hi, 0.0)
    if w.kind == "cell":
        point = 0.5 * (w.cell[0] + w.cell[1])
        return max(alpha(c).max_difference(c.at(point)) for c in w.profiles)
    raise ArgumentError(f"Unknown witness kind {w.kind!r}")
