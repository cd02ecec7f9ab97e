"""Black-box identification of aggregators.

Probes an Fcaf with indicator profiles to recover the probability measure
that represents it, checks that every contrast type sees the same measure,
tests additivity of the per-entry response, tabulates the odd representer h
for two-object aggregators, reproduces the six-object worked example, and
checks across a gallery that the axiom suites and extraction agree on which
black boxes are weighted means.
"""
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial import Polynomial

from .aggregators import (
    ANONYMITY,
    COHERENCE,
    INDEPENDENCE,
    NON_DICTATORSHIP,
    OPTIMALITY,
    PAIR_SHAPE,
    SYMMETRY,
    UNANIMITY,
    ZERO_UNANIMITY,
    Fcaf,
    weighted_mean,
)
from .axioms import PASS, AxiomReport, check_symmetry, check_zero_unanimity, run_suite
from .classification import (
    ClassPoint,
    Profile,
    example1_profile,
    indicator_probe_profile,
    random_bump,
    random_profile,
    uniform_point,
    validate_profile,
)
from .config import (
    DEFAULT_EXTRACT_GRID_N,
    DEFAULT_GRID_N,
    DEFAULT_PROBES,
    DEFAULT_SEED,
    DEFAULT_TOLERANCE,
    DEFAULT_VALIDATION_N,
)
from .errors import ArgumentError, FcafError, PreconditionError, ProtocolError
from .function_space import PiecewiseFn, combine
from .measure import Measure, cdf
from .seeding import derive_seed, make_rng

logger = logging.getLogger(__name__)

ATOM_THRESHOLD = 1e-6
FIT_TOL = 1e-11
MAX_CDF_DEGREE = 5
MAX_SPLIT_DEPTH = 6
CHECK_FRACTIONS = (0.2763932022500210, 0.7236067977499790)
CURVE_POINTS = 101
ADDITIVITY_PIECES = 2

EXAMPLE1_TABLE = (
    (1 / 2, 1 / 3, 1 / 6),
    (1 / 20, 9 / 20, 1 / 2),
    (0.0, 1.0, 0.0),
    (1.0, 0.0, 0.0),
    (0.0, 1.0, 0.0),
    (0.0, 0.0, 1.0),
)


def probe_grid(grid_n: int) -> tuple[float, ...]:
    if grid_n < 2:
        raise ArgumentError(f"grid_n must be at least 2, got {grid_n}")
    return tuple(k / (grid_n - 1) for k in range(grid_n))


def _checked(alpha: Fcaf, c: Profile, label: str) -> ClassPoint:
    out = alpha(c)
    report = out.validate()
    if not report.ok:
        raise ProtocolError(f"{alpha.name} returned an invalid classification for {label}: {report.to_dict()}", probe=c)
    return out


# Measure extraction


@dataclass(frozen=True)
class ExtractionResult:
    grid: tuple[float, ...]
    cdf_values: dict
    detected_atoms: tuple[tuple[float, float], ...]
    reconstructed: Measure
    max_type_deviation: float
    match_deviation: float
    shape: tuple[int, int] = (6, 3)

    @property
    def single_type(self) -> bool:
        return len(self.cdf_values) < 2

    def to_dict(self) -> dict:
        return {
            "shape": list(self.shape),
            "grid": list(self.grid),
            "cdf_values": {str(t): list(v) for t, v in sorted(self.cdf_values.items())},
            "detected_atoms": [{"point": q, "mass": w} for q, w in self.detected_atoms],
            "reconstructed": self.reconstructed.to_spec().model_dump(),
            "max_type_deviation": self.max_type_deviation,
            "match_deviation": self.match_deviation,
            "single_type": self.single_type,
        }


class _CdfReconstructor:
    """Turns a probed CDF into a density-plus-atoms Measure.

    Each grid cell is fitted with the lowest-degree polynomial CDF that also
    reproduces two check probes. Cells that refuse to fit are searched for a
    jump by bisection; a jump above ATOM_THRESHOLD becomes a point mass and
    the cell is refitted. Cells that still refuse are split, and past
    MAX_SPLIT_DEPTH get a constant density.
    """

    def __init__(self, cdf_at: Callable[[float], float]):
        self.cdf_at = cdf_at
        self.atoms: list[tuple[float, float]] = []
        self.pieces: list[tuple[float, float, tuple[float, ...]]] = []

    def continuous_part(self, y: float) -> float:
        return self.cdf_at(y) - sum(w for q, w in self.atoms if q <= y)

    def run(self, grid: tuple[float, ...]) -> Measure:
        first = self.cdf_at(grid[0])
        if first > 0.0:
            self.atoms.append((grid[0], first))
        for lo, hi in zip(grid, grid[1:]):
            self._cell(lo, hi, 0)
        return self._measure()

    def _fit(self, lo: float, hi: float) -> Optional[Polynomial]:
        checks = [lo + f * (hi - lo) for f in CHECK_FRACTIONS]
        expected = [self.continuous_part(y) for y in checks]
        for degree in range(1, MAX_CDF_DEGREE + 1):
            nodes = np.linspace(lo, hi, degree + 1)
            values = [self.continuous_part(float(y)) for y in nodes]
            fit = Polynomial.fit(nodes, values, degree, domain=[lo, hi]).convert()
            if all(abs(fit(y) - v) <= FIT_TOL for y, v in zip(checks, expected)):
                return fit
        return None

    def _locate_jump(self, lo: float, hi: float) -> tuple[float, float]:
        a, b = lo, hi
        while math.nextafter(a, b) < b:
            mid = 0.5 * (a + b)
            if mid <= a or mid >= b:
                break
            g_a, g_mid, g_b = (self.continuous_part(y) for y in (a, mid, b))
            if g_mid - g_a >= g_b - g_mid:
                b = mid
            else:
                a = mid
        return b, self.continuous_part(b) - self.continuous_part(a)

    def _cell(self, lo: float, hi: float, depth: int):
        fit = self._fit(lo, hi)
        if fit is None:
            point, mass = self._locate_jump(lo, hi)
            if mass > ATOM_THRESHOLD:
                logger.debug(f"Atom of mass {mass:.6g} at {point!r}")
                self.atoms.append((point, mass))
                fit = self._fit(lo, hi)
        if fit is None and depth < MAX_SPLIT_DEPTH:
            mid = 0.5 * (lo + hi)
            self._cell(lo, mid, depth + 1)
            self._cell(mid, hi, depth + 1)
            return
        if fit is None:
            logger.warning(f"No polynomial CDF fits [{lo}, {hi}]; using a constant density")
            slope = (self.continuous_part(hi) - self.continuous_part(lo)) / (hi - lo)
            self.pieces.append((lo, hi, (slope,)))
            return
        self.pieces.append((lo, hi, tuple(fit.deriv().coef)))

    def _measure(self) -> Measure:
        breakpoints = [self.pieces[0][0]] + [hi for _, hi, _ in self.pieces]
        density = PiecewiseFn(tuple(breakpoints), tuple(c for _, _, c in self.pieces))
        merged: dict[float, float] = {}
        for q, w in self.atoms:
            merged[q] = merged.get(q, 0.0) + w
        return Measure(density, tuple(merged.items()))


def extract_measure(alpha: Fcaf, grid_n: int = DEFAULT_EXTRACT_GRID_N,
                    validation_n: int = DEFAULT_VALIDATION_N, seed: int = DEFAULT_SEED) -> ExtractionResult:
    """Recover mu^t([0, x]) on a grid for every contrast type and rebuild the measure.

    Raises:
        ArgumentError: the aggregator's shape has fewer than three objects
        ProtocolError: a probe output is not a valid classification or the
            recovered CDF cannot be a probability measure
    """
    m, p = alpha.shape
    if m < 3:
        raise ArgumentError(f"Measure extraction needs m >= 3, {alpha.name} probes with m={m}")
    grid = probe_grid(grid_n)

    @lru_cache(maxsize=None)
    def probe(t: int, x: float) -> float:
        c = indicator_probe_profile(m, p, t, (0.0, x))
        return _checked(alpha, c, f"indicator probe t={t}, J=[0, {x!r}]").values[0][t]

    cdf_values = {t: tuple(probe(t, x) for x in grid) for t in range(1, p)}
    max_type_deviation = 0.0
    for t in cdf_values:
        for u in cdf_values:
            deviation = max(abs(a - b) for a, b in zip(cdf_values[t], cdf_values[u]))
            max_type_deviation = max(max_type_deviation, deviation)

    reconstructor = _CdfReconstructor(lambda y: probe(1, y))
    try:
        reconstructed = reconstructor.run(grid)
    except ArgumentError as e:
        raise ProtocolError(f"Recovered CDF of {alpha.name} is not a probability measure: {e}") from e

    representer = weighted_mean(reconstructed, shape=alpha.shape)
    match_deviation = 0.0
    for k in range(validation_n):
        c = random_profile(derive_seed(seed, "validation", k), m, p)
        match_deviation = max(match_deviation, alpha(c).max_difference(representer(c)))

    result = ExtractionResult(
        grid=grid,
        cdf_values=cdf_values,
        detected_atoms=tuple(sorted(reconstructed.masses)),
        reconstructed=reconstructed,
        max_type_deviation=max_type_deviation,
        match_deviation=match_deviation,
        shape=alpha.shape,
    )
    logger.info(
        f"Extracted {alpha.name}: {len(result.detected_atoms)} atoms, "
        f"type deviation {max_type_deviation:.3e}, match deviation {match_deviation:.3e}"
    )
    return result


def cdf_error(result: ExtractionResult, mu: Measure) -> float:
    """Largest gap between the probed CDFs and a known measure on the grid."""
    return max(
        abs(v - cdf(mu, x))
        for values in result.cdf_values.values()
        for x, v in zip(result.grid, values)
    )


def consistency_check(result: ExtractionResult, tol: float = DEFAULT_TOLERANCE) -> bool:
    """Whether every contrast type recovered the same measure.

    Holds vacuously, with a warning, when only one contrast type exists.
    """
    if result.single_type:
        logger.warning("Consistency is vacuous: only one contrast type was probed (single-type)")
        return True
    return result.max_type_deviation <= tol


# Additivity


@dataclass(frozen=True)
class AdditivityReport:
    additive: bool
    probes: int
    skipped: int
    max_deviation: float
    witness: Optional[dict] = None

    def to_dict(self) -> dict:
        return {
            "additive": self.additive,
            "probes": self.probes,
            "skipped": self.skipped,
            "max_deviation": self.max_deviation,
            "witness": self.witness,
        }


def _rectangle(base: Profile, t: int, u: int, f: PiecewiseFn) -> Profile:
    """+f at (x_1, t) and (x_2, u), -f at (x_1, u) and (x_2, t)."""
    return base.replace({
        (0, t): combine([(1.0, base.entry(0, t)), (1.0, f)]),
        (1, u): combine([(1.0, base.entry(1, u)), (1.0, f)]),
        (0, u): combine([(1.0, base.entry(0, u)), (-1.0, f)]),
        (1, t): combine([(1.0, base.entry(1, t)), (-1.0, f)]),
    })


def _response(alpha: Fcaf, base_out: ClassPoint, c: Profile) -> np.ndarray:
    return np.asarray(alpha(c).values) - np.asarray(base_out.values)


def additivity_probe(alpha: Fcaf, seed: int = DEFAULT_SEED, probes: int = DEFAULT_PROBES,
                     tol: float = DEFAULT_TOLERANCE) -> AdditivityReport:
    """Check resp(f + g) = resp(f) + resp(g) for small rectangle perturbations.

    The first probe uses f = g = 1/(2m), the largest constant shift the
    uniform base admits twice over.
    """
    m, p = alpha.shape
    eps = 1.0 / (2 * m)
    base = Profile.lift(uniform_point(m, p))
    base_out = alpha(base)
    skipped = 0
    max_deviation = 0.0
    witness = None
    for k in range(probes):
        rng = make_rng(seed, "additivity", k)
        t, u = (int(v) for v in rng.choice(p, 2, replace=False))
        if k == 0:
            t, u = 0, 1
            f = g = PiecewiseFn.constant(eps)
        else:
            f = random_bump(rng, ADDITIVITY_PIECES, eps * float(rng.uniform(0.1, 1.0)))
            g = random_bump(rng, ADDITIVITY_PIECES, eps * float(rng.uniform(0.1, 1.0)))
        shifted = [_rectangle(base, t, u, h) for h in (f, g, combine([(1.0, f), (1.0, g)]))]
        if not all(validate_profile(c).ok for c in shifted):
            skipped += 1
            logger.warning(f"Additivity probe {k} left the profile space; skipped")
            continue
        r_f, r_g, r_fg = (_response(alpha, base_out, c) for c in shifted)
        gap = np.abs(r_fg - r_f - r_g)
        deviation = float(gap.max())
        if deviation > max_deviation:
            x, s = np.unravel_index(int(gap.argmax()), gap.shape)
            max_deviation = deviation
            witness = {
                "probe": k,
                "object": int(x),
                "type": int(s),
                "types": [t, u],
                "response_f": float(r_f[x, s]),
                "response_g": float(r_g[x, s]),
                "response_f_plus_g": float(r_fg[x, s]),
                "deviation": deviation,
            }
    report = AdditivityReport(max_deviation <= tol, probes - skipped, skipped, max_deviation, witness)
    logger.info(f"Additivity of {alpha.name}: max deviation {max_deviation:.3e} over {report.probes} probes")
    return report


# Odd representer for two objects


@dataclass(frozen=True)
class HTableReport:
    u: tuple[float, ...]
    h: tuple[float, ...]
    oddness_deviation: float
    endpoint_deviation: float
    preconditions: dict = field(default_factory=dict)
    tolerance: float = DEFAULT_TOLERANCE

    @property
    def ok(self) -> bool:
        return self.oddness_deviation <= self.tolerance and self.endpoint_deviation <= self.tolerance

    def value_at(self, u: float) -> float:
        for point, value in zip(self.u, self.h):
            if abs(point - u) <= 1e-12:
                return value
        raise ArgumentError(f"{u} is not a tabulated point")

    def to_dict(self) -> dict:
        return {
            "u": list(self.u),
            "h": list(self.h),
            "oddness_deviation": self.oddness_deviation,
            "endpoint_deviation": self.endpoint_deviation,
            "preconditions": self.preconditions,
            "ok": self.ok,
        }


def constant_pair_profile(a: float) -> Profile:
    """[[a, 1-a], [1-a, a]] held by every individual."""
    return Profile.lift(ClassPoint(((a, 1.0 - a), (1.0 - a, a))))


def extract_h(alpha: Fcaf, grid_n: int = DEFAULT_EXTRACT_GRID_N, seed: int = DEFAULT_SEED,
              probes: int = DEFAULT_PROBES, tol: float = DEFAULT_TOLERANCE) -> HTableReport:
    """Tabulate h(a - 1/2) = alpha(constant a)(x_1)_1 - 1/2 for two objects and two types.

    Raises:
        ArgumentError: alpha does not probe with m = p = 2
        PreconditionError: the symmetry or zero-unanimity suite fails
    """
    if alpha.shape != PAIR_SHAPE:
        raise ArgumentError(f"extract_h needs shape {PAIR_SHAPE}, {alpha.name} has {alpha.shape}")
    preconditions: dict[str, AxiomReport] = {
        "symmetry": check_symmetry(alpha, seed, probes, tol),
        "zero_unanimity": check_zero_unanimity(alpha, seed, probes, tol),
    }
    failed = [name for name, report in preconditions.items() if not report.passed]
    if failed:
        diagnostic = {name: r.to_dict() for name, r in preconditions.items()}
        logger.error(f"extract_h refused for {alpha.name}: {failed} failed")
        raise PreconditionError(f"{alpha.name} fails the {', '.join(failed)} suite(s)", diagnostic)

    levels = probe_grid(grid_n)
    u = tuple(a - 0.5 for a in levels)
    h = tuple(_checked(alpha, constant_pair_profile(a), f"constant profile a={a!r}").values[0][0] - 0.5
              for a in levels)
    oddness = max(abs(h[k] + h[-1 - k]) for k in range(len(h)))
    endpoints = max(abs(h[-1] - 0.5), abs(h[0] + 0.5))
    return HTableReport(
        u, h, oddness, endpoints,
        preconditions={name: r.verdict for name, r in preconditions.items()},
        tolerance=tol,
    )


# Worked example


@dataclass(frozen=True)
class Example1Report:
    table: ClassPoint
    deviations: tuple[tuple[float, ...], ...]
    curves: tuple[tuple[float, ...], ...]

    @property
    def max_deviation(self) -> float:
        return max(max(row) for row in self.deviations)

    def to_dict(self) -> dict:
        return {
            "table": [list(row) for row in self.table.values],
            "expected": [list(row) for row in EXAMPLE1_TABLE],
            "deviations": [list(row) for row in self.deviations],
            "max_deviation": self.max_deviation,
            "curves": [list(row) for row in self.curves],
        }


CURVE_COLUMNS = ("i", "x1_t1", "x1_t2", "x1_t3", "x2_t1", "x2_t2", "x2_t3")


def example1_report(mu: Optional[Measure] = None) -> Example1Report:
    """Aggregate the worked example with density 3i^2 (or `mu`) and compare to the exact table."""
    mu = mu or Measure.power_weight(2)
    c = example1_profile()
    table = weighted_mean(mu).aggregate(c)
    deviations = tuple(
        tuple(abs(v - e) for v, e in zip(row, expected))
        for row, expected in zip(table.values, EXAMPLE1_TABLE)
    )
    curves = []
    for k in range(CURVE_POINTS):
        i = k / (CURVE_POINTS - 1)
        point = c.at(i)
        curves.append((i, *point.row(0), *point.row(1)))
    return Example1Report(table, deviations, tuple(curves))


# Identification across a gallery

REPRODUCTION_TOL = 1e-6
REPRESENTATION_AXIOMS = (OPTIMALITY, INDEPENDENCE, ZERO_UNANIMITY)
ARITHMETIC_MEAN_AXIOMS = (OPTIMALITY, INDEPENDENCE, ZERO_UNANIMITY, ANONYMITY)
NON_DEGENERATE_COMBINATIONS = (
    (OPTIMALITY, INDEPENDENCE, ZERO_UNANIMITY, NON_DICTATORSHIP),
    (OPTIMALITY, INDEPENDENCE, UNANIMITY, NON_DICTATORSHIP),
    (OPTIMALITY, INDEPENDENCE, COHERENCE, NON_DICTATORSHIP),
    (OPTIMALITY, SYMMETRY, ZERO_UNANIMITY, NON_DICTATORSHIP),
    (OPTIMALITY, SYMMETRY, UNANIMITY, NON_DICTATORSHIP),
    (OPTIMALITY, SYMMETRY, COHERENCE, NON_DICTATORSHIP),
)


def _combination_label(axioms: Sequence[str]) -> str:
    return "+".join(axioms)


@dataclass(frozen=True)
class IdentificationRow:
    """What the suites say about one black box and whether extraction reproduces it.

    `lebesgue` and `degenerate` describe the extracted measure and are only
    meaningful when `reproduced` holds.
    """
    aggregator: str
    verdicts: dict
    additive: bool
    reproduced: bool
    match_deviation: Optional[float] = None
    lebesgue: bool = False
    degenerate: bool = False
    extraction_error: Optional[str] = None

    @property
    def premises_hold(self) -> bool:
        return self.additive and all(self.verdicts[a] == PASS for a in REPRESENTATION_AXIOMS)

    @property
    def sound(self) -> bool:
        """A black box passing every premise is reproduced; any miss comes with a failed premise."""
        return self.reproduced or not self.premises_hold

    def passes(self, axioms: Sequence[str]) -> bool:
        return all(self.verdicts[a] == PASS for a in axioms)

    @property
    def arithmetic_mean(self) -> bool:
        return self.reproduced and self.lebesgue

    @property
    def non_degenerate_mean(self) -> bool:
        return self.reproduced and not self.degenerate

    @property
    def combinations_agree(self) -> bool:
        """Axiom combinations pass exactly for the means they characterize."""
        if self.passes(ARITHMETIC_MEAN_AXIOMS) != self.arithmetic_mean:
            return False
        return all(self.passes(c) == self.non_degenerate_mean for c in NON_DEGENERATE_COMBINATIONS)

    def to_dict(self) -> dict:
        return {
            "aggregator": self.aggregator,
            "verdicts": self.verdicts,
            "additive": self.additive,
            "premises_hold": self.premises_hold,
            "reproduced": self.reproduced,
            "match_deviation": self.match_deviation,
            "lebesgue": self.lebesgue,
            "degenerate": self.degenerate,
            "extraction_error": self.extraction_error,
            "combinations": {
                _combination_label(c): self.passes(c)
                for c in (ARITHMETIC_MEAN_AXIOMS, *NON_DEGENERATE_COMBINATIONS)
            },
            "sound": self.sound,
            "combinations_agree": self.combinations_agree,
        }


@dataclass(frozen=True)
class IdentificationReport:
    rows: tuple[IdentificationRow, ...]
    skipped: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return all(r.sound and r.combinations_agree for r in self.rows)

    def row(self, name: str) -> IdentificationRow:
        for r in self.rows:
            if r.aggregator == name:
                return r
        raise ArgumentError(f"No identification row for {name!r}")

    def to_dict(self) -> dict:
        return {
            "rows": [r.to_dict() for r in self.rows],
            "skipped": list(self.skipped),
            "ok": self.ok,
        }


def identify(alpha: Fcaf, seed: int = DEFAULT_SEED, probes: int = DEFAULT_PROBES,
             grid_n: int = DEFAULT_GRID_N, extract_grid_n: int = DEFAULT_EXTRACT_GRID_N,
             validation_n: int = DEFAULT_VALIDATION_N, tol: float = DEFAULT_TOLERANCE,
             reports: Optional[Sequence[AxiomReport]] = None) -> IdentificationRow:
    """Run the full suite and the additivity check, then try to reproduce alpha by extraction."""
    reports = reports if reports is not None else run_suite(alpha, seed, probes, grid_n, tol)
    verdicts = {r.axiom: r.verdict for r in reports}
    additive = additivity_probe(alpha, seed, probes, tol).additive
    try:
        result = extract_measure(alpha, extract_grid_n, validation_n, seed)
    except (FcafError, ValueError) as e:
        logger.info(f"{alpha.name} could not be extracted: {e}")
        return IdentificationRow(alpha.name, verdicts, additive, False, extraction_error=str(e))

    reproduced = consistency_check(result, REPRODUCTION_TOL) and result.match_deviation <= REPRODUCTION_TOL
    return IdentificationRow(
        alpha.name,
        verdicts,
        additive,
        reproduced,
        match_deviation=result.match_deviation,
        lebesgue=cdf_error(result, Measure.lebesgue()) <= REPRODUCTION_TOL,
        degenerate=any(w >= 1.0 - REPRODUCTION_TOL for _, w in result.reconstructed.masses),
    )


def identification_matrix(alphas: Sequence[Fcaf], seed: int = DEFAULT_SEED, probes: int = DEFAULT_PROBES,
                          grid_n: int = DEFAULT_GRID_N, extract_grid_n: int = DEFAULT_EXTRACT_GRID_N,
                          validation_n: int = DEFAULT_VALIDATION_N, tol: float = DEFAULT_TOLERANCE,
                          suites: Optional[dict] = None) -> IdentificationReport:
    """Identify every aggregator with at least three objects.

    Two-object aggregators are skipped; the weighted-mean characterization
    needs m >= 3.
    """
    suites = suites or {}
    rows, skipped = [], []
    for alpha in alphas:
        if alpha.shape[0] < 3:
            skipped.append(alpha.name)
            continue
        row = identify(alpha, seed, probes, grid_n, extract_grid_n, validation_n, tol, suites.get(alpha.name))
        if not row.sound:
            logger.error(f"{alpha.name} passes every premise but is not reproduced by its extracted mean")
        if not row.combinations_agree:
            logger.error(f"{alpha.name}: axiom combinations disagree with its extracted measure")
        rows.append(row)
    return IdentificationReport(tuple(rows), tuple(skipped))
