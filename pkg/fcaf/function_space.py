"""Piecewise polynomial functions on [0, 1] with finitely many point overrides.

A PiecewiseFn models the map i -> c_i(x)_t for a fixed object and type. Pieces
are polynomials in the global variable i (ascending-degree coefficients) on
right-open intervals, the last one closed at 1. Atoms override single points
and are invisible to Lebesgue integrals and essential bounds.
"""
import bisect
import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from numpy.polynomial import Polynomial
from numpy.polynomial import polynomial as npoly

from .errors import ArgumentError, DomainError
from .schemas import AtomSpec, PieceSpec, PiecewiseFnSpec

logger = logging.getLogger(__name__)

TOLERANCE = 1e-9
EXACT_RANGE_MAX_DEGREE = 3
SAMPLES_PER_PIECE = 4096
REDUNDANT_ATOM_TOL = 1e-12

Coeffs = tuple[float, ...]


def _clean(coeffs: Iterable[float]) -> Coeffs:
    values = [float(c) for c in coeffs]
    if not values:
        return (0.0,)
    while len(values) > 1 and values[-1] == 0.0:
        values.pop()
    return tuple(values)


@dataclass(frozen=True)
class PiecewiseFn:
    """A function [0, 1] -> R given by polynomial pieces plus atom overrides."""
    breakpoints: tuple[float, ...]
    pieces: tuple[Coeffs, ...]
    atoms: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        breakpoints = tuple(float(b) for b in self.breakpoints)
        pieces = tuple(_clean(c) for c in self.pieces)
        atoms = tuple(sorted((float(q), float(v)) for q, v in self.atoms))

        if len(breakpoints) < 2 or breakpoints[0] != 0.0 or breakpoints[-1] != 1.0:
            raise ArgumentError(f"Breakpoints must start at 0 and end at 1, got {breakpoints}")
        if any(b >= c for b, c in zip(breakpoints, breakpoints[1:])):
            raise ArgumentError(f"Breakpoints must be strictly increasing, got {breakpoints}")
        if len(pieces) != len(breakpoints) - 1:
            raise ArgumentError(
                f"Expected {len(breakpoints) - 1} pieces for {len(breakpoints)} breakpoints, got {len(pieces)}"
            )
        points = [q for q, _ in atoms]
        if any(q < 0.0 or q > 1.0 for q in points):
            raise ArgumentError(f"Atom points must lie in [0, 1], got {points}")
        if len(set(points)) != len(points):
            raise ArgumentError(f"Atom points must be distinct, got {points}")

        object.__setattr__(self, "breakpoints", breakpoints)
        object.__setattr__(self, "pieces", pieces)
        object.__setattr__(self, "atoms", atoms)

    # Constructors

    @classmethod
    def constant(cls, value: float, atoms: Iterable[tuple[float, float]] = ()) -> "PiecewiseFn":
        return cls((0.0, 1.0), ((value,),), tuple(atoms))

    @classmethod
    def polynomial(cls, coeffs: Sequence[float], atoms: Iterable[tuple[float, float]] = ()) -> "PiecewiseFn":
        return cls((0.0, 1.0), (tuple(coeffs),), tuple(atoms))

    @classmethod
    def indicator(cls, start: float, end: float) -> "PiecewiseFn":
        """Indicator of the closed interval [start, end] (a single atom if start == end)."""
        if not 0.0 <= start <= end <= 1.0:
            raise ArgumentError(f"Indicator interval [{start}, {end}] must lie in [0, 1]")
        if start == end:
            return cls.constant(0.0, [(start, 1.0)])
        breakpoints = sorted({0.0, start, end, 1.0})
        pieces = [(1.0,) if start <= b < end else (0.0,) for b in breakpoints[:-1]]
        atoms = [] if end == 1.0 else [(end, 1.0)]
        return cls(tuple(breakpoints), tuple(pieces), tuple(atoms))

    @classmethod
    def step(cls, breakpoints: Sequence[float], values: Sequence[float]) -> "PiecewiseFn":
        """Piecewise constant function taking values[k] on [breakpoints[k], breakpoints[k+1])."""
        return cls(tuple(breakpoints), tuple((v,) for v in values))

    def with_atoms(self, atoms: Iterable[tuple[float, float]]) -> "PiecewiseFn":
        """Return a copy whose atom list is extended (and overridden) by `atoms`."""
        merged = dict(self.atoms)
        merged.update((float(q), float(v)) for q, v in atoms)
        return PiecewiseFn(self.breakpoints, self.pieces, tuple(merged.items()))

    def without_atoms(self) -> "PiecewiseFn":
        return PiecewiseFn(self.breakpoints, self.pieces)

    # Queries

    @property
    def degree(self) -> int:
        return max(len(c) for c in self.pieces) - 1

    def piece_index(self, i: float) -> int:
        return min(bisect.bisect_right(self.breakpoints, i) - 1, len(self.pieces) - 1)

    def piece_value(self, i: float) -> float:
        """Value of the polynomial piece containing i, ignoring atoms."""
        return float(npoly.polyval(i, self.pieces[self.piece_index(i)]))

    def intervals(self) -> Iterable[tuple[float, float, Coeffs]]:
        for k, coeffs in enumerate(self.pieces):
            yield self.breakpoints[k], self.breakpoints[k + 1], coeffs

    def __call__(self, i: float) -> float:
        return evaluate(self, i)

    # Wire format

    def to_spec(self) -> PiecewiseFnSpec:
        return PiecewiseFnSpec(
            breakpoints=list(self.breakpoints),
            pieces=[PieceSpec(coeffs=list(c)) for c in self.pieces],
            atoms=[AtomSpec(point=q, value=v) for q, v in self.atoms],
        )

    @classmethod
    def from_spec(cls, spec: PiecewiseFnSpec) -> "PiecewiseFn":
        return cls(
            tuple(spec.breakpoints),
            tuple(tuple(p.coeffs) for p in spec.pieces),
            tuple((a.point, a.value) for a in spec.atoms),
        )


def evaluate(f: PiecewiseFn, i: float) -> float:
    """Evaluate f at i, honouring atom overrides."""
    if not 0.0 <= i <= 1.0:
        raise DomainError(f"Evaluation point {i} outside [0, 1]")
    for q, v in f.atoms:
        if q == i:
            return v
    return f.piece_value(i)


def common_refinement(*fns: PiecewiseFn) -> tuple[list[float], list[list[Coeffs]]]:
    """Merge breakpoints and return, per function, its coefficients on each refined interval."""
    breakpoints = sorted(set().union(*(f.breakpoints for f in fns)))
    per_fn = []
    for f in fns:
        per_fn.append([f.pieces[f.piece_index(left)] for left in breakpoints[:-1]])
    return breakpoints, per_fn


def combine(terms: Sequence[tuple[float, PiecewiseFn]]) -> PiecewiseFn:
    """Linear combination sum(a * f) of any number of functions."""
    if not terms:
        return PiecewiseFn.constant(0.0)
    fns = [f for _, f in terms]
    breakpoints, per_fn = common_refinement(*fns)

    pieces = []
    for k in range(len(breakpoints) - 1):
        acc = np.zeros(1)
        for (a, _), coeffs in zip(terms, per_fn):
            acc = npoly.polyadd(acc, a * np.asarray(coeffs[k]))
        pieces.append(tuple(acc))

    points = sorted({q for f in fns for q, _ in f.atoms})
    atoms = [(q, sum(a * evaluate(f, q) for a, f in terms)) for q in points]
    return PiecewiseFn(tuple(breakpoints), tuple(pieces), tuple(atoms))


def linear_combine(a: float, f: PiecewiseFn, b: float, g: PiecewiseFn) -> PiecewiseFn:
    """Return a*f + b*g; atoms exist exactly where f or g has one."""
    return combine([(a, f), (b, g)])


def sum_functions(fns: Iterable[PiecewiseFn]) -> PiecewiseFn:
    return combine([(1.0, f) for f in fns])


def ae_equal(f: PiecewiseFn, g: PiecewiseFn, tol: float = TOLERANCE) -> bool:
    """Equality up to a Lebesgue-null set: compare refined coefficients, ignore atoms."""
    _, (fc, gc) = common_refinement(f, g)
    for a, b in zip(fc, gc):
        diff = npoly.polysub(np.asarray(a), np.asarray(b))
        if np.any(np.abs(diff) > tol):
            return False
    return True


def _candidate_points(c: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Points where a polynomial can attain its extrema over [lo, hi].

    Exact through derivative roots up to cubic pieces; dense sampling beyond.
    """
    degree = len(c) - 1
    if degree <= 0:
        return np.asarray([lo])
    if degree <= EXACT_RANGE_MAX_DEGREE:
        roots = npoly.polyroots(npoly.polyder(c))
        candidates = [lo, hi] + [
            float(r.real) for r in np.atleast_1d(roots) if abs(r.imag) <= 1e-12 and lo < r.real < hi
        ]
        return np.asarray(candidates)
    return np.linspace(lo, hi, SAMPLES_PER_PIECE)


def poly_range(coeffs: Sequence[float], lo: float, hi: float) -> tuple[float, float]:
    """Min and max of a polynomial over [lo, hi]."""
    c = np.asarray(coeffs, dtype=float)
    values = npoly.polyval(_candidate_points(c, lo, hi), c)
    return float(values.min()), float(values.max())


def lowest_point(f: PiecewiseFn) -> tuple[float, float]:
    """Location and value of the pointwise minimum of f, atoms included."""
    best = (0.0, float("inf"))
    for lo, hi, coeffs in f.intervals():
        c = np.asarray(coeffs, dtype=float)
        xs = _candidate_points(c, lo, hi)
        values = npoly.polyval(xs, c)
        k = int(np.argmin(values))
        if values[k] < best[1]:
            best = (float(xs[k]), float(values[k]))
    for q, v in f.atoms:
        if v < best[1]:
            best = (q, v)
    return best


def ess_bounds(f: PiecewiseFn) -> tuple[float, float]:
    """Essential infimum and supremum: piece extrema only, atoms excluded."""
    lows, highs = zip(*(poly_range(c, lo, hi) for lo, hi, c in f.intervals()))
    return min(lows), max(highs)


def range_bounds(f: PiecewiseFn) -> tuple[float, float]:
    """Pointwise infimum and supremum, atoms included."""
    lo, hi = ess_bounds(f)
    for _, v in f.atoms:
        lo, hi = min(lo, v), max(hi, v)
    return lo, hi


def within(f: PiecewiseFn, lo: float, hi: float, tol: float = TOLERANCE) -> bool:
    """Whether f (atoms included) takes values in [lo - tol, hi + tol]."""
    f_lo, f_hi = range_bounds(f)
    return f_lo >= lo - tol and f_hi <= hi + tol


def _shift_coeffs(coeffs: Coeffs, delta: float) -> Coeffs:
    """Coefficients of i -> p(i + delta)."""
    if delta == 0.0:
        return coeffs
    return tuple(Polynomial(coeffs)(Polynomial([delta, 1.0])).coef)


def swap_blocks(f: PiecewiseFn, start: float, length: float, shift: float) -> PiecewiseFn:
    """Exchange the blocks J = [start, start+length] and J + shift.

    The result equals f(i - shift) on J + shift, f(i + shift) on J and f(i)
    elsewhere. A negative shift swaps J with the block to its left.
    """
    if length < 0:
        raise ArgumentError(f"Block length must be non-negative, got {length}")
    if shift < 0:
        start, shift = start + shift, -shift
    lo_a, hi_a = start, start + length
    lo_b, hi_b = start + shift, start + shift + length
    if lo_a < 0.0 or hi_b > 1.0 + 1e-15:
        raise ArgumentError(f"Blocks [{lo_a}, {hi_a}] and [{lo_b}, {hi_b}] leave [0, 1]")
    if shift <= length:
        raise ArgumentError(f"Blocks overlap: shift {shift} must exceed length {length}")
    hi_b = min(hi_b, 1.0)

    def source(i: float) -> float:
        if lo_a <= i <= hi_a:
            return i + shift
        if lo_b <= i <= hi_b:
            return i - shift
        return i

    cuts = set(f.breakpoints) | {lo_a, hi_a, lo_b, hi_b}
    for b in f.breakpoints:
        if lo_a < b < hi_a:
            cuts.add(b + shift)
        if lo_b < b < hi_b:
            cuts.add(b - shift)
    breakpoints = sorted(c for c in cuts if 0.0 <= c <= 1.0)

    pieces = []
    for left, right in zip(breakpoints, breakpoints[1:]):
        mid = 0.5 * (left + right)
        src = min(max(source(mid), 0.0), 1.0)
        pieces.append(_shift_coeffs(f.pieces[f.piece_index(src)], src - mid))
    swapped = PiecewiseFn(tuple(breakpoints), tuple(pieces))

    atoms = {source(q): v for q, v in f.atoms}
    # J is closed: its right ends take the partner's value
    for end in (hi_a, hi_b):
        if end not in atoms:
            atoms[end] = evaluate(f, min(source(end), 1.0))
    kept = [
        (q, v) for q, v in atoms.items()
        if abs(v - swapped.piece_value(q)) > REDUNDANT_ATOM_TOL
    ]
    return swapped.with_atoms(kept)
