"""Fuzzy classifications, continuum profiles and deterministic probe generators.

Objects and types are 0-based: object x_1 is index 0 and the contrast type
e_1 is index 0.
"""
import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
from numpy.polynomial import Polynomial

from .errors import ArgumentError
from .function_space import (
    PiecewiseFn,
    combine,
    evaluate,
    lowest_point,
    range_bounds,
    sum_functions,
    swap_blocks,
)
from .schemas import ObjectSpec, ProfileSpec
from .seeding import make_rng

logger = logging.getLogger(__name__)

TOLERANCE = 1e-9
MOVE_SAFETY = 0.9
MIN_MOVE = 1e-6

Matrix = tuple[tuple[float, ...], ...]


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of a constraint check; the first violation found is the witness."""
    ok: bool
    constraint: Optional[str] = None
    object_index: Optional[int] = None
    type_index: Optional[int] = None
    location: Optional[float] = None
    observed: Optional[float] = None

    def __bool__(self) -> bool:
        return self.ok

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "constraint": self.constraint,
            "object": self.object_index,
            "type": self.type_index,
            "location": self.location,
            "observed": self.observed,
        }


PASS = ValidationReport(ok=True)


def _check_shape(m: int, p: int):
    if m < 2 or p < 2 or p > m:
        raise ArgumentError(f"Need m >= p >= 2, got m={m}, p={p}")


@dataclass(frozen=True)
class ClassPoint:
    """One fuzzy classification: an m x p matrix of type proportions."""
    values: Matrix

    def __post_init__(self):
        values = tuple(tuple(float(v) for v in row) for row in self.values)
        if not values or len({len(row) for row in values}) != 1:
            raise ArgumentError("ClassPoint rows must be non-empty and of equal length")
        object.__setattr__(self, "values", values)

    @property
    def m(self) -> int:
        return len(self.values)

    @property
    def p(self) -> int:
        return len(self.values[0])

    def row(self, j: int) -> tuple[float, ...]:
        return self.values[j]

    def column_sum(self, t: int) -> float:
        return sum(row[t] for row in self.values)

    def validate(self, tol: float = TOLERANCE) -> ValidationReport:
        if self.m < 2 or self.p < 2 or self.p > self.m:
            return ValidationReport(False, "shape", observed=float(self.p))
        for j, row in enumerate(self.values):
            for t, v in enumerate(row):
                if v < -tol or v > 1.0 + tol:
                    return ValidationReport(False, "entry_range", j, t, observed=v)
            total = sum(row)
            if abs(total - 1.0) > tol:
                return ValidationReport(False, "row_sum", j, observed=total)
        for t in range(self.p):
            total = self.column_sum(t)
            if total < 1.0 - tol:
                return ValidationReport(False, "column_sum", type_index=t, observed=total)
        return PASS

    def max_difference(self, other: "ClassPoint") -> float:
        return max(
            abs(a - b)
            for row_a, row_b in zip(self.values, other.values)
            for a, b in zip(row_a, row_b)
        )

    def to_dict(self) -> dict:
        return {"m": self.m, "p": self.p, "values": [list(row) for row in self.values]}


@dataclass(frozen=True)
class Profile:
    """A continuum profile c^I: an m x p grid of functions of the individual i."""
    entries: tuple[tuple[PiecewiseFn, ...], ...]

    def __post_init__(self):
        entries = tuple(tuple(row) for row in self.entries)
        if not entries or len({len(row) for row in entries}) != 1:
            raise ArgumentError("Profile rows must be non-empty and of equal length")
        object.__setattr__(self, "entries", entries)

    @property
    def m(self) -> int:
        return len(self.entries)

    @property
    def p(self) -> int:
        return len(self.entries[0])

    def entry(self, j: int, t: int) -> PiecewiseFn:
        return self.entries[j][t]

    def row(self, j: int) -> tuple[PiecewiseFn, ...]:
        return self.entries[j]

    def column(self, t: int) -> tuple[PiecewiseFn, ...]:
        return tuple(row[t] for row in self.entries)

    def at(self, i: float) -> ClassPoint:
        """The classification c_i of individual i (atoms respected)."""
        return ClassPoint(tuple(tuple(evaluate(f, i) for f in row) for row in self.entries))

    def replace(self, changes: dict[tuple[int, int], PiecewiseFn]) -> "Profile":
        return Profile(tuple(
            tuple(changes.get((j, t), f) for t, f in enumerate(row))
            for j, row in enumerate(self.entries)
        ))

    def with_rows_swapped(self, j: int, k: int) -> "Profile":
        rows = list(self.entries)
        rows[j], rows[k] = rows[k], rows[j]
        return Profile(tuple(rows))

    @classmethod
    def lift(cls, point: ClassPoint) -> "Profile":
        """The constant profile in which every individual reports `point`."""
        return cls(tuple(tuple(PiecewiseFn.constant(v) for v in row) for row in point.values))

    def to_spec(self) -> ProfileSpec:
        return ProfileSpec(
            m=self.m,
            p=self.p,
            objects=[ObjectSpec(types=[f.to_spec() for f in row]) for row in self.entries],
        )

    def to_dict(self) -> dict:
        return self.to_spec().model_dump()

    @classmethod
    def from_spec(cls, spec: ProfileSpec) -> "Profile":
        if len(spec.objects) != spec.m or any(len(o.types) != spec.p for o in spec.objects):
            raise ArgumentError(f"Profile JSON does not match its declared shape {spec.m}x{spec.p}")
        return cls(tuple(tuple(PiecewiseFn.from_spec(f) for f in o.types) for o in spec.objects))


def _identity_violation(total: PiecewiseFn, tol: float) -> Optional[tuple[float, float]]:
    """Location and value where `total` is not identically 1, or None."""
    for lo, hi, coeffs in total.intervals():
        deviation = (coeffs[0] - 1.0,) + coeffs[1:]
        if max(abs(c) for c in deviation) > tol:
            mid = 0.5 * (lo + hi)
            return mid, total.piece_value(mid)
    for q, v in total.atoms:
        if abs(v - 1.0) > tol:
            return q, v
    return None


def validate_profile(c: Profile, tol: float = TOLERANCE) -> ValidationReport:
    """Check both model constraints at every individual, atoms included."""
    if c.m < 2 or c.p < 2 or c.p > c.m:
        return ValidationReport(False, "shape", observed=float(c.p))

    for j, row in enumerate(c.entries):
        for t, f in enumerate(row):
            lo, hi = range_bounds(f)
            if lo < -tol or hi > 1.0 + tol:
                location, value = lowest_point(f) if lo < -tol else (None, hi)
                return ValidationReport(False, "entry_range", j, t, location, value)

    for j, row in enumerate(c.entries):
        violation = _identity_violation(sum_functions(row), tol)
        if violation:
            return ValidationReport(False, "row_sum", j, None, *violation)

    for t in range(c.p):
        total = sum_functions(c.column(t))
        if c.m == c.p:
            # rows sum to 1 and there are as many rows as columns: every column is exactly 1
            violation = _identity_violation(total, tol)
            if violation:
                return ValidationReport(False, "column_sum_identity", None, t, *violation)
        else:
            location, value = lowest_point(total)
            if value < 1.0 - tol:
                return ValidationReport(False, "column_sum", None, t, location, value)
    return PASS


def unit_row(p: int, k: int) -> tuple[float, ...]:
    return tuple(1.0 if t == k else 0.0 for t in range(p))


def example1_profile() -> Profile:
    """The six-object, three-type worked example."""
    third, two_thirds = 1.0 / 3.0, 2.0 / 3.0
    x1 = (
        PiecewiseFn.polynomial([0.0, two_thirds]),
        PiecewiseFn.constant(third),
        PiecewiseFn.polynomial([two_thirds, -two_thirds]),
    )
    x2 = (
        PiecewiseFn.polynomial([1.0, -3.0, 3.0, -1.0]),
        PiecewiseFn.polynomial([0.0, 3.0, -3.0]),
        PiecewiseFn.polynomial([0.0, 0.0, 0.0, 1.0]),
    )
    x3 = (
        PiecewiseFn.constant(0.0, [(0.0, 1.0)]),
        PiecewiseFn.constant(1.0, [(0.0, 0.0), (1.0, 0.0)]),
        PiecewiseFn.constant(0.0, [(1.0, 1.0)]),
    )
    units = tuple(tuple(PiecewiseFn.constant(v) for v in unit_row(3, k)) for k in range(3))
    return Profile((x1, x2, x3) + units)


def indicator_probe_profile(m: int, p: int, t: int, interval: Optional[tuple[float, float]]) -> Profile:
    """Probe in which x_1 reports e_t on J and e_1 elsewhere.

    The other objects are constants completing a valid profile: with a spare
    object they list e_1..e_p (then e_1); when m == p, x_2 mirrors x_1 and the
    rest cover the remaining types one each.
    """
    _check_shape(m, p)
    if not 1 <= t < p:
        raise ArgumentError(f"Probe type must contrast with type 0, got t={t}")
    ind = PiecewiseFn.constant(0.0) if interval is None else PiecewiseFn.indicator(*interval)
    one = PiecewiseFn.constant(1.0)
    zero = PiecewiseFn.constant(0.0)
    co_ind = combine([(1.0, one), (-1.0, ind)])

    def probe_row(on_contrast: PiecewiseFn, on_base: PiecewiseFn) -> tuple[PiecewiseFn, ...]:
        return tuple(on_base if s == 0 else on_contrast if s == t else zero for s in range(p))

    def constant_row(k: int) -> tuple[PiecewiseFn, ...]:
        return tuple(PiecewiseFn.constant(v) for v in unit_row(p, k))

    rows = [probe_row(ind, co_ind)]
    if m >= p + 1:
        rows += [constant_row(k) for k in range(p)]
        rows += [constant_row(0) for _ in range(m - p - 1)]
    else:
        rows.append(probe_row(co_ind, ind))
        rows += [constant_row(k) for k in range(1, p) if k != t]
    return Profile(tuple(rows))


# Constant base points


def uniform_point(m: int, p: int) -> ClassPoint:
    _check_shape(m, p)
    return ClassPoint(tuple(tuple(1.0 / p for _ in range(p)) for _ in range(m)))


def pinned_point(m: int, p: int, x: int, t: int, h: float) -> ClassPoint:
    """Valid constant point with entry (x, t) equal to h; every column sums to m/p."""
    _check_shape(m, p)
    if not 0.0 <= h <= 1.0:
        raise ArgumentError(f"Pinned value {h} outside [0, 1]")
    rows = []
    other_t = (m / p - h) / (m - 1)
    for j in range(m):
        own = h if j == x else other_t
        rest = (1.0 - own) / (p - 1)
        rows.append(tuple(own if s == t else rest for s in range(p)))
    return ClassPoint(tuple(rows))


def column_point(m: int, p: int, t: int, h: float) -> ClassPoint:
    """Valid constant point whose column t sums to h."""
    _check_shape(m, p)
    if not 1.0 <= h <= m - p + 1:
        raise ArgumentError(f"Column sum {h} infeasible for m={m}, p={p} (need 1 <= h <= {m - p + 1})")
    own = h / m
    rest = (1.0 - own) / (p - 1)
    return ClassPoint(tuple(tuple(own if s == t else rest for s in range(p)) for _ in range(m)))


# Perturbations


def random_bump(rng: np.random.Generator, pieces: int, amplitude: float, positive: bool = False) -> PiecewiseFn:
    """Piecewise quadratic with sup-norm `amplitude` on `pieces` equal intervals."""
    breakpoints = [k / pieces for k in range(pieces + 1)]
    coeffs = []
    for lo, hi in zip(breakpoints, breakpoints[1:]):
        values = rng.uniform(0.6, 1.0, 3) if positive else rng.uniform(-1.0, 1.0, 3)
        fit = Polynomial.fit([lo, 0.5 * (lo + hi), hi], values, 2).convert()
        coeffs.append(tuple(fit.coef))
    bump = PiecewiseFn(tuple(breakpoints), tuple(coeffs))
    lo, hi = range_bounds(bump)
    scale = max(abs(lo), abs(hi))
    if scale == 0.0 or amplitude == 0.0:
        return PiecewiseFn.constant(0.0)
    return combine([(amplitude / scale, bump)])


class _Perturber:
    """Applies constraint-preserving moves to a mutable grid of entries.

    A rectangle move adds g at (j, s) and (k, u) and subtracts it at (j, u) and
    (k, s): every row and column sum is unchanged pointwise. A row move adds g
    at (j, s) and subtracts it at (j, u), which needs slack in both columns.
    """

    def __init__(self, base: Profile, frozen: Iterable[tuple[int, int]] = ()):
        self.grid = [list(row) for row in base.entries]
        self.m, self.p = base.m, base.p
        self.frozen = set(frozen)

    def profile(self) -> Profile:
        return Profile(tuple(tuple(row) for row in self.grid))

    def _entry_room(self, j: int, t: int, sign: int) -> float:
        lo, hi = range_bounds(self.grid[j][t])
        if sign > 0:
            return 1.0 - hi
        if sign < 0:
            return lo
        return min(lo, 1.0 - hi)

    def _column_room(self, t: int) -> float:
        return range_bounds(sum_functions(row[t] for row in self.grid))[0] - 1.0

    def _apply(self, signed_cells: Sequence[tuple[int, int, int]], g: PiecewiseFn):
        for j, t, sign in signed_cells:
            self.grid[j][t] = combine([(1.0, self.grid[j][t]), (float(sign), g)])

    def rectangle(self, j: int, k: int, s: int, u: int, bump: PiecewiseFn, one_signed: bool = False) -> bool:
        cells = [(j, s, 1), (k, u, 1), (j, u, -1), (k, s, -1)]
        return self._move(cells, bump, one_signed, columns=())

    def row_move(self, j: int, s: int, u: int, bump: PiecewiseFn) -> bool:
        return self._move([(j, s, 1), (j, u, -1)], bump, False, columns=(s, u))

    def _move(self, cells, bump: PiecewiseFn, one_signed: bool, columns: Sequence[int]) -> bool:
        if any((j, t) in self.frozen for j, t, _ in cells):
            return False
        lo, hi = range_bounds(bump)
        size = max(abs(lo), abs(hi))
        if size == 0.0:
            return False
        room = min(self._entry_room(j, t, sign if one_signed else 0) for j, t, sign in cells)
        for t in columns:
            room = min(room, self._column_room(t))
        scale = min(1.0, MOVE_SAFETY * room / size)
        if scale * size < MIN_MOVE:
            return False
        self._apply(cells, combine([(scale, bump)]))
        return True

    def random_moves(self, rng: np.random.Generator, count: int, pieces: int, amplitude: float,
                     keep_columns: Sequence[int] = (), touch_row: Optional[int] = None):
        """Apply `count` random moves; row moves never involve `keep_columns`."""
        if amplitude <= 0.0:
            return
        for n in range(count):
            bump = random_bump(rng, pieces, amplitude)
            s, u = (int(v) for v in rng.choice(self.p, 2, replace=False))
            j, k = (int(v) for v in rng.choice(self.m, 2, replace=False))
            if n == 0 and touch_row is not None and touch_row not in (j, k):
                j = touch_row
            if rng.random() < 0.5 and self.m > self.p and s not in keep_columns and u not in keep_columns:
                self.row_move(j, s, u, bump)
            else:
                self.rectangle(j, k, s, u, bump)


def _validate_generator_args(m: int, p: int, pieces: int, amplitude: float):
    _check_shape(m, p)
    if pieces < 1:
        raise ArgumentError(f"Need at least one piece, got {pieces}")
    if amplitude < 0.0:
        raise ArgumentError(f"Amplitude must be non-negative, got {amplitude}")


def random_profile(seed: int, m: int, p: int, pieces: int = 3, amplitude: float = 0.1,
                   base: Optional[ClassPoint] = None) -> Profile:
    """Deterministic valid profile: a constant base plus constraint-preserving perturbations."""
    _validate_generator_args(m, p, pieces, amplitude)
    rng = make_rng(seed, "random_profile", m, p, pieces)
    perturber = _Perturber(Profile.lift(base or uniform_point(m, p)))
    perturber.random_moves(rng, m * p, pieces, amplitude)
    return perturber.profile()


def constant_column_profile(seed: int, m: int, p: int, t: int, h: float,
                            amplitude: float = 0.1, pieces: int = 3) -> Profile:
    """Valid profile whose column t sums to h at every individual."""
    _validate_generator_args(m, p, pieces, amplitude)
    rng = make_rng(seed, "constant_column", m, p, t, h)
    perturber = _Perturber(Profile.lift(column_point(m, p, t, h)))
    perturber.random_moves(rng, m * p, pieces, amplitude, keep_columns=(t,))
    return perturber.profile()


def pinned_profile(seed: int, m: int, p: int, x: int, t: int, h: float,
                   amplitude: float = 0.1, pieces: int = 3) -> Profile:
    """Valid profile with entry (x, t) identically h and the rest perturbed."""
    _validate_generator_args(m, p, pieces, amplitude)
    rng = make_rng(seed, "pinned", m, p, x, t, h)
    perturber = _Perturber(Profile.lift(pinned_point(m, p, x, t, h)), frozen=[(x, t)])
    perturber.random_moves(rng, m * p, pieces, amplitude, touch_row=x)
    return perturber.profile()


def inject_point_rectangle(c: Profile, q: float, x: int, y: int, t: int, u: int,
                           value: Optional[float] = None) -> Profile:
    """Raise entry (x, t) at the single individual q, compensating on (x, u), (y, t), (y, u).

    Both constraints keep holding at q. Returns c unchanged if there is no room.
    """
    here = c.at(q).values
    room = min(here[x][u], here[y][t], 1.0 - here[x][t], 1.0 - here[y][u])
    v = room if value is None else min(value, room)
    if v <= 0.0:
        return c
    changes = {
        (x, t): c.entry(x, t).with_atoms([(q, here[x][t] + v)]),
        (x, u): c.entry(x, u).with_atoms([(q, here[x][u] - v)]),
        (y, t): c.entry(y, t).with_atoms([(q, here[y][t] - v)]),
        (y, u): c.entry(y, u).with_atoms([(q, here[y][u] + v)]),
    }
    return c.replace(changes)


def agreeing_pair(seed: int, j: int, m: int = 6, p: int = 3, with_atoms: bool = False,
                  amplitude: float = 0.02, flip_amplitude: float = 0.15,
                  pieces: int = 3) -> tuple[Profile, Profile]:
    """Two valid profiles whose rows for object j agree a.e.

    The profiles differ on two other objects by a positive rectangle move of
    opposite signs. With `with_atoms` the second profile's row j also gets a
    point override, so the rows agree only almost everywhere. For m = 2 no two
    other objects exist and only the atom difference remains.
    """
    _validate_generator_args(m, p, pieces, amplitude)
    if not 0 <= j < m:
        raise ArgumentError(f"Object index {j} outside 0..{m - 1}")
    rng = make_rng(seed, "agreeing_pair", m, p, j, with_atoms)
    perturber = _Perturber(Profile.lift(uniform_point(m, p)))
    perturber.random_moves(rng, m * p, pieces, amplitude, touch_row=j)
    base = perturber.profile()

    others = [k for k in range(m) if k != j]
    first, second = base, base
    if len(others) >= 2:
        k, l = others[0], others[1]
        u = 1 + int(rng.integers(p - 1))
        bump = random_bump(rng, pieces, flip_amplitude, positive=True)
        room = min(
            min(lo, 1.0 - hi)
            for lo, hi in (range_bounds(base.entry(r, s)) for r in (k, l) for s in (0, u))
        )
        lo, hi = range_bounds(bump)
        bump = combine([(min(1.0, MOVE_SAFETY * room / hi), bump)])
        cells = [(k, 0, 1), (l, u, 1), (k, u, -1), (l, 0, -1)]
        first = base.replace({(r, s): combine([(1.0, base.entry(r, s)), (sg, bump)]) for r, s, sg in cells})
        second = base.replace({(r, s): combine([(1.0, base.entry(r, s)), (-sg, bump)]) for r, s, sg in cells})
    else:
        logger.debug(f"agreeing_pair: m={m} leaves no room to differ off row {j}")

    if with_atoms:
        q = float(rng.choice([0.0, 1.0]))
        t, u = (int(v) for v in rng.choice(p, 2, replace=False))
        second = inject_point_rectangle(second, q, j, others[0], t, u)
    return first, second


def separating_profile(m: int, p: int, offsets: Sequence[float]) -> Profile:
    """Profile constant on each of len(offsets) equal cells, tilting x_1 and x_2 by offsets[k]."""
    _check_shape(m, p)
    n = len(offsets)
    if any(abs(d) > 1.0 / p for d in offsets):
        raise ArgumentError("Separating offsets must not exceed 1/p in magnitude")
    breakpoints = [k / n for k in range(n + 1)]
    base = 1.0 / p

    def tilt(sign: float) -> PiecewiseFn:
        return PiecewiseFn.step(breakpoints, [base + sign * d for d in offsets])

    flat = PiecewiseFn.constant(base)
    rows = []
    for j in range(m):
        if j < 2:
            sign = 1.0 if j == 0 else -1.0
            rows.append(tuple(tilt(sign) if s == 0 else tilt(-sign) if s == 1 else flat for s in range(p)))
        else:
            rows.append(tuple(flat for _ in range(p)))
    return Profile(tuple(rows))


def swap_profile(c: Profile, start: float, length: float, shift: float) -> Profile:
    """Apply the same block swap to every entry (every object, every type)."""
    return Profile(tuple(tuple(swap_blocks(f, start, length, shift) for f in row) for row in c.entries))
