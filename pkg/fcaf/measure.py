"""Probability measures on [0, 1]: a polynomial density plus finitely many point masses."""
import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import ArgumentError, DomainError
from .function_space import PiecewiseFn, common_refinement, combine, evaluate, ess_bounds
from .schemas import MassSpec, MeasureSpec

logger = logging.getLogger(__name__)

NORMALIZATION_TOL = 1e-12
DENSITY_TOL = 1e-9


def _antiderivative_between(coeffs: Sequence[float], lo: float, hi: float) -> float:
    anti = npoly.polyint(np.asarray(coeffs, dtype=float))
    return float(npoly.polyval(hi, anti) - npoly.polyval(lo, anti))


def density_mass(density: PiecewiseFn, upto: float = 1.0) -> float:
    """Integral of the density over [0, upto] (atoms of the density are null)."""
    total = 0.0
    for lo, hi, coeffs in density.intervals():
        if lo >= upto:
            break
        total += _antiderivative_between(coeffs, lo, min(hi, upto))
    return total


@dataclass(frozen=True)
class Measure:
    """Density-plus-atoms probability measure, validated on construction."""
    density: PiecewiseFn
    masses: tuple[tuple[float, float], ...] = field(default=())

    def __post_init__(self):
        masses = tuple(sorted((float(q), float(w)) for q, w in self.masses))
        points = [q for q, _ in masses]
        if len(set(points)) != len(points):
            raise ArgumentError(f"Mass points must be distinct, got {points}")
        for q, w in masses:
            if not 0.0 <= q <= 1.0:
                raise ArgumentError(f"Mass point {q} outside [0, 1]")
            if w < 0.0:
                raise ArgumentError(f"Negative mass {w} at {q}")

        low, _ = ess_bounds(self.density)
        if low < -DENSITY_TOL:
            raise ArgumentError(f"Density takes negative value {low}")

        total = density_mass(self.density) + sum(w for _, w in masses)
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise ArgumentError(f"Measure is not normalized: total mass {total!r}")

        object.__setattr__(self, "masses", masses)

    @classmethod
    def lebesgue(cls) -> "Measure":
        return cls(PiecewiseFn.constant(1.0))

    @classmethod
    def dirac(cls, point: float) -> "Measure":
        return cls(PiecewiseFn.constant(0.0), ((point, 1.0),))

    @classmethod
    def from_density(cls, density: PiecewiseFn) -> "Measure":
        return cls(density)

    @classmethod
    def power_weight(cls, k: int) -> "Measure":
        """Lebesgue-Stieltjes measure with density (k+1) i^k, e.g. 3i^2 for k=2."""
        coeffs = [0.0] * k + [float(k + 1)]
        return cls(PiecewiseFn.polynomial(coeffs))

    @property
    def is_dirac(self) -> bool:
        return len(self.masses) == 1 and self.masses[0][1] == 1.0

    @property
    def is_lebesgue(self) -> bool:
        return not self.masses and all(c == (1.0,) for c in self.density.pieces)

    def mass_at(self, point: float) -> float:
        return sum(w for q, w in self.masses if q == point)

    def to_spec(self) -> MeasureSpec:
        return MeasureSpec(
            density=self.density.without_atoms().to_spec(),
            masses=[MassSpec(point=q, mass=w) for q, w in self.masses],
        )

    @classmethod
    def from_spec(cls, spec: MeasureSpec) -> "Measure":
        return cls(
            PiecewiseFn.from_spec(spec.density),
            tuple((m.point, m.mass) for m in spec.masses),
        )


def integrate(mu: Measure, f: PiecewiseFn) -> float:
    """Integral of f against mu.

    The density part ignores the atoms of f; point masses read f pointwise,
    so an atom of f at a mass point is what the mass sees.
    """
    breakpoints, (f_coeffs, d_coeffs) = common_refinement(f, mu.density)
    total = 0.0
    for k, (fc, dc) in enumerate(zip(f_coeffs, d_coeffs)):
        if dc == (0.0,):
            continue
        product = npoly.polymul(np.asarray(fc), np.asarray(dc))
        total += _antiderivative_between(product, breakpoints[k], breakpoints[k + 1])
    for q, w in mu.masses:
        total += w * evaluate(f, q)
    return total


def cdf(mu: Measure, x: float) -> float:
    """mu([0, x])."""
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"CDF argument {x} outside [0, 1]")
    return density_mass(mu.density, x) + sum(w for q, w in mu.masses if q <= x)


def mixture(mu1: Measure, mu2: Measure, theta: float) -> Measure:
    """theta * mu1 + (1 - theta) * mu2."""
    if not 0.0 <= theta <= 1.0:
        raise ArgumentError(f"Mixture weight {theta} outside [0, 1]")
    density = combine([(theta, mu1.density.without_atoms()), (1.0 - theta, mu2.density.without_atoms())])
    merged: dict[float, float] = {}
    for weight, mu in ((theta, mu1), (1.0 - theta, mu2)):
        for q, w in mu.masses:
            merged[q] = merged.get(q, 0.0) + weight * w
    masses = tuple((q, w) for q, w in merged.items() if w > 0.0)
    return Measure(density, masses)


def measure_from_masses(masses: Iterable[tuple[float, float]]) -> Measure:
    """Purely atomic measure."""
    return Measure(PiecewiseFn.constant(0.0), tuple(masses))
