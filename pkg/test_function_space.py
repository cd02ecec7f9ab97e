"""Tests for piecewise polynomial functions with atom overrides."""
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fcaf.classification import example1_profile, validate_profile
from fcaf.errors import ArgumentError, DomainError
from fcaf.function_space import (
    PiecewiseFn,
    ae_equal,
    ess_bounds,
    evaluate,
    linear_combine,
    lowest_point,
    range_bounds,
    sum_functions,
    swap_blocks,
)
from fcaf.measure import Measure, integrate

coeff = st.integers(min_value=-8, max_value=8).map(lambda k: k / 8)
polys = st.lists(coeff, min_size=1, max_size=4).map(PiecewiseFn.polynomial)
points = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


class TestEvaluate:

    def test_polynomial_piece(self):
        assert evaluate(PiecewiseFn.polynomial([0.0, 2.0 / 3.0]), 0.75) == pytest.approx(0.5, abs=1e-15)

    def test_atom_overrides_piece(self):
        delta0 = PiecewiseFn.constant(0.0, [(0.0, 1.0)])
        assert evaluate(delta0, 0.0) == 1.0
        assert evaluate(delta0, 0.5) == 0.0

    def test_constant(self):
        assert evaluate(PiecewiseFn.constant(1.0), 0.3) == 1.0

    def test_last_piece_closed_at_one(self):
        f = PiecewiseFn.step([0.0, 0.5, 1.0], [0.2, 0.7])
        assert f(1.0) == 0.7
        assert f(0.5) == 0.7
        assert f(0.49) == 0.2

    @pytest.mark.parametrize("i", [-0.1, 1.5])
    def test_outside_domain(self, i):
        with pytest.raises(DomainError):
            evaluate(PiecewiseFn.constant(1.0), i)


class TestRepresentation:

    def test_breakpoints_must_cover_unit_interval(self):
        with pytest.raises(ArgumentError):
            PiecewiseFn((0.0, 0.5), ((1.0,),))

    def test_breakpoints_strictly_increasing(self):
        with pytest.raises(ArgumentError):
            PiecewiseFn((0.0, 0.5, 0.5, 1.0), ((1.0,), (1.0,), (1.0,)))

    def test_atoms_distinct(self):
        with pytest.raises(ArgumentError):
            PiecewiseFn.constant(0.0, [(0.5, 1.0), (0.5, 0.2)])

    def test_indicator_is_closed(self):
        ind = PiecewiseFn.indicator(0.25, 0.5)
        assert ind(0.25) == 1.0
        assert ind(0.5) == 1.0
        assert ind(0.51) == 0.0
        assert ind(0.2) == 0.0

    def test_degenerate_indicator_is_single_atom(self):
        ind = PiecewiseFn.indicator(0.0, 0.0)
        assert ind(0.0) == 1.0
        assert ess_bounds(ind) == (0.0, 0.0)

    def test_spec_round_trip(self):
        f = PiecewiseFn((0.0, 0.3, 1.0), ((0.1, 0.2), (0.5,)), ((0.3, 0.9),))
        assert PiecewiseFn.from_spec(f.to_spec()) == f


class TestAeEqual:

    def test_atoms_are_null(self):
        f = PiecewiseFn.polynomial([0.0, 1.0])
        assert ae_equal(f, f.with_atoms([(0.5, 0.9)]), 1e-9)

    def test_different_functions(self):
        assert not ae_equal(PiecewiseFn.polynomial([0.0, 1.0]), PiecewiseFn.polynomial([0.0, 0.0, 1.0]), 1e-9)

    def test_refinement_is_transparent(self):
        split = PiecewiseFn((0.0, 0.5, 1.0), ((0.0, 1.0), (0.0, 1.0)))
        assert ae_equal(PiecewiseFn.polynomial([0.0, 1.0]), split, 1e-9)

    @given(polys)
    def test_reflexive(self, f):
        assert ae_equal(f, f, 0.0)


class TestLinearCombine:

    def test_coefficients_add(self):
        g = linear_combine(1.0, PiecewiseFn.polynomial([0.0, 2.0 / 3.0]), 1.0, PiecewiseFn.constant(1.0 / 3.0))
        assert g.pieces[0] == pytest.approx((1.0 / 3.0, 2.0 / 3.0))

    def test_pieces_combine_per_interval(self):
        f = PiecewiseFn.step([0.0, 0.5, 1.0], [0.25, 0.75])
        g = PiecewiseFn.polynomial([0.0, 1.0])
        h = linear_combine(2.0, f, -1.0, g)
        assert h.breakpoints == (0.0, 0.5, 1.0)
        assert h.pieces[0] == pytest.approx((0.5, -1.0))
        assert h.pieces[1] == pytest.approx((1.5, -1.0))
        assert h(0.25) == pytest.approx(0.25)
        assert h(0.75) == pytest.approx(0.75)

    def test_example_rows_sum_to_one(self):
        profile = example1_profile()
        for j in range(profile.m):
            total = sum_functions(profile.row(j))
            assert all(total(i) == pytest.approx(1.0) for i in (0.0, 0.3, 0.5, 1.0))
        assert validate_profile(profile).ok

    def test_cancellation_keeps_zero_atoms(self):
        f = PiecewiseFn.polynomial([0.2, 0.3], [(0.4, 0.9)])
        zero = linear_combine(1.0, f, -1.0, f)
        assert zero.atoms == ((0.4, 0.0),)
        assert all(zero(i) == 0.0 for i in (0.0, 0.4, 0.7, 1.0))

    def test_cubic_mixture(self):
        f = PiecewiseFn.polynomial([1.0, -3.0, 3.0, -1.0])
        g = PiecewiseFn.polynomial([0.0, 0.0, 0.0, 1.0])
        assert linear_combine(0.5, f, 0.5, g)(0.5) == pytest.approx(0.125, abs=1e-15)

    @given(st.floats(-2, 2), polys, st.floats(-2, 2), polys, points)
    def test_pointwise(self, a, f, b, g, i):
        expected = a * f(i) + b * g(i)
        assert abs(linear_combine(a, f, b, g)(i) - expected) <= 1e-12


class TestBounds:

    def test_critical_point(self):
        lo, hi = ess_bounds(PiecewiseFn.polynomial([0.0, 3.0, -3.0]))
        assert lo == pytest.approx(0.0, abs=1e-15)
        assert hi == pytest.approx(0.75)

    def test_atoms_ignored(self):
        assert ess_bounds(PiecewiseFn.constant(0.0, [(0.0, 1.0)])) == (0.0, 0.0)

    def test_monotone(self):
        assert ess_bounds(PiecewiseFn.polynomial([0.0, 1.0])) == (0.0, 1.0)

    def test_range_bounds_include_atoms(self):
        assert range_bounds(PiecewiseFn.constant(0.5, [(1.0, -0.25)])) == (-0.25, 0.5)

    def test_lowest_point_reports_location(self):
        location, value = lowest_point(PiecewiseFn.polynomial([0.25, -1.0, 1.0]))
        assert location == pytest.approx(0.5)
        assert value == pytest.approx(0.0, abs=1e-15)

    @given(polys, st.lists(st.tuples(points, st.floats(-5, 5)), max_size=3, unique_by=lambda a: a[0]))
    def test_atoms_do_not_move_essential_bounds(self, f, atoms):
        assert ess_bounds(f.with_atoms(atoms)) == ess_bounds(f)


class TestSwapBlocks:

    def test_linear_swap(self):
        g = swap_blocks(PiecewiseFn.polynomial([0.0, 1.0]), 0.0, 0.25, 0.5)
        assert g(0.1) == pytest.approx(0.6)
        assert g(0.6) == pytest.approx(0.1)
        assert g(0.4) == pytest.approx(0.4)

    def test_closed_block_ends(self):
        g = swap_blocks(PiecewiseFn.polynomial([0.0, 1.0]), 0.0, 0.25, 0.5)
        assert g(0.25) == pytest.approx(0.75)
        assert g(0.75) == pytest.approx(0.25)

    def test_double_swap_is_identity(self):
        f = PiecewiseFn.polynomial([0.0, 1.0])
        twice = swap_blocks(swap_blocks(f, 0.0, 0.25, 0.5), 0.0, 0.25, 0.5)
        assert ae_equal(f, twice, 1e-12)
        for i in (0.0, 0.1, 0.25, 0.6, 0.75, 1.0):
            assert twice(i) == pytest.approx(f(i), abs=1e-12)

    def test_constant_unchanged(self):
        g = swap_blocks(PiecewiseFn.constant(1.0), 0.125, 0.25, 0.5)
        assert all(g(i) == 1.0 for i in (0.0, 0.2, 0.375, 0.7, 0.875, 1.0))

    def test_atoms_travel_with_block(self):
        f = PiecewiseFn.constant(0.0, [(0.1, 1.0)])
        g = swap_blocks(f, 0.0, 0.25, 0.5)
        assert g(0.6) == 1.0
        assert g(0.1) == 0.0

    def test_negative_shift_swaps_left(self):
        f = PiecewiseFn.polynomial([0.0, 1.0])
        assert swap_blocks(f, 0.5, 0.25, -0.5)(0.6) == pytest.approx(0.1)

    @pytest.mark.parametrize("start,length,shift", [(0.0, 0.5, 0.25), (0.5, 0.25, 0.5), (0.0, -0.1, 0.5)])
    def test_invalid_blocks(self, start, length, shift):
        with pytest.raises(ArgumentError):
            swap_blocks(PiecewiseFn.constant(1.0), start, length, shift)

    @settings(max_examples=50)
    @given(polys, st.integers(0, 3), st.integers(1, 4), st.integers(5, 8))
    def test_preserves_lebesgue_integral(self, f, a, length, shift):
        start, length, shift = a / 16, length / 16, shift / 16
        if start + shift + length > 1.0:
            return
        lam = Measure.lebesgue()
        assert abs(integrate(lam, swap_blocks(f, start, length, shift)) - integrate(lam, f)) <= 1e-9
