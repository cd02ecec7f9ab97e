"""Tests for the shipped aggregation rules."""
import pytest
from pydantic import ValidationError

from fcaf.aggregators import (
    ANONYMITY,
    AXIOMS,
    COHERENCE,
    NON_DICTATORSHIP,
    Fcaf,
    dictator,
    from_spec,
    gallery,
    lean_switch,
    odd_h_mean,
    per_type_mean,
    swapped_dictator,
    vertex_or_uniform,
    weighted_mean,
)
from fcaf.classification import ClassPoint, Profile, random_profile, uniform_point
from fcaf.errors import ArgumentError
from fcaf.measure import Measure
from fcaf.theorem_harness import EXAMPLE1_TABLE, constant_pair_profile

SEEDS = [1, 2, 3]


def test_worked_example_table(cubic_weight, example_profile):
    out = weighted_mean(cubic_weight)(example_profile)
    for row, expected in zip(out.values, EXAMPLE1_TABLE):
        assert row == pytest.approx(expected, abs=1e-12)


def test_worked_example_expected_rows():
    assert EXAMPLE1_TABLE[0] == pytest.approx((0.5, 1.0 / 3.0, 1.0 / 6.0))
    assert EXAMPLE1_TABLE[1] == pytest.approx((0.05, 0.45, 0.5))
    assert EXAMPLE1_TABLE[2] == pytest.approx((0.0, 1.0, 0.0))


def test_dirac_mean_of_first_object(example_profile):
    out = weighted_mean(Measure.dirac(0.25))(example_profile)
    assert out.row(0) == pytest.approx((1.0 / 6.0, 1.0 / 3.0, 0.5))


def test_mean_of_constant_profile(cubic_weight):
    point = uniform_point(6, 3)
    assert weighted_mean(cubic_weight)(Profile.lift(point)).max_difference(point) <= 1e-15


class TestDictator:

    def test_reads_atoms(self, example_profile):
        assert dictator(0.0)(example_profile).row(2) == (1.0, 0.0, 0.0)

    def test_interior(self, example_profile):
        assert dictator(0.5)(example_profile).row(1) == pytest.approx((0.125, 0.75, 0.125))

    @pytest.mark.parametrize("i", [0.0, 0.3, 1.0])
    def test_equals_dirac_mean(self, example_profile, i):
        for c in [example_profile] + [random_profile(s, 6, 3) for s in SEEDS]:
            assert dictator(i)(c) == weighted_mean(Measure.dirac(i))(c)

    def test_rejects_outside_interval(self):
        with pytest.raises(ArgumentError):
            dictator(1.5)

    def test_claims(self):
        assert NON_DICTATORSHIP not in dictator(0.3).claimed_axioms
        assert ANONYMITY not in dictator(0.3).claimed_axioms
        assert COHERENCE in dictator(0.3).claimed_axioms
        assert COHERENCE not in dictator(0.0).claimed_axioms


class TestCounterexampleRules:

    def test_nonoptimal_keeps_vertices(self, example_profile):
        out = vertex_or_uniform()(example_profile)
        assert out.row(3) == (1.0, 0.0, 0.0)
        assert out.row(2) == (1.0, 0.0, 0.0)
        assert out.row(0) == pytest.approx((1.0 / 3.0,) * 3)

    def test_nonoptimal_on_all_base_rows(self):
        rows = tuple((1.0, 0.0, 0.0) for _ in range(6))
        out = vertex_or_uniform()(Profile.lift(ClassPoint(rows)))
        assert out.values == rows

    def test_nonzerounanimous_swaps_first_two_rows(self, example_profile):
        out = swapped_dictator()(example_profile)
        assert out.row(0) == (1.0, 0.0, 0.0)
        assert out.row(1) == example_profile.at(0.0).row(0)

    def test_nonindependent_picks_first_individual(self, example_profile):
        assert lean_switch()(example_profile) == example_profile.at(0.0)

    def test_nonindependent_picks_last_individual(self, example_profile):
        swapped = example_profile.with_rows_swapped(0, 1)
        assert lean_switch()(swapped) == swapped.at(1.0)


class TestOddH:

    def test_cube_at_three_quarters(self):
        out = odd_h_mean("cube")(constant_pair_profile(0.75))
        assert out.values[0][0] == pytest.approx(9.0 / 16.0)

    @pytest.mark.parametrize("a", [0.0, 1.0])
    def test_cube_fixes_unanimous_values(self, a):
        out = odd_h_mean("cube")(constant_pair_profile(a))
        assert out.values[0][0] == a

    def test_linear_is_the_mean(self):
        assert odd_h_mean("linear")(constant_pair_profile(0.3)).values[0][0] == pytest.approx(0.3)

    def test_rejects_other_shapes(self, example_profile):
        with pytest.raises(ArgumentError):
            odd_h_mean("cube")(example_profile)

    def test_unknown_variant(self):
        with pytest.raises(ArgumentError):
            odd_h_mean("square")


class TestOutputValidity:

    @pytest.mark.parametrize("alpha", [
        a for a in gallery()
        if a.name not in ("vertex_or_uniform", "per_type_mean")
    ], ids=lambda a: a.name)
    def test_outputs_are_valid(self, alpha):
        m, p = alpha.shape
        for seed in SEEDS:
            assert alpha(random_profile(seed, m, p)).validate().ok


class TestFromSpec:

    def test_dictator(self):
        assert from_spec({"kind": "dictator", "i": 0.3}).name == "dictator(0.3)"

    def test_weighted_mean(self, cubic_weight, example_profile):
        spec = {"kind": "weighted_mean", "measure": cubic_weight.to_spec().model_dump()}
        out = from_spec(spec)(example_profile)
        assert out.row(1) == pytest.approx(EXAMPLE1_TABLE[1], abs=1e-12)

    def test_shape_override(self):
        assert from_spec({"kind": "vertex_or_uniform", "shape": [4, 2]}).shape == (4, 2)

    @pytest.mark.parametrize("kind,name", [
        ("prop2_nonoptimal", "vertex_or_uniform"),
        ("prop2_nonindependent", "lean_switch"),
        ("prop2_nonzerounanimous", "swapped_dictator"),
        ("vertex_or_uniform", "vertex_or_uniform"),
        ("lean_switch", "lean_switch"),
        ("swapped_dictator", "swapped_dictator"),
    ])
    def test_counterexample_kinds(self, kind, name, example_profile):
        alpha = from_spec({"kind": kind})
        assert alpha.name == name
        assert alpha(example_profile) == {a.name: a for a in gallery()}[name](example_profile)

    def test_counterexample_kind_keeps_shape(self):
        assert from_spec({"kind": "prop2_nonzerounanimous", "shape": [2, 2]}).shape == (2, 2)

    def test_odd_h_only_on_pairs(self):
        with pytest.raises(ArgumentError):
            from_spec({"kind": "odd_h_mean", "variant": "cube", "shape": [6, 3]})

    @pytest.mark.parametrize("spec", [
        {"kind": "nope"},
        {"kind": "dictator", "i": 0.3, "extra": 1},
        {"kind": "dictator"},
    ])
    def test_malformed(self, spec):
        with pytest.raises(ValidationError):
            from_spec(spec)


class TestClaims:

    def test_lebesgue_mean_claims_everything(self, lebesgue):
        assert weighted_mean(lebesgue).claimed_axioms == frozenset(AXIOMS)

    def test_weighted_mean_without_anonymity(self, cubic_weight):
        assert weighted_mean(cubic_weight).claimed_axioms == frozenset(AXIOMS) - {ANONYMITY}

    def test_unknown_claim_rejected(self):
        with pytest.raises(ArgumentError):
            Fcaf("bad", lambda c: c.at(0.0), frozenset({"fairness"}))

    def test_per_type_mean_needs_one_measure_per_contrast_type(self, lebesgue):
        with pytest.raises(ArgumentError):
            per_type_mean([lebesgue])

    def test_gallery_names_are_unique(self):
        names = [a.name for a in gallery()]
        assert len(names) == len(set(names)) == 13
