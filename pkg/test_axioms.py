"""Tests for the sampled axiom checkers, suites and counterexample matrices."""
import json

import pytest

from fcaf.aggregators import (
    ANONYMITY,
    AXIOMS,
    COHERENCE,
    INDEPENDENCE,
    NON_DICTATORSHIP,
    OPTIMALITY,
    SYMMETRY,
    UNANIMITY,
    ZERO_UNANIMITY,
    dictator,
    gallery,
    lean_switch,
    odd_h_mean,
    swapped_dictator,
    vertex_or_uniform,
    weighted_mean,
)
from fcaf.axioms import (
    ATOMS_VARIANT,
    FAIL,
    PASS,
    check_anonymity,
    check_coherence,
    check_independence,
    check_non_dictatorship,
    check_optimality,
    check_symmetry,
    check_unanimity,
    check_zero_unanimity,
    claims_match,
    implication_matrix,
    implication_violations,
    observed_axioms,
    counterexample_matrix,
    recheck,
    run_suite,
)
from fcaf.errors import ArgumentError
from fcaf.measure import Measure, mixture

SEED = 20240917
PROBES = 10
GRID_N = 16
TOL = 1e-9


class TestOptimality:

    def test_weighted_mean_passes(self, cubic_weight):
        assert check_optimality(weighted_mean(cubic_weight), SEED, PROBES).passed

    def test_dictator_passes(self):
        assert check_optimality(dictator(0.5), SEED, PROBES).passed

    def test_nonoptimal_fails_with_column_witness(self):
        alpha = vertex_or_uniform()
        report = check_optimality(alpha, SEED, PROBES)
        assert report.verdict == FAIL
        assert report.probes == 1
        assert report.witness.kind == "column"
        assert report.witness.expected == 4.0
        assert recheck(alpha, report) > TOL


class TestIndependence:

    def test_lebesgue_mean_passes_both_variants(self, lebesgue):
        report = check_independence(weighted_mean(lebesgue), SEED, PROBES)
        assert report.passed
        assert report.variants[ATOMS_VARIANT].passed

    def test_nonindependent_fails(self):
        alpha = lean_switch()
        report = check_independence(alpha, SEED, PROBES)
        assert report.verdict == FAIL
        assert recheck(alpha, report) > TOL

    def test_nonzerounanimous_fails(self):
        report = check_independence(swapped_dictator(), SEED, PROBES)
        assert report.verdict == FAIL
        assert report.witness.kind == "pair"

    def test_endpoint_dictator_sees_atoms(self):
        report = check_independence(dictator(0.0), SEED, 20)
        assert report.passed
        assert report.variants[ATOMS_VARIANT].verdict == FAIL


class TestSymmetry:

    def test_weighted_mean_passes(self, cubic_weight):
        assert check_symmetry(weighted_mean(cubic_weight), SEED, PROBES).passed

    def test_dictator_passes(self):
        assert check_symmetry(dictator(0.3), SEED, PROBES).passed

    def test_nonzerounanimous_fails(self):
        assert check_symmetry(swapped_dictator(), SEED, PROBES).verdict == FAIL


class TestUnanimity:

    def test_weighted_mean_passes(self, cubic_weight):
        alpha = weighted_mean(cubic_weight)
        assert check_zero_unanimity(alpha, SEED, PROBES).passed
        assert check_unanimity(alpha, SEED, PROBES).passed

    def test_nonzerounanimous_fails_zero_unanimity(self):
        report = check_zero_unanimity(swapped_dictator(), SEED, PROBES)
        assert report.verdict == FAIL
        assert report.witness.expected == 0.0

    def test_cube_is_zero_unanimous_only(self):
        alpha = odd_h_mean("cube")
        assert check_zero_unanimity(alpha, SEED, PROBES).passed
        report = check_unanimity(alpha, SEED, PROBES)
        assert report.verdict == FAIL
        assert report.witness.kind == "target"
        assert report.witness.expected == 0.75
        assert report.witness.observed == pytest.approx(9.0 / 16.0)
        assert recheck(alpha, report) == pytest.approx(3.0 / 16.0)

    def test_nonoptimal_fails_unanimity(self):
        assert check_unanimity(vertex_or_uniform(), SEED, PROBES).verdict == FAIL


class TestCoherence:

    def test_lebesgue_mean_passes(self, lebesgue):
        assert check_coherence(weighted_mean(lebesgue), SEED, PROBES).passed

    def test_mixture_mean_passes(self, lebesgue):
        assert check_coherence(weighted_mean(mixture(lebesgue, Measure.dirac(0.7), 0.5)), SEED, PROBES).passed

    def test_endpoint_dictator_fails_on_atoms(self):
        alpha = dictator(0.0)
        report = check_coherence(alpha, SEED, PROBES)
        assert report.verdict == FAIL
        assert report.witness.kind == "bounds"
        assert report.witness.deviation == pytest.approx(1.0 / 3.0)
        assert recheck(alpha, report) > TOL

    def test_cube_fails(self):
        assert check_coherence(odd_h_mean("cube"), SEED, PROBES).verdict == FAIL


class TestNonDictatorship:

    def test_lebesgue_mean_passes(self, lebesgue):
        assert check_non_dictatorship(weighted_mean(lebesgue), SEED, GRID_N).passed

    @pytest.mark.parametrize("alpha", [dictator(0.3), weighted_mean(Measure.dirac(0.3))], ids=lambda a: a.name)
    def test_point_reader_is_located(self, alpha):
        report = check_non_dictatorship(alpha, SEED, GRID_N)
        assert report.verdict == FAIL
        low, high = report.witness.cell
        assert low <= 0.3 <= high
        assert recheck(alpha, report) <= TOL

    def test_endpoint_dictator(self):
        report = check_non_dictatorship(dictator(0.0), SEED, GRID_N)
        assert report.witness.cell == (0.0, 1.0 / GRID_N)

    def test_rejects_tiny_grid(self, lebesgue):
        with pytest.raises(ArgumentError):
            check_non_dictatorship(weighted_mean(lebesgue), SEED, 1)


class TestAnonymity:

    def test_lebesgue_mean_passes(self, lebesgue):
        assert check_anonymity(weighted_mean(lebesgue), SEED, PROBES, grid_n=GRID_N).passed

    def test_weighted_mean_fails(self, cubic_weight):
        alpha = weighted_mean(cubic_weight)
        report = check_anonymity(alpha, SEED, PROBES, grid_n=GRID_N)
        assert report.verdict == FAIL
        assert recheck(alpha, report) > TOL

    def test_dictator_fails(self):
        assert check_anonymity(dictator(0.3), SEED, PROBES, grid_n=GRID_N).verdict == FAIL


class TestSuites:

    @pytest.mark.parametrize("alpha", [
        weighted_mean(Measure.lebesgue()),
        dictator(0.3),
        vertex_or_uniform(),
        odd_h_mean("cube"),
    ], ids=lambda a: a.name)
    def test_claims_match(self, alpha):
        reports = run_suite(alpha, SEED, PROBES, GRID_N, TOL)
        assert [r.axiom for r in reports] == list(AXIOMS)
        assert claims_match(alpha, reports)

    def test_lebesgue_mean_passes_everything(self, lebesgue):
        reports = run_suite(weighted_mean(lebesgue), SEED, PROBES, GRID_N, TOL)
        assert observed_axioms(reports) == frozenset(AXIOMS)

    def test_subset_of_axioms(self):
        reports = run_suite(dictator(0.3), SEED, PROBES, GRID_N, TOL, axioms=(OPTIMALITY, NON_DICTATORSHIP))
        assert [r.axiom for r in reports] == [OPTIMALITY, NON_DICTATORSHIP]
        assert reports[1].verdict == FAIL
        assert claims_match(dictator(0.3), reports)

    def test_deterministic(self):
        first = [r.to_dict() for r in run_suite(lean_switch(), SEED, 5, GRID_N, TOL)]
        second = [r.to_dict() for r in run_suite(lean_switch(), SEED, 5, GRID_N, TOL)]
        assert json.dumps(first, sort_keys=True) == json.dumps(second, sort_keys=True)

    def test_reports_serialise(self):
        for report in run_suite(dictator(0.0), SEED, 3, GRID_N, TOL):
            json.dumps(report.to_dict())


class TestImplications:

    def test_violation_detection(self):
        verdicts = {SYMMETRY: PASS, INDEPENDENCE: FAIL, UNANIMITY: PASS, ZERO_UNANIMITY: PASS}
        assert implication_violations("a", verdicts) == [("a", SYMMETRY, INDEPENDENCE)]

    def test_gallery_respects_implications(self):
        report = implication_matrix(gallery(), SEED, 5, GRID_N, TOL)
        assert report.ok
        assert set(report.verdicts) == {a.name for a in gallery()}
        assert report.verdicts["weighted_mean[lebesgue]"][ANONYMITY] == PASS
        assert report.verdicts["odd_h_mean[cube]"][COHERENCE] == FAIL


@pytest.fixture(scope="module")
def rows():
    return {r.aggregator: r for r in counterexample_matrix(SEED, PROBES, GRID_N, TOL)}


class TestCounterexamples:

    def test_every_counterexample_fails_its_axiom(self, rows):
        assert len(rows) == 4
        assert all(r.fails_designated for r in rows.values())

    def test_designations(self, rows):
        assert rows["vertex_or_uniform"].designated == OPTIMALITY
        assert rows["lean_switch"].designated == INDEPENDENCE
        assert rows["swapped_dictator"].designated == ZERO_UNANIMITY
        assert rows["dictator(0)"].designated == NON_DICTATORSHIP

    def test_single_axiom_violators(self, rows):
        assert rows["dictator(0)"].passes_others
        assert rows["lean_switch"].passes_others

    def test_extra_failures_are_reported(self, rows):
        assert rows["vertex_or_uniform"].verdicts[ZERO_UNANIMITY] == FAIL
        assert rows["swapped_dictator"].verdicts[INDEPENDENCE] == FAIL
        assert not rows["vertex_or_uniform"].passes_others


def test_recheck_needs_a_witness(lebesgue):
    report = check_optimality(weighted_mean(lebesgue), SEED, 2)
    with pytest.raises(ArgumentError):
        recheck(weighted_mean(lebesgue), report)
