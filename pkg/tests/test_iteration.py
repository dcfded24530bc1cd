"""Iterated solves, subsequence selection, limits, and annihilation numbers."""

import numpy as np
import pytest

from minvec import (HypothesisViolatedError, InjectivityError,
                    InvalidProblemError, NormKind, SubsequencePlan,
                    alpha_sequence, check_quasinilpotence_contrapositive,
                    commutant_sample, norming_setup, estimate_g, estimate_limits,
                    estimate_w, jordan_shift, operator_norm, run_trace,
                    select_subsequence, vector_norm, verify_annihilation,
                    volterra, weighted_shift)

EPS_FRACTION = 3.0


def _identity_op(n=5):
    return weighted_shift(n, np.zeros(n - 1), eta=1.0)


@pytest.fixture(scope="module")
def volterra_trace():
    op = volterra(8)
    x0 = norming_setup(op).x0
    return run_trace(op, x0, epsilon=1.0 / 3.0, count=6)


@pytest.fixture(scope="module")
def volterra_plan(volterra_trace):
    return select_subsequence(volterra_trace, rho=0.5)


@pytest.fixture(scope="module")
def unit_commutant(volterra_trace):
    op = volterra_trace.operator
    scale = 1.0 / operator_norm(op.matrix, NormKind.L2)
    return commutant_sample(op, (0.0, scale))


def test_identity_trace_is_flat():
    op = _identity_op()
    x0 = np.ones(5) / np.sqrt(5.0)
    trace = run_trace(op, x0, epsilon=1.0 / 3.0, count=4)
    d = vector_norm(x0, NormKind.L2) - 1.0 / 3.0
    for rec in trace.records:
        assert rec.min_norm == pytest.approx(d, rel=1e-9)
    assert all(r == pytest.approx(1.0, rel=1e-9) for r in trace.ratios)
    assert trace.record_for_power(3).power == 3


def test_trace_needs_two_powers():
    with pytest.raises(InvalidProblemError):
        run_trace(_identity_op(), np.ones(5), epsilon=0.3, count=1)


def test_trace_names_the_failing_power():
    op = jordan_shift(6, eta=0.05)
    x0 = np.ones(6)
    with pytest.raises(InjectivityError, match=r"trace failed at power \d"):
        run_trace(op, x0, epsilon=vector_norm(x0, NormKind.L2) / 3.0, count=8)


def test_volterra_ratios_shrink(volterra_trace):
    ratios = volterra_trace.ratios
    assert len(ratios) == 5
    assert ratios[-1] < ratios[0]
    # d_n grows as the powers contract, so the ratios stay below one
    assert all(r < 1.0 for r in ratios)


def test_subsequence_plan_decays_geometrically(volterra_trace, volterra_plan):
    plan = volterra_plan
    assert plan.decaying
    assert plan.length >= 2
    for a, b in zip(plan.achieved_ratios, plan.achieved_ratios[1:]):
        assert b <= 0.5 * a
    assert all(n in [r.power for r in volterra_trace.records] for n in plan.indices)


def test_subsequence_plan_for_the_identity_is_flagged():
    op = _identity_op()
    trace = run_trace(op, np.ones(5) / np.sqrt(5.0), epsilon=0.2, count=4)
    plan = select_subsequence(trace, rho=0.5)
    assert not plan.decaying
    assert plan.length <= 1


def test_subsequence_rho_validation(volterra_trace):
    with pytest.raises(InvalidProblemError):
        select_subsequence(volterra_trace, rho=1.5)


def test_contrapositive_on_the_identity():
    op = _identity_op()
    trace = run_trace(op, np.ones(5) / np.sqrt(5.0), epsilon=0.2, count=4)
    report = check_quasinilpotence_contrapositive(trace, delta=0.5)
    assert report.hypothesis_holds and not report.vacuous
    assert report.passed
    assert len(report.norms) == len(trace.records)
    for norm_n, bound_n in zip(report.norms, report.bounds):
        assert norm_n >= bound_n - 1e-9


def test_contrapositive_is_vacuous_when_a_ratio_dips(volterra_trace):
    delta = 2.0 * max(volterra_trace.ratios)
    report = check_quasinilpotence_contrapositive(volterra_trace, delta=delta)
    assert report.vacuous and not report.hypothesis_holds
    assert report.passed


def test_estimate_w_certifies_the_ball_condition(volterra_trace, volterra_plan,
                                                 unit_commutant):
    est = estimate_w(volterra_trace, volterra_plan, unit_commutant)
    kx0 = unit_commutant.matrix @ volterra_trace.x0
    expected = vector_norm(kx0, NormKind.L2) - (1.0 / 3.0) * unit_commutant.op_norm
    assert est.lower_bound == pytest.approx(expected, rel=1e-9)
    assert est.lower_bound > 0.0
    assert len(est.iterates) == volterra_plan.length
    np.testing.assert_array_equal(est.w, est.iterates[-1])
    assert vector_norm(est.w, NormKind.L2) > 0.0


def test_estimate_w_rejects_a_bad_center(unit_commutant):
    op = volterra(8)
    x0 = np.zeros(8)
    x0[7] = 1.0  # ||K e_8|| is far below eps = 1/3
    trace = run_trace(op, x0, epsilon=1.0 / 3.0, count=3)
    plan = select_subsequence(trace, rho=0.9)
    with pytest.raises(HypothesisViolatedError):
        estimate_w(trace, plan, unit_commutant)


def test_estimate_w_rejects_an_expanding_commutant_element(volterra_trace,
                                                           volterra_plan):
    op = volterra_trace.operator
    big = commutant_sample(op, (0.0, 2.0 / operator_norm(op.matrix, NormKind.L2)))
    with pytest.raises(InvalidProblemError):
        estimate_w(volterra_trace, volterra_plan, big)


def test_estimate_w_needs_a_plan(volterra_trace, unit_commutant):
    empty = SubsequencePlan(indices=(), rho=0.5, achieved_ratios=(),
                            decaying=False)
    with pytest.raises(InvalidProblemError):
        estimate_w(volterra_trace, empty, unit_commutant)


def test_estimate_g_returns_a_unit_functional(volterra_trace, volterra_plan):
    est = estimate_g(volterra_trace, volterra_plan)
    assert est.g.norm == pytest.approx(1.0, rel=1e-9)
    assert est.g_x0 >= volterra_trace.epsilon - 1e-9
    assert set(est.cluster_powers) <= set(volterra_plan.indices)
    if est.low_confidence:
        assert len(est.cluster_powers) == 1
    else:
        assert est.cluster_diameter <= est.diameter_cap


def test_alpha_records_recompute(volterra_trace, volterra_plan, unit_commutant):
    op = volterra_trace.operator
    t_elem = commutant_sample(op, (0.0, 1.0))
    records = alpha_sequence(volterra_trace, volterra_plan, t_elem, unit_commutant)
    assert len(records) == volterra_plan.length
    x0_size = vector_norm(volterra_trace.x0, NormKind.L2)
    for rec in records:
        sol = volterra_trace.record_for_power(rec.power).solution
        prev = volterra_trace.record_for_power(rec.power - 1).solution
        adj = op.power(rec.power).T @ sol.functional.coefficients
        moved = t_elem.matrix @ (unit_commutant.matrix @ prev.minimizer)
        alpha = float(adj @ moved) / float(adj @ sol.minimizer)
        assert rec.alpha == pytest.approx(alpha, rel=1e-12)
        ratio = volterra_trace.record_for_power(rec.power).ratio
        assert rec.bound == pytest.approx(2.0 * t_elem.op_norm * ratio, rel=1e-12)
        assert rec.convergent == pytest.approx(abs(float(adj @ moved)), rel=1e-12)
        expected_env = abs(rec.alpha) * (x0_size + volterra_trace.epsilon)
        assert rec.envelope == pytest.approx(expected_env, rel=1e-12)


def test_annihilation_entries_and_envelopes(volterra_trace, volterra_plan,
                                            unit_commutant):
    limits = estimate_limits(volterra_trace, volterra_plan, unit_commutant)
    op = volterra_trace.operator
    samples = [commutant_sample(op, (1.0,)), commutant_sample(op, (0.0, 1.0))]
    report = verify_annihilation(volterra_trace, volterra_plan, limits, samples)
    assert report.qw_norm == pytest.approx(
        vector_norm(op.matrix @ limits.w, NormKind.L2), rel=1e-12)
    for entry, t_elem in zip(report.entries, samples):
        assert entry.label == t_elem.label
        expected = abs(float(limits.g.coefficients @ (t_elem.matrix @ (op.matrix @ limits.w))))
        assert entry.value == pytest.approx(expected, rel=1e-12, abs=1e-300)
        assert entry.envelope_ok
    assert report.entry("Q").label == "Q"
    with pytest.raises(KeyError):
        report.entry("missing")
