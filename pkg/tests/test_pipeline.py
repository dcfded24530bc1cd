"""Staged scenario execution and its uniform check records."""

import numpy as np
import pytest

from minvec import (SolverError, operator_from_matrix, parse_scenario,
                    run_pipeline, volterra)

CHECK_KEYS = {"name", "value", "tolerance", "passed", "detail"}


def _volterra16():
    return parse_scenario({"operator": {"gallery": "volterra", "size": 16}},
                          name="v16")


@pytest.fixture(scope="module")
def v16_result():
    return run_pipeline(_volterra16())


def test_checks_have_a_uniform_shape(v16_result):
    assert v16_result.checks
    for chk in v16_result.checks:
        assert set(chk) == CHECK_KEYS
        assert isinstance(chk["name"], str)
        assert isinstance(chk["passed"], bool)
        float(chk["value"]), float(chk["tolerance"])  # coercible numbers


def test_reference_scenario_is_clean(v16_result):
    assert v16_result.passed
    assert v16_result.findings == ()
    assert v16_result.plan.length >= 2
    assert v16_result.candidate is not None
    assert 1 <= v16_result.candidate.dim <= 15


def test_alpha_groups_follow_the_scenario_samples(v16_result):
    labels = [label for label, _ in v16_result.alphas]
    assert labels == ["I", "Q", "Q + 2Q^2"]
    for _, records in v16_result.alphas:
        assert len(records) == v16_result.plan.length


def test_findings_name_failed_checks(v16_result):
    failed = [c["name"] for c in v16_result.checks if not c["passed"]]
    assert list(v16_result.findings) == failed


def test_stage_gating():
    scn = _volterra16()
    solve_only = run_pipeline(scn, stage="solve")
    assert solve_only.trace is not None
    assert solve_only.plan is None and solve_only.candidate is None
    traced = run_pipeline(scn, stage="trace")
    assert traced.plan is not None and traced.candidate is None
    with pytest.raises(ValueError):
        run_pipeline(scn, stage="everything")


def test_identity_scenario_records_the_flat_plan_as_a_finding():
    scn = parse_scenario({"operator": {"gallery": "weighted_shift", "size": 6,
                                       "weights": [0.0] * 5, "eta": 1.0}},
                         name="identity")
    result = run_pipeline(scn, stage="trace")
    assert result.findings == ("subsequence plan decays",)
    assert not result.passed
    assert not result.plan.decaying
    # delta defaults to half the worst ratio, which is 1 for the identity
    assert result.delta == pytest.approx(0.5, rel=1e-9)
    assert result.contrapositive.passed


def test_explicit_delta_is_respected():
    scn = parse_scenario({"operator": {"gallery": "volterra", "size": 8},
                          "delta": 0.01}, name="fixed-delta")
    result = run_pipeline(scn, stage="trace")
    assert result.delta == 0.01


def test_operator_injection_bypasses_the_gallery():
    scn = _volterra16()
    injected = operator_from_matrix(volterra(16).matrix.copy())
    result = run_pipeline(scn, stage="solve", operator=injected)
    assert result.operator is injected


def test_failures_name_their_stage():
    # x0 concentrated on the last coordinate starves ||K x0||
    x0 = [0.0] * 16
    x0[15] = 1.0
    scn = parse_scenario({"operator": {"gallery": "volterra", "size": 16},
                          "x0": {"source": "explicit", "vector": x0}},
                         name="bad-center")
    with pytest.raises(SolverError, match="stage limits"):
        run_pipeline(scn)
