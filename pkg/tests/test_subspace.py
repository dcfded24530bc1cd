"""Numerical support truncation, Krylov candidates, and invariance checks."""

import numpy as np
import pytest

from minvec import (Functional, InjectivityError, InvalidProblemError,
                    NormKind, build_candidate, commutant_sample,
                    invariance_residual, jordan_shift, numerical_support,
                    operator_from_matrix, properness_check, volterra,
                    weighted_shift)
from minvec.spaces import SpaceSpec


def test_numerical_support_zeroes_small_coordinates_exactly():
    w = np.array([1.0, 1e-2, 1e-9, -1e-12])
    supported, report = numerical_support(w, support_tol=1e-6)
    np.testing.assert_array_equal(supported[2:], [0.0, 0.0])
    np.testing.assert_array_equal(supported[:2], w[:2])
    assert report.zeroed == 2
    assert report.dropped_mass == pytest.approx(np.hypot(1e-9, 1e-12), rel=1e-12)
    assert report.support_tol == 1e-6


def test_numerical_support_keeps_everything_at_zero_tolerance():
    w = np.array([1.0, 1e-300])
    supported, report = numerical_support(w, support_tol=0.0)
    np.testing.assert_array_equal(supported, w)
    assert report.zeroed == 0
    assert report.dropped_mass == 0.0


def test_numerical_support_tolerance_validation():
    with pytest.raises(InvalidProblemError):
        numerical_support(np.ones(3), support_tol=1.5)
    with pytest.raises(InvalidProblemError):
        numerical_support(np.ones(3), support_tol=-0.1)


def test_jordan_candidate_is_exactly_invariant():
    """The cyclic vector of a Jordan-type shift spans the canonical example.

    span{Q^k(Q e_1)} is the coordinate suffix space of dimension n - 1,
    invariant under every polynomial in Q with no floating-point leakage.
    """
    n = 16
    op = jordan_shift(n)
    e1 = np.zeros(n)
    e1[0] = 1.0
    cand = build_candidate(op, e1, degree=n)
    assert cand.dim == n - 1
    assert cand.ambient_dim == n
    for coeffs in [(0.0, 1.0), (0.0, 0.0, 1.0), (0.0, 1.0, 2.0)]:
        t = commutant_sample(op, coeffs)
        assert invariance_residual(cand, t.matrix) <= 1e-12


def test_projector_invariants():
    op = jordan_shift(10)
    e1 = np.zeros(10)
    e1[0] = 1.0
    p = build_candidate(op, e1, degree=10).projector
    assert np.linalg.norm(p @ p - p, 2) <= 1e-10
    assert np.linalg.norm(p - p.T, 2) <= 1e-12


def test_generic_operator_fills_the_whole_space(rng):
    mat = rng.standard_normal((4, 4)) + 4.0 * np.eye(4)
    op = operator_from_matrix(mat)
    cand = build_candidate(op, rng.standard_normal(4), degree=8)
    assert cand.dim == 4  # no proper invariant subspace from a generic vector


def test_properness_check_flags_a_full_span(rng):
    mat = rng.standard_normal((3, 3)) + 3.0 * np.eye(3)
    op = operator_from_matrix(mat)
    cand = build_candidate(op, rng.standard_normal(3), degree=6)
    g = Functional(coefficients=np.ones(3) / np.sqrt(3.0), dual_kind=NormKind.L2)
    report = properness_check(cand, g, SpaceSpec(dim=3, kind=NormKind.L2))
    assert not report.proper
    assert not report.passed


def test_properness_check_reports_the_annihilation_residual():
    op = jordan_shift(6)
    e1 = np.zeros(6)
    e1[0] = 1.0
    cand = build_candidate(op, e1, degree=6)
    g = Functional(coefficients=np.eye(6)[0], dual_kind=NormKind.L2)  # g = e_1*
    report = properness_check(cand, g, SpaceSpec(dim=6, kind=NormKind.L2))
    assert report.proper and report.passed
    expected = max(abs(float(g.coefficients @ cand.basis[:, j]))
                   for j in range(cand.dim))
    assert report.annihilation_residual == pytest.approx(expected, abs=1e-300)
    assert report.dim == cand.dim
    assert report.ambient_dim == 6


def test_build_candidate_rejects_annihilated_seed():
    op = weighted_shift(3, (0.5, 0.5), eta=0.0)
    e3 = np.zeros(3)
    e3[2] = 1.0  # Q e_3 = 0 for the pure shift
    with pytest.raises(InjectivityError):
        build_candidate(op, e3, degree=3)


def test_build_candidate_validation():
    op = volterra(4)
    with pytest.raises(InvalidProblemError):
        build_candidate(op, np.ones(4), degree=0)
    with pytest.raises(Exception):
        build_candidate(op, np.zeros(4), degree=2)


def test_invariance_residual_checks_dimensions():
    op = jordan_shift(5)
    e1 = np.zeros(5)
    e1[0] = 1.0
    cand = build_candidate(op, e1, degree=5)
    with pytest.raises(Exception):
        invariance_residual(cand, np.eye(4))


def test_rank_profile_shows_the_saturation_cliff():
    """Once the chain saturates a coordinate suffix block, remainders collapse."""
    op = jordan_shift(8)
    e1 = np.zeros(8)
    e1[0] = 1.0
    cand = build_candidate(op, e1, degree=8)
    profile = cand.rank_profile
    assert all(r == pytest.approx(1.0, abs=1e-8) for r in profile[:-1])
    assert profile[-1] <= cand.rank_tol
