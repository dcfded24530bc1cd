"""Norms, dual pairings, and norming functionals."""

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from minvec import (DegenerateInputError, DimensionMismatchError, Functional,
                    NormKind, dual_pair, norming_functional, vector_norm)

KINDS = [NormKind.L1, NormKind.L2, NormKind.LINF]


def test_vector_norm_matches_closed_forms():
    v = np.array([3.0, -4.0, 12.0])
    assert vector_norm(v, NormKind.L1) == pytest.approx(19.0)
    assert vector_norm(v, NormKind.L2) == pytest.approx(13.0)
    assert vector_norm(v, NormKind.LINF) == pytest.approx(12.0)


def test_vector_norm_zero_only_for_zero():
    assert vector_norm(np.zeros(4), NormKind.L1) == 0.0
    assert vector_norm(np.array([0.0, 1e-300]), NormKind.LINF) > 0.0


def test_dual_kind_involution():
    assert NormKind.L1.dual() is NormKind.LINF
    assert NormKind.LINF.dual() is NormKind.L1
    assert NormKind.L2.dual() is NormKind.L2
    for kind in KINDS:
        assert kind.dual().dual() is kind


_vectors = st.lists(
    st.floats(min_value=-1e6, max_value=1e6), min_size=1, max_size=8
).map(lambda xs: np.asarray(xs, dtype=float))


@given(v=_vectors)
@settings(max_examples=120, deadline=None)
def test_norming_functional_attains_the_norm(v):
    assume(np.any(v != 0.0))
    for kind in KINDS:
        f = norming_functional(v, kind)
        size = vector_norm(v, kind)
        assert f(v) == pytest.approx(size, rel=1e-12, abs=1e-15)
        assert f.norm == pytest.approx(1.0, rel=1e-12)


@given(v=_vectors, u=_vectors)
@settings(max_examples=120, deadline=None)
def test_pairing_respects_the_dual_inequality(v, u):
    assume(np.any(v != 0.0))
    assume(u.shape == v.shape)
    for kind in KINDS:
        f = norming_functional(v, kind)
        bound = f.norm * vector_norm(u, kind)
        assert abs(dual_pair(f, u)) <= bound * (1.0 + 1e-12) + 1e-15


def test_norming_functional_spreads_sup_norm_ties():
    f = norming_functional(np.array([1.0, -1.0]), NormKind.LINF)
    np.testing.assert_allclose(f.coefficients, [0.5, -0.5])
    assert f.norm == pytest.approx(1.0)


def test_norming_functional_ignores_zero_coordinates_in_l1():
    f = norming_functional(np.array([2.0, 0.0, -3.0]), NormKind.L1)
    np.testing.assert_allclose(f.coefficients, [1.0, 0.0, -1.0])


def test_norming_functional_rejects_zero():
    with pytest.raises(DegenerateInputError):
        norming_functional(np.zeros(3), NormKind.L2)


def test_functional_is_immutable_and_sized_in_the_dual_norm():
    f = Functional(coefficients=np.array([1.0, 1.0]), dual_kind=NormKind.L1)
    assert f.dim == 2
    assert f.norm == pytest.approx(2.0)
    with pytest.raises(ValueError):
        f.coefficients[0] = 5.0


def test_dual_pair_checks_dimensions():
    f = Functional(coefficients=np.ones(3), dual_kind=NormKind.L2)
    with pytest.raises(DimensionMismatchError):
        dual_pair(f, np.ones(4))
