"""Scikit-learn style facade over the full pipeline.

InvariantSubspaceFinder.fit(Q) runs the minimal-vector iteration on the
operator matrix Q and exposes the outputs as fitted attributes; transform
projects row vectors onto the candidate invariant subspace. The estimator
contract (get_params/set_params, trailing-underscore attributes) makes the
pipeline usable inside sklearn tooling, e.g. grid searches over rho or the
Krylov degree.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .errors import InvalidProblemError
from .gallery import GalleryKind, GallerySpec
from .operators import operator_from_matrix
from .pipeline import run_pipeline
from .scenario import (DEFAULT_ALPHA_SAMPLES, DEFAULT_INVARIANCE_SAMPLES,
                       DEFAULT_TOLERANCES, Scenario)
from .spaces import NormKind


class InvariantSubspaceFinder(BaseEstimator, TransformerMixin):
    """Find a candidate hyperinvariant subspace of a square matrix.

    Parameters mirror the scenario fields; fit accepts the operator as an
    (n, n) array. Fitted attributes:

    - ``basis_``: orthonormal columns spanning the candidate
    - ``dim_``: candidate dimension
    - ``w_``, ``g_``: the limit vector and limit functional coefficients
    - ``trace_``: per-power minimal-vector records
    - ``result_``: the full pipeline result, checks included
    """

    def __init__(self, norm="l2", powers=6, lambda_factor=2.0, rho=0.5,
                 degree=12, commutant_power=12, epsilon=None, seed=0):
        self.norm = norm
        self.powers = powers
        self.lambda_factor = lambda_factor
        self.rho = rho
        self.degree = degree
        self.commutant_power = commutant_power
        self.epsilon = epsilon
        self.seed = seed

    def _scenario(self, dim: int) -> Scenario:
        return Scenario(
            name="estimator", kind=NormKind(self.norm),
            operator_spec=GallerySpec(kind=GalleryKind.DENSE_USER, size=dim),
            x0_source="ones", x0_vector=None, epsilon=self.epsilon,
            powers=int(self.powers), lambda_factor=float(self.lambda_factor),
            rho=float(self.rho), degree=int(self.degree),
            commutant_power=int(self.commutant_power), delta=None,
            seed=int(self.seed), out_dir=None,
            tolerances=dict(DEFAULT_TOLERANCES),
            alpha_samples=DEFAULT_ALPHA_SAMPLES,
            invariance_samples=DEFAULT_INVARIANCE_SAMPLES,
        )

    def fit(self, X, y=None):
        X = check_array(X, dtype=float)
        if X.shape[0] != X.shape[1]:
            raise InvalidProblemError(
                f"operator must be square, got shape {X.shape}")
        scenario = self._scenario(X.shape[0])
        operator = operator_from_matrix(X, scenario.kind)
        result = run_pipeline(scenario, stage="subspace", operator=operator)
        self.result_ = result
        self.trace_ = result.trace
        self.w_ = result.limits.w_part.w.copy()
        self.g_ = result.limits.g_part.g.coefficients.copy()
        self.basis_ = result.candidate.basis.copy()
        self.dim_ = result.candidate.dim
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        """Project row vectors onto the fitted candidate subspace."""
        check_is_fitted(self, "basis_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.basis_.shape[0]:
            raise InvalidProblemError(
                f"expected vectors of length {self.basis_.shape[0]}, "
                f"got {X.shape[1]}")
        return (X @ self.basis_) @ self.basis_.T
