"""Canonical operator instances and the compact-commutant demo setup.

The gallery supplies ready-made quasinilpotent-flavored operators for the
iteration pipeline: a trapezoidal Volterra discretization, regularized
Jordan and weighted shifts, and a loader for user-supplied dense matrices.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InvalidProblemError, SetupError
from .operators import OperatorHandle, operator_from_matrix, operator_norm
from .spaces import NormKind, vector_norm
from .validation import as_vector

#: Default diagonal regularization restoring injectivity to nilpotent shifts.
DEFAULT_SHIFT_ETA = 1e-8
SETUP_EPSILON = 1.0 / 3.0
SETUP_THRESHOLD = 2.0 / 3.0


class GalleryKind(str, Enum):
    VOLTERRA = "volterra"
    JORDAN_SHIFT = "jordan_shift"
    WEIGHTED_SHIFT = "weighted_shift"
    DENSE_USER = "dense_user"


@dataclass(frozen=True)
class GallerySpec:
    """Recipe for a gallery operator."""

    kind: GalleryKind
    size: int = 0
    eta: float = DEFAULT_SHIFT_ETA
    weights: tuple = ()
    path: str = ""


def volterra(n: int, kind=NormKind.L2) -> OperatorHandle:
    """Trapezoidal quadrature matrix for the cumulative integral on [0,1].

    Entries are 1/n strictly below the diagonal and 1/(2n) on it, so the
    matrix is invertible (left-rectangle quadrature would be strictly
    lower triangular, hence singular). The spectral radius is exactly
    1/(2n) and the max row sum is (2n-1)/(2n).
    """
    if n < 2:
        raise InvalidProblemError(f"volterra size must be >= 2, got {n}")
    mat = np.tril(np.full((n, n), 1.0 / n), k=-1) + np.eye(n) / (2.0 * n)
    return operator_from_matrix(mat, kind=kind)


def jordan_shift(n: int, eta: float = DEFAULT_SHIFT_ETA, kind=NormKind.L2) -> OperatorHandle:
    """Jordan-type shift: ones on the first subdiagonal plus eta on the diagonal.

    eta > 0 gives an injective operator with spectral radius eta; eta = 0 is
    the exact nilpotent shift (useful for closed-form subspace tests, but
    rejected by the solver's injectivity gate).
    """
    if n < 2:
        raise InvalidProblemError(f"jordan_shift size must be >= 2, got {n}")
    if eta < 0:
        raise InvalidProblemError(f"jordan_shift eta must be >= 0, got {eta}")
    mat = np.diag(np.ones(n - 1), k=-1) + eta * np.eye(n)
    return operator_from_matrix(mat, kind=kind)


def weighted_shift(n: int, weights, eta: float = DEFAULT_SHIFT_ETA,
                   kind=NormKind.L2) -> OperatorHandle:
    """Weighted shift with the given subdiagonal weights plus eta on the diagonal."""
    if n < 2:
        raise InvalidProblemError(f"weighted_shift size must be >= 2, got {n}")
    w = as_vector(weights, dim=n - 1, name="weights")
    if eta < 0:
        raise InvalidProblemError(f"weighted_shift eta must be >= 0, got {eta}")
    mat = np.diag(w, k=-1) + eta * np.eye(n)
    return operator_from_matrix(mat, kind=kind)


def dense_user(path: str, kind=NormKind.L2) -> OperatorHandle:
    """Load a dense square matrix from CSV (row-major, comma-separated, no header)."""
    try:
        mat = np.loadtxt(path, delimiter=",", ndmin=2, dtype=float)
    except OSError as exc:
        raise InvalidProblemError(f"cannot read matrix file {path!r}: {exc}") from exc
    except ValueError as exc:
        raise InvalidProblemError(f"malformed matrix CSV {path!r}: {exc}") from exc
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise InvalidProblemError(
            f"matrix CSV {path!r} must be square, got shape {mat.shape}"
        )
    return operator_from_matrix(mat, kind=kind)


def build(spec: GallerySpec, kind=NormKind.L2) -> OperatorHandle:
    """Materialize a gallery spec as an operator handle."""
    kind = NormKind(kind)
    if spec.kind is GalleryKind.VOLTERRA:
        return volterra(spec.size, kind=kind)
    if spec.kind is GalleryKind.JORDAN_SHIFT:
        return jordan_shift(spec.size, eta=spec.eta, kind=kind)
    if spec.kind is GalleryKind.WEIGHTED_SHIFT:
        return weighted_shift(spec.size, spec.weights, eta=spec.eta, kind=kind)
    if spec.kind is GalleryKind.DENSE_USER:
        return dense_user(spec.path, kind=kind)
    raise InvalidProblemError(f"unknown gallery kind {spec.kind!r}")


@dataclass(frozen=True)
class NormingSetup:
    """A unit starting vector certified to keep 0 out of K·B(x0, eps)."""

    x0: np.ndarray
    epsilon: float
    lower_bound: float
    achieved: float
    operator: OperatorHandle

    def __post_init__(self):
        self.x0.flags.writeable = False


def _top_direction(a, max_iter=10_000, tol=1e-12):
    """Deterministic power-iteration estimate of the top right singular vector."""
    n = a.shape[1]
    v = np.ones(n) / np.sqrt(n)
    prev = -1.0
    for it in range(max_iter):
        w = a.T @ (a @ v)
        wn = np.linalg.norm(w)
        if wn == 0.0:
            break
        v = w / wn
        est = float(np.linalg.norm(a @ v))
        if it > 0 and abs(est - prev) <= tol * max(est, 1.0):
            break
        prev = est
    return v


def norming_setup(k: OperatorHandle) -> NormingSetup:
    """Find a unit x0 with ||K x0|| >= 2/3 after normalizing K to norm 1.

    The candidate set is deterministic: the power-iteration estimate of the
    top singular direction, every coordinate vector, and the sign pattern
    of every row (the exact maximizers for the l2, l1, and sup norms
    respectively). The returned lower bound ||K x0|| - eps*||K|| certifies
    that the image of the ball B(x0, 1/3) stays away from 0.
    """
    kind = k.space.kind
    k_norm = operator_norm(k.matrix, kind)
    if k_norm <= 0.0:
        raise SetupError("cannot run the setup on the zero operator")
    a = k.matrix / k_norm

    candidates = [_top_direction(a)]
    n = k.dim
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        candidates.append(e)
    for i in range(n):
        row = a[i]
        if np.any(row != 0.0):
            s = np.sign(row)
            s[s == 0.0] = 1.0
            candidates.append(s)

    best_value = -1.0
    best_x = None
    for cand in candidates:
        cn = vector_norm(cand, kind)
        if cn == 0.0:
            continue
        unit = cand / cn
        value = vector_norm(a @ unit, kind)
        if value > best_value:
            best_value = value
            best_x = unit

    if best_x is None or best_value < SETUP_THRESHOLD:
        raise SetupError(
            f"no candidate reached ||K x0|| >= 2/3 (best {best_value:.6g})"
        )

    norm_after = operator_norm(a, kind)
    lower_bound = best_value - SETUP_EPSILON * norm_after
    return NormingSetup(
        x0=best_x,
        epsilon=SETUP_EPSILON,
        lower_bound=float(lower_bound),
        achieved=float(best_value),
        operator=OperatorHandle(matrix=a, space=k.space,
                                injectivity_factor=k.injectivity_factor),
    )
