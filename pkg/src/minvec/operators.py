"""Dense operator handles: powers, adjoints, norms, commutant samples.

An :class:`OperatorHandle` wraps an immutable square matrix together with
the normed space it acts on. Consecutive powers are cached behind a lock
(the iteration needs every power up to N, so powers are built by
sequential multiplication rather than repeated squaring).
"""

import threading
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateInputError,
    EstimationError,
    NumericalOverflowError,
)
from .spaces import NormKind, SpaceSpec
from .validation import as_square_matrix, as_vector

DEFAULT_POWER_ITER_TOL = 1e-10
DEFAULT_POWER_ITER_CAP = 10_000
#: Smallest singular value must exceed this multiple of the largest for an
#: operator to count as injective.
DEFAULT_INJECTIVITY_FACTOR = 1e-12


@dataclass
class OperatorHandle:
    """A dense operator on a normed space, with a read-through power cache."""

    matrix: np.ndarray
    space: SpaceSpec
    injectivity_factor: float = DEFAULT_INJECTIVITY_FACTOR
    _powers: dict = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def __post_init__(self):
        mat = as_square_matrix(self.matrix, dim=self.space.dim, name="operator matrix")
        mat = mat.copy()
        mat.flags.writeable = False
        self.matrix = mat
        svals = np.linalg.svd(mat, compute_uv=False)
        self.largest_singular_value = float(svals[0])
        self.smallest_singular_value = float(svals[-1])
        self._powers[1] = mat

    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def is_injective(self) -> bool:
        threshold = self.injectivity_factor * self.largest_singular_value
        return self.smallest_singular_value > threshold

    def power(self, n: int) -> np.ndarray:
        """The n-th power, cached. Exponent 0 yields the identity."""
        n = int(n)
        if n < 0:
            raise DegenerateInputError(f"power exponent must be >= 0, got {n}")
        if n == 0:
            return np.eye(self.dim)
        with self._lock:
            if n in self._powers:
                return self._powers[n]
            k = max(e for e in self._powers if e <= n)
            current = self._powers[k]
            while k < n:
                current = current @ self.matrix
                k += 1
                if not np.all(np.isfinite(current)):
                    raise NumericalOverflowError(
                        f"operator power {k} overflowed to non-finite values"
                    )
                current.flags.writeable = False
                self._powers[k] = current
            return current

    def apply(self, v, n: int = 1) -> np.ndarray:
        """Apply the n-th power to a vector."""
        v = as_vector(v, dim=self.dim)
        if n == 0:
            return v.copy()
        return self.power(n) @ v

    def adjoint_apply(self, coefficients, n: int = 1) -> np.ndarray:
        """Coefficients of a functional pulled back through the n-th power."""
        c = as_vector(coefficients, dim=self.dim, name="coefficients")
        if n == 0:
            return c.copy()
        return self.power(n).T @ c


def operator_from_matrix(matrix, kind=NormKind.L2, injectivity_factor=DEFAULT_INJECTIVITY_FACTOR):
    """Wrap a dense square matrix as an operator on (R^n, kind)."""
    mat = as_square_matrix(matrix)
    space = SpaceSpec(dim=mat.shape[0], kind=NormKind(kind))
    return OperatorHandle(matrix=mat, space=space, injectivity_factor=injectivity_factor)


def _l2_norm_power_iteration(a, tol, max_iter):
    """Largest singular value via power iteration on the normal matrix.

    The all-ones start is the primary (deterministic) seed; a couple of
    extra deterministic seeds guard against a start vector orthogonal to
    the top singular subspace. Estimates are Rayleigh quotients, hence
    monotone lower bounds; the max over seeds is returned.
    """
    n = a.shape[1]
    seeds = [np.ones(n)]
    if n > 1:
        first = np.zeros(n)
        first[0] = 1.0
        seeds.append(first)
        seeds.append(np.arange(1.0, n + 1.0))
    best = 0.0
    for seed in seeds:
        v = seed / np.linalg.norm(seed)
        prev = -1.0
        converged = False
        estimate = 0.0
        for it in range(max_iter):
            u = a @ v
            estimate = float(np.linalg.norm(u))
            if estimate == 0.0:
                converged = True
                break
            w = a.T @ u
            wn = np.linalg.norm(w)
            if wn == 0.0:
                converged = True
                break
            v = w / wn
            if it > 0 and abs(estimate - prev) <= tol * max(estimate, np.finfo(float).tiny):
                converged = True
                break
            prev = estimate
        best = max(best, estimate)
        if not converged:
            raise EstimationError(
                f"singular value power iteration did not converge in {max_iter} iterations",
                best_bound=best,
            )
    return best


def operator_norm(a, kind: NormKind, tol: float = DEFAULT_POWER_ITER_TOL,
                  max_iter: int = DEFAULT_POWER_ITER_CAP) -> float:
    """Induced operator norm of a square matrix.

    l1 and linf have exact column-sum/row-sum formulas; l2 is the largest
    singular value, estimated by deterministic power iteration to relative
    tolerance ``tol``.
    """
    a = as_square_matrix(a)
    kind = NormKind(kind)
    if kind is NormKind.L1:
        return float(np.max(np.sum(np.abs(a), axis=0)))
    if kind is NormKind.LINF:
        return float(np.max(np.sum(np.abs(a), axis=1)))
    return _l2_norm_power_iteration(a, tol, max_iter)


def quasinilpotence_profile(op: OperatorHandle, count: int, kind: NormKind | None = None):
    """The sequence ||Q^n||^(1/n) for n = 1..count.

    A vanishing tail detects nilpotency exactly; a decreasing profile is
    the numerical signature of a small spectral radius.
    """
    if count < 1:
        raise DegenerateInputError(f"profile length must be >= 1, got {count}")
    kind = NormKind(kind) if kind is not None else op.space.kind
    out = []
    for n in range(1, count + 1):
        value = operator_norm(op.power(n), kind)
        out.append(float(value ** (1.0 / n)) if value > 0 else 0.0)
    return out


@dataclass(frozen=True)
class CommutantElement:
    """A polynomial in the operator: always commutes with it."""

    coefficients: np.ndarray
    matrix: np.ndarray
    op_norm: float
    commutation_residual: float
    label: str = ""

    def __post_init__(self):
        self.matrix.flags.writeable = False


def commutant_sample(op: OperatorHandle, coefficients, kind: NormKind | None = None,
                     label: str = "") -> CommutantElement:
    """Build T = sum c_k Q^k and record its norm and commutation residual.

    All-zero coefficients are allowed (T = 0, a useful trivial test case).
    The residual ||TQ - QT|| is zero in exact arithmetic and is recorded
    as a floating-point diagnostic.
    """
    coeffs = as_vector(coefficients, name="coefficients")
    kind = NormKind(kind) if kind is not None else op.space.kind
    t = np.zeros((op.dim, op.dim))
    for k, c in enumerate(coeffs):
        if c != 0.0:
            t = t + c * op.power(k)
    t_norm = operator_norm(t, kind)
    q_norm = operator_norm(op.matrix, kind)
    residual = operator_norm(t @ op.matrix - op.matrix @ t, kind)
    return CommutantElement(
        coefficients=coeffs,
        matrix=t,
        op_norm=t_norm,
        commutation_residual=float(residual),
        label=label or _poly_label(coeffs),
    )


def _poly_label(coeffs):
    terms = []
    for k, c in enumerate(coeffs):
        if c == 0.0:
            continue
        base = "I" if k == 0 else ("Q" if k == 1 else f"Q^{k}")
        terms.append(base if c == 1.0 else f"{c:g}{base}")
    return " + ".join(terms) if terms else "0"
