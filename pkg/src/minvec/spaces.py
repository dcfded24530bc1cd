"""Norms, dual norms, and norming functionals on R^n.

Supports the three classical norms (sum of absolute values, Euclidean,
max of absolute values). Functionals are plain coefficient vectors acting
by the standard bilinear pairing; their size is always measured in the
dual norm (l1 <-> linf, l2 <-> l2).
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DegenerateInputError
from .validation import as_vector

#: Relative tolerance used to decide ties among maximal coordinates when
#: building a norming functional for the max norm.
DEFAULT_TIE_TOL = 1e-12


class NormKind(str, Enum):
    L1 = "l1"
    L2 = "l2"
    LINF = "linf"

    def dual(self) -> "NormKind":
        """The norm in which functionals over this space are measured."""
        if self is NormKind.L1:
            return NormKind.LINF
        if self is NormKind.LINF:
            return NormKind.L1
        return NormKind.L2


def norm_kind_from_string(s) -> NormKind:
    try:
        return NormKind(str(s).lower())
    except ValueError:
        raise DegenerateInputError(
            f"unknown norm kind {s!r}; expected one of l1, l2, linf"
        ) from None


@dataclass(frozen=True)
class SpaceSpec:
    """Finite-dimensional normed space: a dimension and a norm kind."""

    dim: int
    kind: NormKind

    def __post_init__(self):
        if int(self.dim) < 1:
            raise DegenerateInputError(f"dim must be >= 1, got {self.dim}")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "kind", NormKind(self.kind))

    @property
    def dual_kind(self) -> NormKind:
        return self.kind.dual()


def vector_norm(v, kind: NormKind) -> float:
    """Norm of ``v`` in the given kind. Returns 0 iff v = 0."""
    v = as_vector(v)
    kind = NormKind(kind)
    if kind is NormKind.L1:
        return float(np.sum(np.abs(v)))
    if kind is NormKind.L2:
        n = float(np.linalg.norm(v))
        if (n == 0.0 or not np.isfinite(n)) and np.any(v):
            # squared entries under- or overflowed; rescale and retry
            top = float(np.max(np.abs(v)))
            n = top * float(np.linalg.norm(v / top))
        return n
    return float(np.max(np.abs(v)))


@dataclass(frozen=True)
class Functional:
    """A linear functional with its norm measured in ``dual_kind``."""

    coefficients: np.ndarray
    dual_kind: NormKind

    def __post_init__(self):
        object.__setattr__(
            self, "coefficients", as_vector(self.coefficients, name="coefficients")
        )
        self.coefficients.flags.writeable = False
        object.__setattr__(self, "dual_kind", NormKind(self.dual_kind))

    @property
    def dim(self) -> int:
        return self.coefficients.shape[0]

    @property
    def norm(self) -> float:
        return vector_norm(self.coefficients, self.dual_kind)

    def __call__(self, v) -> float:
        return dual_pair(self, v)


def dual_pair(f: Functional, v) -> float:
    """Apply a functional to a vector: the standard bilinear pairing."""
    v = as_vector(v, dim=f.dim, name="vector")
    return float(np.dot(f.coefficients, v))


def norming_functional(v, kind: NormKind, tie_tol: float = DEFAULT_TIE_TOL) -> Functional:
    """A dual-norm-one functional attaining the norm of ``v``.

    For the max norm the maximizing coordinate may be tied; weight is then
    spread uniformly over all coordinates within relative ``tie_tol`` of the
    maximum, which makes the result stable under coordinate permutations.
    For the sum norm, zero coordinates get coefficient 0.
    """
    v = as_vector(v)
    kind = NormKind(kind)
    if not np.any(v):
        raise DegenerateInputError("cannot build a norming functional for 0")
    if kind is NormKind.L2:
        scaled = v / np.max(np.abs(v))
        coeffs = scaled / np.linalg.norm(scaled)
    elif kind is NormKind.L1:
        coeffs = np.sign(v)
    else:
        top = np.max(np.abs(v))
        support = np.abs(v) >= (1.0 - tie_tol) * top
        coeffs = np.where(support, np.sign(v) / np.count_nonzero(support), 0.0)
    return Functional(coefficients=coeffs, dual_kind=kind.dual())
