"""Candidate invariant subspace: the polynomial-commutant image of Qw.

The span of {Q^k (Qw) : 0 <= k <= m} realizes the orbit of Qw under
polynomials in Q. Columns are orthogonalized sequentially and the chain is
cut where the next column's remainder falls below rank_tol times the
largest remainder seen; the remainder ladder is the rank-revealing profile
reported alongside the basis.

Gram-Schmidt is used instead of an SVD on purpose: it forms only linear
combinations of the columns, so any coordinate that is exactly zero in
every Krylov iterate stays exactly zero in the basis. For triangular
operators this means a generator supported on trailing coordinates yields
a basis supported there too, and invariance of the span is then exact in
floating point rather than limited by the remainder decay rate. The
numerical_support helper prepares such a generator by zeroing coordinates
indistinguishable from solver noise; the chain amplifies spurious mass by
the inverse of the smallest retained remainder, so coordinates below that
scale only poison the candidate.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InjectivityError, InvalidProblemError
from .operators import OperatorHandle
from .spaces import Functional, SpaceSpec
from .validation import as_square_matrix, as_vector, require_nonzero

DEFAULT_RANK_TOL = 1e-10
DEFAULT_SUPPORT_TOL = 1e-6
#: Floor for the denominator of the invariance residual, so that a basis
#: vector annihilated by A counts as perfectly mapped into the span.
RESIDUAL_FLOOR = 1e-300


@dataclass(frozen=True)
class SupportReport:
    """What numerical_support removed from the generator."""

    zeroed: int
    dropped_mass: float  # ||w - w_supported|| / ||w||, euclidean
    support_tol: float


def numerical_support(w, support_tol: float = DEFAULT_SUPPORT_TOL):
    """Zero coordinates of w below support_tol times its largest entry.

    Returns (w_supported, report). The removed relative mass is recorded
    so the substitution is auditable; support_tol = 0 keeps w as is.
    """
    w = np.asarray(w, dtype=float).copy()
    require_nonzero(w, name="w")
    if not 0.0 <= support_tol < 1.0:
        raise InvalidProblemError(
            f"support tolerance must lie in [0, 1), got {support_tol}"
        )
    scale = float(np.max(np.abs(w)))
    keep = np.abs(w) > support_tol * scale
    dropped = np.linalg.norm(w[~keep]) / np.linalg.norm(w)
    w[~keep] = 0.0
    return w, SupportReport(
        zeroed=int(np.sum(~keep)), dropped_mass=float(dropped),
        support_tol=float(support_tol),
    )


@dataclass(frozen=True)
class SubspaceCandidate:
    """Orthonormal basis for the Krylov span, plus its rank diagnostics."""

    basis: np.ndarray  # ambient_dim x dim, orthonormal columns
    rank_profile: tuple  # orthogonalization remainder ladder, one per column
    degree: int
    rank_tol: float

    def __post_init__(self):
        self.basis.flags.writeable = False

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.T


def build_candidate(op: OperatorHandle, w, degree: int,
                    rank_tol: float = DEFAULT_RANK_TOL) -> SubspaceCandidate:
    """Assemble span{Q^k (Qw) : 0 <= k <= degree} with a rank-revealing cut.

    Each iterate is normalized (so the geometric decay of Q^k does not
    masquerade as rank deficiency), orthogonalized twice against the basis
    built so far, and kept while its remainder stays above rank_tol times
    the largest remainder seen. Qw != 0 guarantees dim >= 1.
    """
    w = as_vector(w, dim=op.dim, name="w")
    require_nonzero(w, name="w")
    if degree < 1:
        raise InvalidProblemError(f"Krylov degree must be >= 1, got {degree}")
    qw = op.matrix @ w
    if np.linalg.norm(qw) <= RESIDUAL_FLOOR:
        raise InjectivityError("Qw is numerically zero; Q is not injective on w")

    columns = []
    remainders = []
    largest = 0.0
    current = qw / np.linalg.norm(qw)
    for _ in range(degree + 1):
        residual = current.copy()
        for _ in range(2):
            for b in columns:
                residual -= (b @ residual) * b
        remainder = float(np.linalg.norm(residual))
        remainders.append(remainder)
        largest = max(largest, remainder)
        if remainder <= rank_tol * largest:
            break
        columns.append(residual / remainder)
        image = op.matrix @ columns[-1]
        norm = float(np.linalg.norm(image))
        if norm <= RESIDUAL_FLOOR:
            break
        current = image / norm
    return SubspaceCandidate(
        basis=np.column_stack(columns),
        rank_profile=tuple(remainders), degree=degree, rank_tol=float(rank_tol),
    )


def invariance_residual(cand: SubspaceCandidate, a) -> float:
    """Worst relative leakage of A applied to the candidate's basis.

    max over basis columns b of ||(I - P) A b|| / max(||A b||, floor);
    0 means A maps the span into itself exactly (a vector annihilated by
    A counts as mapped in).
    """
    a = as_square_matrix(a, dim=cand.ambient_dim, name="test matrix")
    images = a @ cand.basis
    leaked = images - cand.basis @ (cand.basis.T @ images)
    worst = 0.0
    for j in range(cand.dim):
        denom = max(float(np.linalg.norm(images[:, j])), RESIDUAL_FLOOR)
        worst = max(worst, float(np.linalg.norm(leaked[:, j])) / denom)
    return worst


@dataclass(frozen=True)
class PropernessReport:
    dim: int
    ambient_dim: int
    proper: bool  # 1 <= dim <= ambient_dim - 1
    annihilation_residual: float  # max |g(b)| over unit basis columns
    passed: bool


def properness_check(cand: SubspaceCandidate, g: Functional,
                     space: SpaceSpec) -> PropernessReport:
    """Report whether the candidate is proper and almost inside ker g.

    A small annihilation residual certifies the span approximately lies in
    the kernel of the (nonzero) limit functional, which independently
    forces the dimension below the ambient one. Report-only.
    """
    if cand.ambient_dim != space.dim:
        raise InvalidProblemError(
            f"candidate lives in dimension {cand.ambient_dim}, space has {space.dim}"
        )
    proper = 1 <= cand.dim <= cand.ambient_dim - 1
    values = cand.basis.T @ g.coefficients
    annihilation = float(np.max(np.abs(values), initial=0.0))
    return PropernessReport(
        dim=cand.dim, ambient_dim=cand.ambient_dim, proper=proper,
        annihilation_residual=annihilation, passed=proper,
    )
