"""The invariant-subspace iteration: per-power solves, ratio subsequence,
limit estimates, and the annihilation identity g(TQw) ~ 0.

This module turns the existence proof into a finite computation. For each
power n it collects a certified minimal pair (y_n, f_n); a geometrically
decaying subsequence of the norm ratios ||y_{n-1}||/||y_n|| then drives
the construction of the limit vector w (through a norm-1 commutant
element K) and the limit functional g (a cluster average of the f's).
The alpha decomposition and its certified envelope quantify how fast
g(TQw) must vanish.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateDecompositionError,
    HypothesisViolatedError,
    InvalidProblemError,
    SolverError,
)
from .operators import CommutantElement, OperatorHandle, operator_norm
from .solver import (DEFAULT_CERT_TOL, DEFAULT_ROOT_TOL, MinimalProblem,
                     MinimalSolution, solve_minimal)
from .spaces import Functional, NormKind, vector_norm
from .validation import as_vector

DEFAULT_CLUSTER_CAP = 0.1
PAIRING_FLOOR_FACTOR = 1e-14


@dataclass(frozen=True)
class TraceRecord:
    """One power's worth of the iteration: n, the solve, and the ratio."""

    power: int
    solution: MinimalSolution
    ratio: float | None  # ||y_{n-1}|| / ||y_n||, absent for the first record

    @property
    def min_norm(self) -> float:
        return self.solution.min_norm

    @property
    def minimizer_norm(self) -> float:
        return self.solution.minimizer_norm


@dataclass(frozen=True)
class IterationTrace:
    records: tuple
    x0: np.ndarray
    epsilon: float
    kind: NormKind
    lambda_factor: float
    operator: OperatorHandle

    def __post_init__(self):
        self.x0.flags.writeable = False

    def record_for_power(self, n: int) -> TraceRecord:
        rec = self.records[n - 1]
        if rec.power != n:
            raise SolverError(f"trace records out of order at power {n}")
        return rec

    @property
    def ratios(self) -> tuple:
        return tuple(r.ratio for r in self.records[1:])


def run_trace(op: OperatorHandle, x0, epsilon: float, count: int,
              lambda_factor: float = 2.0, root_tol: float = DEFAULT_ROOT_TOL,
              cert_tol: float = DEFAULT_CERT_TOL) -> IterationTrace:
    """Solve the minimal-vector problem for every power n = 1..count.

    Each record passes the full per-solve certificate conditions; any
    per-power failure aborts with the failing power named.
    """
    if count < 2:
        raise InvalidProblemError(f"trace needs at least 2 powers, got {count}")
    x0 = as_vector(x0, dim=op.dim, name="x0")
    records = []
    prev_norm = None
    for n in range(1, count + 1):
        problem = MinimalProblem(operator=op, power=n, x0=x0, epsilon=epsilon,
                                 lambda_target=lambda_factor,
                                 root_tol=root_tol, cert_tol=cert_tol)
        try:
            sol = solve_minimal(problem)
        except SolverError as exc:
            raise type(exc)(f"trace failed at power {n}: {exc}") from exc
        y_norm = sol.minimizer_norm
        ratio = None if prev_norm is None else float(prev_norm / y_norm)
        records.append(TraceRecord(power=n, solution=sol, ratio=ratio))
        prev_norm = y_norm
    return IterationTrace(
        records=tuple(records), x0=x0.copy(), epsilon=float(epsilon),
        kind=op.space.kind, lambda_factor=float(lambda_factor), operator=op,
    )


@dataclass(frozen=True)
class SubsequencePlan:
    """Powers n_1 < n_2 < ... whose ratios decay geometrically by rho."""

    indices: tuple
    rho: float
    achieved_ratios: tuple
    decaying: bool  # at least two selected indices

    @property
    def length(self) -> int:
        return len(self.indices)


def select_subsequence(trace: IterationTrace, rho: float) -> SubsequencePlan:
    """Greedy pick: start at the first ratio, then demand a factor-rho drop.

    A plan of length < 2 (no second ratio ever dropped far enough) is a
    valid outcome flagged by ``decaying=False``; it is what happens for
    operators that are far from quasinilpotent, such as the identity.
    """
    if not 0.0 < rho < 1.0:
        raise InvalidProblemError(f"decay factor must be in (0,1), got {rho}")
    indices, ratios = [], []
    last = None
    for rec in trace.records[1:]:
        if rec.ratio is None:
            continue
        if last is None or rec.ratio <= rho * last:
            indices.append(rec.power)
            ratios.append(rec.ratio)
            last = rec.ratio
    return SubsequencePlan(
        indices=tuple(indices), rho=float(rho),
        achieved_ratios=tuple(ratios), decaying=len(indices) >= 2,
    )


@dataclass(frozen=True)
class ContrapositiveReport:
    """If ratios never drop below delta, norms of powers stay >= delta^n/lambda."""

    delta: float
    hypothesis_holds: bool  # every ratio > delta
    vacuous: bool
    powers: tuple
    norms: tuple
    bounds: tuple
    slacks: tuple
    passed: bool


def check_quasinilpotence_contrapositive(trace: IterationTrace, delta: float,
                                         op: OperatorHandle | None = None
                                         ) -> ContrapositiveReport:
    """Evaluate the norm lower bound that contradicts quasinilpotence.

    The chain ||Q^n y_{n+1}|| >= d_1 >= ||y_1||/lambda combined with
    ||y_1|| >= delta^n ||y_{n+1}|| forces ||Q^n|| >= delta^n / lambda
    whenever all ratios exceed delta. Report-only: a ratio at or below
    delta makes the implication vacuous, which is the expected outcome
    for a quasinilpotent operator.
    """
    op = op if op is not None else trace.operator
    ratios = [r for r in trace.ratios if r is not None]
    hypothesis = all(r > delta for r in ratios)
    powers, norms, bounds, slacks = [], [], [], []
    lam = trace.lambda_factor
    for rec in trace.records:
        n = rec.power
        norm_n = operator_norm(op.power(n), trace.kind)
        bound_n = delta ** n / lam
        powers.append(n)
        norms.append(float(norm_n))
        bounds.append(float(bound_n))
        slacks.append(float(norm_n - bound_n))
    passed = (not hypothesis) or all(s >= -1e-9 for s in slacks)
    return ContrapositiveReport(
        delta=float(delta), hypothesis_holds=hypothesis, vacuous=not hypothesis,
        powers=tuple(powers), norms=tuple(norms), bounds=tuple(bounds),
        slacks=tuple(slacks), passed=passed,
    )


@dataclass(frozen=True)
class WEstimate:
    """Iterates w_i = K Q^{n_i - 1} y_{n_i - 1} and their Cauchy residuals."""

    w: np.ndarray
    iterates: tuple
    cauchy_residuals: tuple
    lower_bound: float
    contracting: bool

    def __post_init__(self):
        self.w.flags.writeable = False


def estimate_w(trace: IterationTrace, plan: SubsequencePlan,
               k_op: CommutantElement) -> WEstimate:
    """Realize the limit vector w through the norm-1 commutant element K.

    Every iterate lies in K applied to the ball B(x0, eps), so its norm is
    at least ||K x0|| - eps ||K||; that lower bound must be positive for
    the construction to make sense and is re-certified here.
    """
    if plan.length == 0:
        raise InvalidProblemError("cannot estimate w from an empty subsequence plan")
    if k_op.op_norm > 1.0 + 1e-9:
        raise InvalidProblemError(
            f"commutant element must have norm <= 1, got {k_op.op_norm:.6g}"
        )
    kx0 = k_op.matrix @ trace.x0
    lower = vector_norm(kx0, trace.kind) - trace.epsilon * k_op.op_norm
    if lower <= 0.0:
        raise HypothesisViolatedError(
            "the ball condition fails: ||K x0|| - eps ||K|| = "
            f"{lower:.6g} <= 0, so 0 may enter K B(x0, eps)"
        )
    iterates = []
    for n_i in plan.indices:
        y_prev = trace.record_for_power(n_i - 1).solution.minimizer
        image = trace.operator.power(n_i - 1) @ y_prev if n_i > 1 else y_prev
        iterates.append(k_op.matrix @ image)
    cauchy = tuple(
        float(vector_norm(b - a, trace.kind))
        for a, b in zip(iterates, iterates[1:])
    )
    contracting = len(cauchy) < 2 or cauchy[-1] <= cauchy[0]
    w = iterates[-1].copy()
    if vector_norm(w, trace.kind) <= 0.0:
        raise SolverError("limit vector estimate collapsed to zero")
    return WEstimate(
        w=w, iterates=tuple(iterates), cauchy_residuals=cauchy,
        lower_bound=float(lower), contracting=contracting,
    )


@dataclass(frozen=True)
class GEstimate:
    """Cluster-averaged realization of the weak* limit of the f_{n_i}."""

    g: Functional
    cluster_powers: tuple
    cluster_diameter: float
    diameter_cap: float
    low_confidence: bool
    g_x0: float


def estimate_g(trace: IterationTrace, plan: SubsequencePlan,
               diameter_cap: float = DEFAULT_CLUSTER_CAP) -> GEstimate:
    """Average the largest tight cluster among the selected functionals.

    In finite dimensions a weak* cluster point is a norm cluster point, so
    the largest sub-collection with pairwise dual distance <= diameter_cap
    stands in for the convergent subsequence; its renormalized mean is g.
    With no cluster of size 2 the last functional is returned, flagged.
    """
    if plan.length == 0:
        raise InvalidProblemError("cannot estimate g from an empty subsequence plan")
    functionals = [trace.record_for_power(n).solution.functional for n in plan.indices]
    dual_kind = functionals[0].dual_kind
    count = len(functionals)
    dist = np.zeros((count, count))
    for i in range(count):
        for j in range(i + 1, count):
            dij = vector_norm(
                functionals[i].coefficients - functionals[j].coefficients, dual_kind
            )
            dist[i, j] = dist[j, i] = dij

    best_members = [count - 1]
    for start in range(count):
        members = [start]
        for j in range(count):
            if j == start:
                continue
            if all(dist[j, m] <= diameter_cap for m in members):
                members.append(j)
        if len(members) > len(best_members):
            best_members = sorted(members)

    if len(best_members) < 2:
        g = functionals[-1]
        chosen = [count - 1]
        low_confidence = True
        diameter = 0.0
    else:
        chosen = best_members
        mean = np.mean([functionals[i].coefficients for i in chosen], axis=0)
        mean_norm = vector_norm(mean, dual_kind)
        if mean_norm <= 0.0:
            raise SolverError("cluster mean vanished; functionals cancel out")
        g = Functional(coefficients=mean / mean_norm, dual_kind=dual_kind)
        low_confidence = False
        diameter = float(max(dist[i, j] for i in chosen for j in chosen))

    g_x0 = float(g.coefficients @ trace.x0)
    if g_x0 < trace.epsilon - 1e-9:
        raise SolverError(
            f"g(x0) = {g_x0:.9g} fell below epsilon = {trace.epsilon:.9g}; "
            "the cluster average lost the separation property"
        )
    return GEstimate(
        g=g, cluster_powers=tuple(plan.indices[i] for i in chosen),
        cluster_diameter=diameter, diameter_cap=float(diameter_cap),
        low_confidence=low_confidence, g_x0=g_x0,
    )


@dataclass(frozen=True)
class LimitEstimate:
    """Joint (w, g) realization used by the annihilation verdict."""

    w_part: WEstimate
    g_part: GEstimate
    k_op: CommutantElement

    @property
    def w(self) -> np.ndarray:
        return self.w_part.w

    @property
    def g(self) -> Functional:
        return self.g_part.g


def estimate_limits(trace: IterationTrace, plan: SubsequencePlan,
                    k_op: CommutantElement,
                    diameter_cap: float = DEFAULT_CLUSTER_CAP) -> LimitEstimate:
    return LimitEstimate(
        w_part=estimate_w(trace, plan, k_op),
        g_part=estimate_g(trace, plan, diameter_cap),
        k_op=k_op,
    )


@dataclass(frozen=True)
class AlphaRecord:
    """One step of the decomposition T K y_{n_i-1} = alpha_i y_{n_i} + r_i."""

    index: int
    power: int
    alpha: float
    bound: float  # lambda ||T|| ratio_{n_i}
    membership_residual: float  # |(Q*^{n_i} f_{n_i})(r_i)|
    pairing_scale: float
    convergent: float  # |f_{n_i}(Q^{n_i} T K y_{n_i-1})|
    envelope: float  # |alpha_i| (||x0|| + eps)


def alpha_sequence(trace: IterationTrace, plan: SubsequencePlan,
                   t_elem: CommutantElement, k_op: CommutantElement) -> tuple:
    """Project T K y_{n_i-1} onto y_{n_i} along the pairing Q*^{n_i} f_{n_i}.

    The certified bound |alpha_i| <= lambda ||T|| ratio_i comes from the
    norm-attainment inequality in the denominator; the residual r_i lies
    in the kernel of the pairing by construction, and its recorded value
    is a pure floating-point diagnostic.
    """
    records = []
    lam = trace.lambda_factor
    for idx, n_i in enumerate(plan.indices):
        rec = trace.record_for_power(n_i)
        prev = trace.record_for_power(n_i - 1)
        f = rec.solution.functional
        adj = trace.operator.power(n_i).T @ f.coefficients
        y = rec.solution.minimizer
        denom = float(adj @ y)
        scale = vector_norm(adj, f.dual_kind) * rec.minimizer_norm
        if abs(denom) < PAIRING_FLOOR_FACTOR * scale:
            raise DegenerateDecompositionError(
                f"pairing (Q*^{n_i} f)(y) = {denom:.3e} is numerically zero "
                f"against scale {scale:.3e}; the norm-attainment inequality failed"
            )
        moved = t_elem.matrix @ (k_op.matrix @ prev.solution.minimizer)
        numer = float(adj @ moved)
        alpha = numer / denom
        residual_vec = moved - alpha * y
        membership = abs(float(adj @ residual_vec))
        ratio = rec.ratio if rec.ratio is not None else float("inf")
        bound = lam * t_elem.op_norm * ratio
        records.append(AlphaRecord(
            index=idx, power=n_i, alpha=alpha, bound=float(bound),
            membership_residual=membership, pairing_scale=float(scale),
            convergent=abs(numer),
            envelope=abs(alpha) * (vector_norm(trace.x0, trace.kind) + trace.epsilon),
        ))
    return tuple(records)


@dataclass(frozen=True)
class AnnihilationEntry:
    """Annihilation numbers for a single commutant test element T."""

    label: str
    t_norm: float
    value: float  # |g(T Q w)|
    normalized: float  # value / (||T|| ||Qw||), 0 when T = 0
    alphas: tuple  # AlphaRecord sequence for this T
    envelope_ok: bool  # convergent_i <= envelope_i + tol for every i


@dataclass(frozen=True)
class AnnihilationReport:
    entries: tuple
    qw_norm: float

    def entry(self, label):
        for e in self.entries:
            if e.label == label:
                return e
        raise KeyError(label)


def verify_annihilation(trace: IterationTrace, plan: SubsequencePlan,
                        limits: LimitEstimate, t_samples) -> AnnihilationReport:
    """Evaluate |g(T Q w)| for each test element and its certified envelope.

    The pairing f_{n_i}(Q^{n_i} T K y_{n_i-1}) converges to g(TQw); its
    magnitude is bounded by |alpha_i| (||x0|| + eps) at every step, so
    the envelope sequence is the certificate that the limit must be 0.
    """
    g = limits.g
    w = limits.w
    qw = trace.operator.matrix @ w
    qw_norm = vector_norm(qw, trace.kind)
    entries = []
    for t_elem in t_samples:
        value = abs(float(g.coefficients @ (t_elem.matrix @ qw)))
        denom = t_elem.op_norm * qw_norm
        normalized = value / denom if denom > 0.0 else 0.0
        alphas = alpha_sequence(trace, plan, t_elem, limits.k_op)
        envelope_ok = all(
            a.convergent <= a.envelope + 1e-9 * max(1.0, a.pairing_scale)
            for a in alphas
        )
        entries.append(AnnihilationEntry(
            label=t_elem.label, t_norm=t_elem.op_norm, value=value,
            normalized=normalized, alphas=alphas, envelope_ok=envelope_ok,
        ))
    return AnnihilationReport(entries=tuple(entries), qw_norm=float(qw_norm))
