"""Minimal-vector solves: min ||z|| subject to ||Q^n z - x0|| <= eps.

Produces the full certified bundle for one power n: the minimal vector y,
the minimal (separating) functional f with dual norm 1, the separation
level c = f(Q^n y), and the optimal value d = ||y||. The l2 path runs on
the SVD of Q^n with a monotone scalar root-find; the l1/linf paths encode
the problem as an epigraph LP and read f off the ball-row duals.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateInputError,
    InjectivityError,
    InvalidProblemError,
    SolverError,
)
from .operators import OperatorHandle, operator_norm
from .simplex import LE, LpStatus, make_lp, solve_lp
from .spaces import Functional, NormKind, vector_norm
from .validation import as_vector

DEFAULT_ROOT_TOL = 1e-12
DEFAULT_CERT_TOL = 1e-9
#: Relative floor on singular values of Q^n before the power is declared
#: numerically non-injective.
POWER_SINGULARITY_FACTOR = 1e-14


@dataclass(frozen=True)
class MinimalProblem:
    """One ball-constrained norm minimization instance for the power n."""

    operator: OperatorHandle
    power: int
    x0: np.ndarray
    epsilon: float
    lambda_target: float = 1.0
    root_tol: float = DEFAULT_ROOT_TOL
    cert_tol: float = DEFAULT_CERT_TOL

    def __post_init__(self):
        x0 = as_vector(self.x0, dim=self.operator.dim, name="x0")
        x0 = x0.copy()
        x0.flags.writeable = False
        object.__setattr__(self, "x0", x0)
        if self.power < 1:
            raise InvalidProblemError(f"power must be >= 1, got {self.power}")
        if self.lambda_target < 1.0:
            raise InvalidProblemError(
                f"minimality factor must be >= 1, got {self.lambda_target}"
            )
        x0_norm = vector_norm(x0, self.kind)
        if not 0.0 < self.epsilon < x0_norm:
            raise InvalidProblemError(
                f"epsilon must lie in (0, ||x0||) = (0, {x0_norm:.6g}), "
                f"got {self.epsilon}"
            )
        if not self.operator.is_injective:
            raise InjectivityError(
                "operator fails the injectivity check "
                f"(smallest singular value {self.operator.smallest_singular_value:.3e})"
            )

    @property
    def kind(self) -> NormKind:
        return self.operator.space.kind

    @property
    def x0_norm(self) -> float:
        return vector_norm(self.x0, self.kind)


@dataclass(frozen=True)
class MinimalSolution:
    """Certified output of one minimal-vector solve.

    ``min_norm`` is always the exact optimum d; a relaxed solution keeps d
    while its ``minimizer`` is some feasible y' with ||y'|| <= lambda * d.
    """

    minimizer: np.ndarray
    functional: Functional
    level: float
    min_norm: float
    residual_norm: float
    eq1_slack: float
    adjoint_norm: float
    f_x0: float
    power: int
    lambda_factor: float = 1.0
    relaxed: bool = False

    def __post_init__(self):
        self.minimizer.flags.writeable = False

    @property
    def minimizer_norm(self) -> float:
        return vector_norm(self.minimizer, self.functional.dual_kind.dual())


def _finish_solution(problem, a_mat, y, f_coeffs, relaxed=False,
                     min_norm=None, level=None):
    """Assemble a MinimalSolution, recomputing every derived quantity."""
    kind = problem.kind
    f = Functional(coefficients=f_coeffs, dual_kind=kind.dual())
    residual = vector_norm(a_mat @ y - problem.x0, kind)
    d = vector_norm(y, kind) if min_norm is None else float(min_norm)
    if d <= 0.0:
        raise SolverError("minimal norm collapsed to 0; the ball contains 0")
    adj = a_mat.T @ f.coefficients
    adjoint_norm = vector_norm(adj, kind.dual())
    c = float(f.coefficients @ (a_mat @ y)) if level is None else float(level)
    lam = problem.lambda_target
    y_norm = vector_norm(y, kind)
    eq1_slack = float(adj @ y - (1.0 / lam) * adjoint_norm * y_norm)
    return MinimalSolution(
        minimizer=y.copy(),
        functional=f,
        level=c,
        min_norm=d,
        residual_norm=float(residual),
        eq1_slack=eq1_slack,
        adjoint_norm=float(adjoint_norm),
        f_x0=float(f.coefficients @ problem.x0),
        power=problem.power,
        lambda_factor=lam,
        relaxed=relaxed,
    )


def _power_matrix(problem) -> np.ndarray:
    a = problem.operator.power(problem.power)
    svals = np.linalg.svd(a, compute_uv=False)
    if svals[-1] <= POWER_SINGULARITY_FACTOR * svals[0]:
        raise InjectivityError(
            f"operator power {problem.power} is numerically singular "
            f"(singular value ratio {svals[-1] / max(svals[0], 1e-300):.3e})"
        )
    return a


def solve_l2(problem: MinimalProblem) -> MinimalSolution:
    """l2 minimal vector via the regularization path of Q^n.

    The minimizer lies on z(nu) = nu (I + nu A^T A)^{-1} A^T x0; the
    residual ||A z(nu) - x0|| is strictly decreasing in nu, so bisection
    on nu finds the unique point where the ball constraint is active.
    The minimal functional is the normalized residual direction.
    """
    if problem.kind is not NormKind.L2:
        raise InvalidProblemError(f"solve_l2 needs an l2 space, got {problem.kind.value}")
    a = _power_matrix(problem)
    u, s, vt = np.linalg.svd(a)
    w = u.T @ problem.x0
    s2 = s * s

    def residual(nu):
        return float(np.sqrt(np.sum((w / (1.0 + nu * s2)) ** 2)))

    eps = problem.epsilon
    lo, r_lo = 0.0, residual(0.0)
    hi = 1.0
    r_hi = residual(hi)
    doublings = 0
    while r_hi > eps:
        hi *= 2.0
        r_hi = residual(hi)
        doublings += 1
        if doublings > 200:
            raise SolverError(
                f"residual never fell below epsilon={eps} while expanding the "
                f"bracket (last residual {r_hi:.6g}); is the power injective?"
            )
    guard = 1e-12 * problem.x0_norm
    for _ in range(500):
        if hi - lo <= problem.root_tol * hi:
            break
        mid = 0.5 * (lo + hi)
        r_mid = residual(mid)
        if not (r_lo >= r_mid - guard and r_mid >= r_hi - guard):
            raise SolverError(
                "residual lost monotonicity during bisection "
                f"({r_lo:.6g}, {r_mid:.6g}, {r_hi:.6g})"
            )
        if r_mid > eps:
            lo, r_lo = mid, r_mid
        else:
            hi, r_hi = mid, r_mid
    # the hi endpoint keeps the iterate (weakly) inside the ball
    nu = hi
    y = vt.T @ ((nu * s / (1.0 + nu * s2)) * w)
    resid_vec = problem.x0 - a @ y
    rn = np.linalg.norm(resid_vec)
    if rn <= 0.0:
        raise SolverError("residual vector vanished; epsilon >= ||x0|| slipped through")
    f_coeffs = resid_vec / rn
    return _finish_solution(problem, a, y, f_coeffs)


def _polyhedral_lp(kind, a_bar, x0, eps):
    """Epigraph LP for min ||z|| s.t. ||a_bar z - x0|| <= eps (l1 or linf).

    Returns (lp, n, ball_plus_rows, ball_minus_rows): the ball rows come
    in (+) and (-) sign pairs whose dual multipliers reconstruct the
    minimal functional.
    """
    n = a_bar.shape[0]
    if kind is NormKind.LINF:
        # columns: z (free, n), t (>= 0)
        k = n + 1
        rows, rhs = [], []
        for i in range(n):
            r = np.zeros(k)
            r[i], r[n] = 1.0, -1.0
            rows.append(r)
            rhs.append(0.0)
            r = np.zeros(k)
            r[i], r[n] = -1.0, -1.0
            rows.append(r)
            rhs.append(0.0)
        plus, minus = [], []
        for i in range(n):
            r = np.zeros(k)
            r[:n] = a_bar[i]
            plus.append(len(rows))
            rows.append(r)
            rhs.append(x0[i] + eps)
            r = np.zeros(k)
            r[:n] = -a_bar[i]
            minus.append(len(rows))
            rows.append(r)
            rhs.append(eps - x0[i])
        c = np.zeros(k)
        c[n] = 1.0
        lower = np.concatenate([np.full(n, -np.inf), [0.0]])
        upper = np.full(k, np.inf)
    else:
        # columns: z (free, n), s (|z| epigraph, n), r (|ball residual|, n)
        k = 3 * n
        rows, rhs = [], []
        for i in range(n):
            r = np.zeros(k)
            r[i], r[n + i] = 1.0, -1.0
            rows.append(r)
            rhs.append(0.0)
            r = np.zeros(k)
            r[i], r[n + i] = -1.0, -1.0
            rows.append(r)
            rhs.append(0.0)
        plus, minus = [], []
        for i in range(n):
            r = np.zeros(k)
            r[:n] = a_bar[i]
            r[2 * n + i] = -1.0
            plus.append(len(rows))
            rows.append(r)
            rhs.append(x0[i])
            r = np.zeros(k)
            r[:n] = -a_bar[i]
            r[2 * n + i] = -1.0
            minus.append(len(rows))
            rows.append(r)
            rhs.append(-x0[i])
        r = np.zeros(k)
        r[2 * n:] = 1.0
        rows.append(r)
        rhs.append(eps)
        c = np.zeros(k)
        c[n:2 * n] = 1.0
        lower = np.concatenate([np.full(n, -np.inf), np.zeros(2 * n)])
        upper = np.full(k, np.inf)
    lp = make_lp(c=c, a=np.array(rows), b=np.array(rhs),
                 senses=[LE] * len(rows), lower=lower, upper=upper)
    return lp, n, plus, minus


def solve_polyhedral(problem: MinimalProblem) -> MinimalSolution:
    """l1/linf minimal vector via an epigraph LP.

    The operator power is normalized to unit norm before encoding so the
    LP stays well scaled even when d grows geometrically with n. The
    functional comes from the ball-row duals, renormalized to dual norm
    exactly 1, and the level c is recomputed as f(Q^n y).
    """
    kind = problem.kind
    if kind not in (NormKind.L1, NormKind.LINF):
        raise InvalidProblemError(
            f"solve_polyhedral needs an l1 or linf space, got {kind.value}"
        )
    a = _power_matrix(problem)
    sigma = operator_norm(a, kind)
    a_bar = a / sigma
    lp, n, plus, minus = _polyhedral_lp(kind, a_bar, problem.x0, problem.epsilon)
    sol = solve_lp(lp)
    if sol.status is not LpStatus.OPTIMAL:
        raise SolverError(
            f"minimal-vector LP ended {sol.status.value}; the instance should "
            "always be feasible and bounded"
        )
    w = sol.x[:n]
    y = w / sigma

    # duals of <= rows are <= 0 for a minimization; the functional's
    # coefficients are (mu_minus - mu_plus) with mu = -dual
    phi = sol.duals[plus] - sol.duals[minus]
    phi_norm = vector_norm(phi, kind.dual())
    if phi_norm <= 1e-14:
        raise SolverError("ball-row duals vanished; no separating functional found")
    phi = phi / phi_norm
    if phi @ (a @ y) < 0.0:
        phi = -phi
    return _finish_solution(problem, a, y, phi)


def solve_minimal(problem: MinimalProblem) -> MinimalSolution:
    """Dispatch on the space's norm kind."""
    if problem.kind is NormKind.L2:
        return solve_l2(problem)
    return solve_polyhedral(problem)


def relax_to_lambda(sol: MinimalSolution, problem: MinimalProblem,
                    lambda_factor: float, seed: int = 0,
                    tries: int = 8) -> MinimalSolution:
    """Trade optimality for slack: a feasible y' with d < ||y'|| <= lambda d.

    Emulates the non-attained infimum of the non-reflexive setting: y' is
    feasible and lambda-minimal but not minimal. The minimal functional f
    and the optimum d are kept, and the norm-attainment inequality is
    re-certified with the 1/lambda factor. If no perturbation survives the
    retry budget the original solution is returned unrelaxed.
    """
    if lambda_factor < 1.0:
        raise InvalidProblemError(f"lambda must be >= 1, got {lambda_factor}")
    if lambda_factor == 1.0 or sol.relaxed:
        return sol
    kind = problem.kind
    a = problem.operator.power(problem.power)
    d = sol.min_norm
    eps = problem.epsilon
    budget = (lambda_factor - 1.0) * d
    rng = np.random.default_rng(seed)

    def attempt(y_new):
        if vector_norm(y_new, kind) > lambda_factor * d:
            return None
        if vector_norm(a @ y_new - problem.x0, kind) > eps:
            return None
        return y_new

    best = None
    for _ in range(tries):
        v = rng.standard_normal(problem.operator.dim)
        vn = vector_norm(v, kind)
        if vn == 0.0:
            continue
        step = budget / vn
        for _ in range(30):
            cand = attempt(sol.minimizer + step * v)
            if cand is not None and vector_norm(cand, kind) > d:
                best = cand
                break
            step *= 0.5
        if best is not None:
            break
    if best is None:
        # deterministic fallback: walk toward the exact interior point
        # A^{-1} x0, where the residual shrinks by (1 - t)
        interior = np.linalg.solve(a, problem.x0)
        t = 1.0
        for _ in range(200):
            cand = attempt((1.0 - t) * sol.minimizer + t * interior)
            if cand is not None and vector_norm(cand, kind) > d:
                best = cand
                break
            t *= 0.5
    if best is None:
        return MinimalSolution(
            minimizer=sol.minimizer.copy(), functional=sol.functional,
            level=sol.level, min_norm=sol.min_norm,
            residual_norm=sol.residual_norm, eq1_slack=sol.eq1_slack,
            adjoint_norm=sol.adjoint_norm, f_x0=sol.f_x0, power=sol.power,
            lambda_factor=lambda_factor, relaxed=False,
        )

    relaxed_problem = MinimalProblem(
        operator=problem.operator, power=problem.power, x0=problem.x0,
        epsilon=problem.epsilon, lambda_target=lambda_factor,
        root_tol=problem.root_tol, cert_tol=problem.cert_tol,
    )
    return _finish_solution(relaxed_problem, a, best, sol.functional.coefficients,
                            relaxed=True, min_norm=d, level=sol.level)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    slack: float
    tolerance: float
    details: str = ""


@dataclass(frozen=True)
class CertificateReport:
    checks: tuple
    passed: bool
    sample_count: int

    def by_name(self, name):
        for chk in self.checks:
            if chk.name == name:
                return chk
        raise KeyError(name)


def _sample_unit_ball(rng, n, kind, count):
    """Points with ||u|| <= 1; directions Gaussian, radii pushed outward."""
    g = rng.standard_normal((count, n))
    norms = np.array([vector_norm(row, kind) for row in g])
    norms[norms == 0.0] = 1.0
    radii = rng.uniform(0.0, 1.0, count) ** (1.0 / n)
    return g / norms[:, None] * radii[:, None]


def certificate_report(sol: MinimalSolution, problem: MinimalProblem,
                       seed: int = 0, samples: int = 1000) -> CertificateReport:
    """Check the four separation facts behind a solve, with numeric slacks.

    (i) f(x0) >= eps; (ii) the hyperplane (Q*^n f) = c separates the image
    of B(0, d) from the preimage set K (sampled); (iii) ||Q*^n f|| = c/d;
    (iv) the norm-attainment slack is nonnegative. Reports never throw:
    a failed check is a finding for the caller to act on.
    """
    kind = problem.kind
    a = problem.operator.power(problem.power)
    f = sol.functional
    adj = a.T @ f.coefficients
    c, d = sol.level, sol.min_norm
    tol = problem.cert_tol
    rng = np.random.default_rng(seed)
    checks = []

    slack_i = sol.f_x0 - problem.epsilon
    checks.append(CheckResult(
        name="functional_sees_center", passed=slack_i >= -tol, slack=float(slack_i),
        tolerance=tol, details=f"f(x0)={sol.f_x0!r} vs epsilon={problem.epsilon!r}",
    ))

    pair_scale = max(1.0, abs(c), sol.adjoint_norm * d)
    ball = _sample_unit_ball(rng, problem.operator.dim, kind, samples) * d
    upper = ball @ adj
    slack_ball = float(c - np.max(upper, initial=-np.inf))
    k_dirs = _sample_unit_ball(rng, problem.operator.dim, kind, samples)
    k_points = np.linalg.solve(a, (problem.x0[None, :] + problem.epsilon * k_dirs).T).T
    lower = k_points @ adj
    slack_k = float(np.min(lower, initial=np.inf) - c)
    sep_slack = min(slack_ball, slack_k)
    checks.append(CheckResult(
        name="separation_sampled", passed=sep_slack >= -tol * pair_scale,
        slack=sep_slack, tolerance=tol * pair_scale,
        details=f"ball side {slack_ball!r}, preimage side {slack_k!r}",
    ))

    ratio = c / d
    slack_iii = abs(sol.adjoint_norm - ratio)
    checks.append(CheckResult(
        name="adjoint_norm_ratio", passed=slack_iii <= tol * max(ratio, 1e-300),
        slack=float(slack_iii), tolerance=tol * max(ratio, 1e-300),
        details=f"||Q*^n f||={sol.adjoint_norm!r} vs c/d={ratio!r}",
    ))

    eq1_scale = max(1.0, sol.adjoint_norm * vector_norm(sol.minimizer, kind))
    checks.append(CheckResult(
        name="norm_attainment", passed=sol.eq1_slack >= -tol * eq1_scale,
        slack=float(sol.eq1_slack), tolerance=tol * eq1_scale,
        details=f"factor 1/{sol.lambda_factor!r}",
    ))

    return CertificateReport(
        checks=tuple(checks), passed=all(chk.passed for chk in checks),
        sample_count=samples,
    )
