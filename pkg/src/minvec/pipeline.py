"""Pipeline: run a scenario end to end and collect every check.

Stages build on each other: ``solve`` performs the per-power solves with
their certificates, ``trace`` adds the decay analysis (subsequence plan,
contrapositive norm bounds), ``subspace`` adds the limit objects, the
alpha pairing sequence, and the candidate invariant subspace. A solver
failure aborts with the stage named; a failed numeric check never raises,
it becomes a finding in the result.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import SolverError
from .iteration import (
    alpha_sequence,
    check_quasinilpotence_contrapositive,
    estimate_limits,
    run_trace,
    select_subsequence,
    verify_annihilation,
)
from .operators import _poly_label, commutant_sample, operator_norm
from .scenario import Scenario
from .solver import MinimalProblem, certificate_report
from .spaces import SpaceSpec
from .subspace import (
    build_candidate,
    invariance_residual,
    numerical_support,
    properness_check,
)

STAGES = ("solve", "trace", "subspace")

#: Projector health thresholds (assembled-basis sanity, not scenario-tunable).
PROJECTOR_IDEMPOTENCE_TOL = 1e-10
PROJECTOR_SYMMETRY_TOL = 1e-12


def _check(name: str, value: float, tolerance: float, passed: bool,
           detail: str) -> dict:
    return {
        "name": name, "value": float(value), "tolerance": float(tolerance),
        "passed": bool(passed), "detail": detail,
    }


@dataclass
class PipelineResult:
    """Everything a run produced, checks and findings included."""

    scenario: Scenario
    stage: str
    operator: object
    x0: np.ndarray
    epsilon: float
    trace: object = None
    certificates: tuple = ()
    plan: object = None
    contrapositive: object = None
    delta: float | None = None
    limits: object = None
    alphas: tuple = ()  # (label, records) pairs
    annihilation: object = None
    support: object = None
    w_supported: np.ndarray | None = None
    candidate: object = None
    invariance: tuple = ()  # (label, residual) pairs
    properness: object = None
    checks: list = field(default_factory=list)

    @property
    def findings(self) -> tuple:
        return tuple(c["name"] for c in self.checks if not c["passed"])

    @property
    def passed(self) -> bool:
        return not self.findings


def _staged(stage_name: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except SolverError as exc:
        if str(exc).startswith("stage "):
            raise
        raise type(exc)(f"stage {stage_name}: {exc}") from exc


def _solve_stage(result: PipelineResult, scn: Scenario):
    trace = _staged("solve", run_trace, result.operator, result.x0,
                    result.epsilon, scn.powers, scn.lambda_factor,
                    root_tol=scn.tolerances["root"],
                    cert_tol=scn.tolerances["certificate"])
    result.trace = trace
    tol = scn.tolerances
    certs = []
    for rec in trace.records:
        sol = rec.solution
        n = rec.power
        prob = _trace_problem(trace, n, scn)
        cert = _staged("certificates", certificate_report, sol, prob,
                       seed=scn.seed + n)
        certs.append(cert)
        scale = max(1.0, abs(sol.level), sol.adjoint_norm * sol.min_norm)
        result.checks.append(_check(
            f"power {n}: residual matches epsilon",
            abs(sol.residual_norm - result.epsilon), tol["certificate"],
            abs(sol.residual_norm - result.epsilon) <= tol["certificate"],
            "| ||Q^n y - x0|| - eps | <= tol"))
        result.checks.append(_check(
            f"power {n}: functional sees center",
            sol.f_x0 - result.epsilon, tol["certificate"],
            sol.f_x0 >= result.epsilon - tol["certificate"],
            "f(x0) - eps >= -tol"))
        ratio_gap = abs(sol.adjoint_norm - sol.level / sol.min_norm)
        ratio_ref = sol.level / sol.min_norm
        result.checks.append(_check(
            f"power {n}: adjoint norm equals c/d",
            ratio_gap / ratio_ref, tol["adjoint_ratio"],
            ratio_gap <= tol["adjoint_ratio"] * ratio_ref,
            "relative gap in ||Q*^n f|| = c/d"))
        result.checks.append(_check(
            f"power {n}: attainment slack",
            sol.eq1_slack, tol["certificate"] * scale,
            sol.eq1_slack >= -tol["certificate"] * scale,
            "(Q*^n f)(y) - ||Q*^n f|| ||y|| / lambda >= -tol*scale"))
        for chk in cert.checks:
            result.checks.append(_check(
                f"power {n}: {chk.name}", chk.slack, chk.tolerance,
                chk.passed, chk.details or "sampled certificate"))
    result.certificates = tuple(certs)


def _trace_problem(trace, n: int, scn: Scenario):
    return MinimalProblem(
        operator=trace.operator, power=n, x0=trace.x0, epsilon=trace.epsilon,
        lambda_target=trace.lambda_factor, root_tol=scn.tolerances["root"],
        cert_tol=scn.tolerances["certificate"],
    )


def _trace_stage(result: PipelineResult, scn: Scenario):
    trace = result.trace
    plan = _staged("plan", select_subsequence, trace, scn.rho)
    result.plan = plan
    result.checks.append(_check(
        "subsequence plan decays", float(plan.length), 2.0, plan.decaying,
        "at least two indices with geometrically decaying ratios"))
    delta = scn.delta
    if delta is None:
        delta = min(trace.ratios) / 2.0
    result.delta = float(delta)
    contra = _staged("contrapositive", check_quasinilpotence_contrapositive,
                     trace, delta, result.operator)
    result.contrapositive = contra
    worst = min(contra.slacks) if contra.slacks else 0.0
    result.checks.append(_check(
        "contrapositive norm bound", worst, 1e-9, contra.passed,
        f"||Q^n|| >= delta^n / lambda for every traced n (delta={delta!r}), "
        "vacuous when some ratio <= delta"))


def _subspace_stage(result: PipelineResult, scn: Scenario):
    trace, plan = result.trace, result.plan
    op = result.operator
    tol = scn.tolerances
    j = scn.commutant_power
    coeffs = np.zeros(j + 1)
    coeffs[j] = 1.0
    norm_qj = _staged("limits", operator_norm, op.power(j), scn.kind)
    coeffs[j] = 1.0 / norm_qj
    k_op = commutant_sample(op, coeffs, scn.kind,
                            label=f"Q^{j}/||Q^{j}||" if j > 1 else "Q/||Q||")
    limits = _staged("limits", estimate_limits, trace, plan, k_op,
                     diameter_cap=tol["cluster_cap"])
    result.limits = limits
    result.checks.append(_check(
        "limit vector stays away from zero", limits.w_part.lower_bound, 0.0,
        limits.w_part.lower_bound > 0.0, "||K x0|| - eps ||K|| > 0"))
    result.checks.append(_check(
        "limit functional sees center", limits.g_part.g_x0, tol["g_margin"],
        limits.g_part.g_x0 >= result.epsilon - tol["g_margin"],
        "g(x0) >= eps - tol"))

    alphas = []
    t_samples = []
    for t_coeffs in scn.alpha_samples:
        t_elem = commutant_sample(op, t_coeffs, scn.kind,
                                  label=_poly_label(t_coeffs))
        t_samples.append(t_elem)
        records = _staged("alpha", alpha_sequence, trace, plan, t_elem, k_op)
        alphas.append((t_elem.label, records))
        for rec in records:
            slack = tol["alpha_slack"] * rec.pairing_scale
            result.checks.append(_check(
                f"alpha bound, T={t_elem.label}, n={rec.power}",
                abs(rec.alpha), rec.bound + slack,
                abs(rec.alpha) <= rec.bound + slack,
                "|alpha| <= lambda ||T|| ratio + tol*scale"))
            result.checks.append(_check(
                f"alpha envelope, T={t_elem.label}, n={rec.power}",
                rec.convergent, rec.envelope,
                rec.convergent <= rec.envelope * (1.0 + 1e-12) + 1e-300,
                "|f(Q^n T K y_prev)| <= |alpha| (||x0|| + eps)"))
    result.alphas = tuple(alphas)

    report = _staged("alpha", verify_annihilation, trace, plan, limits, t_samples)
    result.annihilation = report
    for entry in report.entries:
        threshold = tol["annihilation_factor"] * entry.alphas[-1].envelope
        result.checks.append(_check(
            f"annihilation, T={entry.label}", entry.value, threshold,
            entry.value <= threshold,
            "|g(T Q w)| within a factor of the last alpha envelope"))

    w_supported, support = _staged(
        "subspace", numerical_support, limits.w_part.w, tol["support"])
    result.support = support
    result.w_supported = w_supported
    cand = _staged("subspace", build_candidate, op, w_supported,
                   scn.degree, tol["rank"])
    result.candidate = cand
    result.checks.append(_check(
        "candidate subspace proper", float(cand.dim), float(op.dim - 1),
        1 <= cand.dim <= op.dim - 1, "1 <= dim <= n-1"))
    projector = cand.projector
    result.checks.append(_check(
        "projector idempotent",
        float(np.linalg.norm(projector @ projector - projector)),
        PROJECTOR_IDEMPOTENCE_TOL,
        np.linalg.norm(projector @ projector - projector)
        <= PROJECTOR_IDEMPOTENCE_TOL,
        "||P^2 - P|| <= tol"))
    result.checks.append(_check(
        "projector symmetric",
        float(np.linalg.norm(projector - projector.T)),
        PROJECTOR_SYMMETRY_TOL,
        np.linalg.norm(projector - projector.T) <= PROJECTOR_SYMMETRY_TOL,
        "||P - P^T|| <= tol"))

    inv_elems = [commutant_sample(op, c, scn.kind, label=_poly_label(c))
                 for c in scn.invariance_samples]
    inv_elems.append(k_op)
    pairs = []
    for elem in inv_elems:
        residual = invariance_residual(cand, elem.matrix)
        pairs.append((elem.label, residual))
        result.checks.append(_check(
            f"invariance, A={elem.label}", residual, tol["invariance"],
            residual <= tol["invariance"],
            "max_b ||(I-P) A b|| / ||A b|| over basis columns"))
    result.invariance = tuple(pairs)

    space = SpaceSpec(dim=op.dim, kind=scn.kind)
    prop = properness_check(cand, limits.g_part.g, space)
    result.properness = prop
    result.checks.append(_check(
        "annihilation residual reported", prop.annihilation_residual,
        float("inf"), True,
        "max |g(b)| over basis columns; informational, threshold-free"))


def run_pipeline(scn: Scenario, stage: str = "subspace",
                 operator=None) -> PipelineResult:
    """Execute the scenario up to the requested stage.

    ``operator`` injects a prebuilt handle (the estimator facade passes an
    in-memory matrix this way); by default the scenario's own spec is built.
    """
    if stage not in STAGES:
        raise ValueError(f"stage must be one of {STAGES}, got {stage!r}")
    if operator is None:
        operator = scn.build_operator()
    x0 = scn.realize_x0(operator)
    epsilon = scn.realize_epsilon(x0)
    result = PipelineResult(
        scenario=scn, stage=stage, operator=operator, x0=x0, epsilon=epsilon)
    _solve_stage(result, scn)
    if stage in ("trace", "subspace"):
        _trace_stage(result, scn)
    if stage == "subspace":
        _subspace_stage(result, scn)
    return result
