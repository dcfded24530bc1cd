"""Deterministic artifacts: report.json, trace.csv, basis.csv, plots.svg.

Numbers are serialized with Python's shortest round-trip representation,
JSON keys are sorted, and nothing time- or host-dependent is written, so a
repeated run of the same scenario produces byte-identical files. The
verify entry point re-derives every algebraic identity from the stored
vectors alone, so a report can be audited without re-running the solver.
"""

import csv
import json
import math

import numpy as np

from .errors import ScenarioError
from .operators import operator_norm
from .pipeline import PipelineResult
from .spaces import NormKind, vector_norm

VERIFY_REL_TOL = 1e-9  # consistency of stored numbers vs recomputation


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, float) and math.isinf(obj):
        return "inf" if obj > 0 else "-inf"
    return obj


def build_report(result: PipelineResult) -> dict:
    """Assemble the full JSON-ready report for a pipeline result."""
    scn = result.scenario
    op = result.operator
    report = {
        "scenario": scn.as_dict(),
        "stage": result.stage,
        "operator": {
            "matrix": op.matrix,
            "dim": op.dim,
            "norm": operator_norm(op.matrix, scn.kind),
            "kind": scn.kind.value,
        },
        "x0": result.x0,
        "epsilon": result.epsilon,
        "lambda": scn.lambda_factor,
        "solves": [],
        "checks": list(result.checks),
        "findings": list(result.findings),
        "passed": result.passed,
    }
    for rec, cert in zip(result.trace.records, result.certificates):
        sol = rec.solution
        report["solves"].append({
            "power": rec.power,
            "ratio": rec.ratio,
            "d": sol.min_norm,
            "minimizer_norm": sol.minimizer_norm,
            "level_c": sol.level,
            "adjoint_norm": sol.adjoint_norm,
            "residual": sol.residual_norm,
            "eq1_slack": sol.eq1_slack,
            "f_x0": sol.f_x0,
            "relaxed": sol.relaxed,
            "y": sol.minimizer,
            "f": sol.functional.coefficients,
            "certificate": {"passed": cert.passed,
                            "sample_count": cert.sample_count},
        })
    if result.plan is not None:
        report["plan"] = {
            "indices": result.plan.indices,
            "rho": result.plan.rho,
            "achieved_ratios": result.plan.achieved_ratios,
            "decaying": result.plan.decaying,
        }
        contra = result.contrapositive
        report["contrapositive"] = {
            "delta": contra.delta,
            "hypothesis_holds": contra.hypothesis_holds,
            "vacuous": contra.vacuous,
            "powers": contra.powers,
            "norms": contra.norms,
            "bounds": contra.bounds,
            "slacks": contra.slacks,
            "passed": contra.passed,
        }
    if result.limits is not None:
        limits = result.limits
        report["limits"] = {
            "k": {
                "label": limits.k_op.label,
                "coefficients": limits.k_op.coefficients,
                "op_norm": limits.k_op.op_norm,
                "commutation_residual": limits.k_op.commutation_residual,
            },
            "w": limits.w_part.w,
            "w_lower_bound": limits.w_part.lower_bound,
            "cauchy_residuals": limits.w_part.cauchy_residuals,
            "contracting": limits.w_part.contracting,
            "g": limits.g_part.g.coefficients,
            "g_x0": limits.g_part.g_x0,
            "cluster_powers": limits.g_part.cluster_powers,
            "cluster_diameter": limits.g_part.cluster_diameter,
            "diameter_cap": limits.g_part.diameter_cap,
            "low_confidence": limits.g_part.low_confidence,
        }
        report["alpha"] = []
        for (label, records), coeffs in zip(result.alphas, scn.alpha_samples):
            report["alpha"].append({
                "t": label,
                "t_coefficients": list(coeffs),
                "records": [{
                    "index": r.index,
                    "power": r.power,
                    "alpha": r.alpha,
                    "bound": r.bound,
                    "membership_residual": r.membership_residual,
                    "pairing_scale": r.pairing_scale,
                    "convergent": r.convergent,
                    "envelope": r.envelope,
                } for r in records],
            })
        report["annihilation"] = [{
            "t": entry.label,
            "t_norm": entry.t_norm,
            "value": entry.value,
            "normalized": entry.normalized,
            "envelope_ok": entry.envelope_ok,
        } for entry in result.annihilation.entries]
    if result.candidate is not None:
        cand = result.candidate
        report["subspace"] = {
            "support": {
                "zeroed": result.support.zeroed,
                "dropped_mass": result.support.dropped_mass,
                "support_tol": result.support.support_tol,
            },
            "w_supported": result.w_supported,
            "dim": cand.dim,
            "ambient_dim": cand.ambient_dim,
            "degree": cand.degree,
            "rank_tol": cand.rank_tol,
            "rank_profile": cand.rank_profile,
            "basis": cand.basis,
            "invariance": [{"a": label, "residual": residual}
                           for label, residual in result.invariance],
            "properness": {
                "proper": result.properness.proper,
                "annihilation_residual": result.properness.annihilation_residual,
            },
        }
    return _jsonable(report)


def write_report(report: dict, path: str):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(report, fh, sort_keys=True, indent=1)
        fh.write("\n")


TRACE_COLUMNS = ("n", "d_n", "norm_y_n", "ratio_n", "eq1_slack", "f_n_x0",
                 "residual")


def _cell(value) -> str:
    if value is None:
        return ""
    return repr(float(value))


def write_trace_csv(trace, path: str):
    """One row per power; shortest round-trip decimals, empty first ratio."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        for rec in trace.records:
            sol = rec.solution
            writer.writerow([
                rec.power,
                _cell(sol.min_norm),
                _cell(sol.minimizer_norm),
                _cell(rec.ratio),
                _cell(sol.eq1_slack),
                _cell(sol.f_x0),
                _cell(sol.residual_norm),
            ])


def write_matrix_csv(matrix, path: str):
    """Plain CSV of a dense matrix, shortest round-trip decimals."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for row in np.atleast_2d(np.asarray(matrix, dtype=float)):
            writer.writerow([repr(float(v)) for v in row])


def emit_plots(result: PipelineResult, path: str):
    """Three-panel SVG: d_n (log scale), ratios, alpha envelopes."""
    import matplotlib
    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    with plt.rc_context({"svg.hashsalt": "minvec"}):
        fig, axes = plt.subplots(3, 1, figsize=(7.0, 9.0))
        powers = [rec.power for rec in result.trace.records]
        axes[0].semilogy(powers, [rec.min_norm for rec in result.trace.records],
                         marker="o")
        axes[0].set_xlabel("power n")
        axes[0].set_ylabel("d_n")
        axes[0].set_title("minimal distance growth")
        ratio_powers = powers[1:]
        axes[1].plot(ratio_powers, list(result.trace.ratios), marker="o")
        if result.plan is not None and result.plan.decaying:
            marks = [p for p in result.plan.indices if p in ratio_powers]
            vals = [result.trace.ratios[p - 2] for p in marks]
            axes[1].plot(marks, vals, linestyle="none", marker="s",
                         markersize=10, fillstyle="none")
        axes[1].set_xlabel("power n")
        axes[1].set_ylabel("||y_{n-1}|| / ||y_n||")
        axes[1].set_title("trace ratios (squares: selected subsequence)")
        if result.alphas:
            for label, records in result.alphas:
                axes[2].semilogy([r.power for r in records],
                                 [r.envelope for r in records],
                                 marker="o", label=label)
            axes[2].legend()
        axes[2].set_xlabel("power n_i")
        axes[2].set_ylabel("|alpha_i| (||x0|| + eps)")
        axes[2].set_title("alpha envelopes")
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)


class _Verifier:
    """Recompute every stored identity; collect failures by name."""

    def __init__(self, report: dict):
        self.report = report
        self.failures = []
        self.rel_tol = VERIFY_REL_TOL

    def fail(self, name: str, message: str):
        self.failures.append(f"{name}: {message}")

    def need(self, container, key, context: str):
        if isinstance(container, dict):
            if key not in container:
                raise ScenarioError(f"verify: {context} is missing field {key!r}")
            return container[key]
        raise ScenarioError(f"verify: {context} is not an object")

    def close(self, stored: float, computed: float, scale: float = 1.0) -> bool:
        return abs(stored - computed) <= self.rel_tol * max(1.0, abs(scale))

    def run(self) -> list:
        rep = self.report
        matrix = np.asarray(self.need(rep, "operator", "report")["matrix"],
                            dtype=float)
        x0 = np.asarray(self.need(rep, "x0", "report"), dtype=float)
        eps = float(self.need(rep, "epsilon", "report"))
        lam = float(self.need(rep, "lambda", "report"))
        tols = self.need(self.need(rep, "scenario", "report"), "tolerances",
                         "scenario")
        cert_tol = float(self.need(tols, "certificate", "tolerances"))
        adj_tol = float(self.need(tols, "adjoint_ratio", "tolerances"))
        solves = self.need(rep, "solves", "report")
        powers = {}
        for entry in solves:
            n = int(self.need(entry, "power", "solve entry"))
            y = np.asarray(self.need(entry, "y", f"solve n={n}"), dtype=float)
            f = np.asarray(self.need(entry, "f", f"solve n={n}"), dtype=float)
            a = np.linalg.matrix_power(matrix, n)
            powers[n] = (entry, y, f, a)
            self._check_solve(n, entry, y, f, a, x0, eps, lam,
                              cert_tol, adj_tol)
        if "alpha" in rep:
            self._check_alphas(rep, matrix, powers, x0, eps, lam, tols)
        return self.failures

    def _check_solve(self, n, entry, y, f, a, x0, eps, lam, cert_tol, adj_tol):
        name = f"solve n={n}"
        kind = NormKind(self.need(self.report["operator"], "kind", "operator"))
        residual = float(vector_norm(a @ y - x0, kind))
        stored_residual = float(self.need(entry, "residual", name))
        if not self.close(stored_residual, residual, scale=eps):
            self.fail(name, f"stored residual {stored_residual!r} != "
                            f"recomputed {residual!r}")
        if abs(residual - eps) > cert_tol:
            self.fail(name, f"|residual - eps| = {abs(residual - eps):.3e} "
                            f"exceeds {cert_tol:.1e}")
        f_x0 = float(f @ x0)
        if f_x0 < eps - cert_tol:
            self.fail(name, f"f(x0) = {f_x0!r} < eps - tol")
        adjoint = a.T @ f
        adj_norm = float(vector_norm(adjoint, kind.dual()))
        c = float(self.need(entry, "level_c", name))
        d = float(self.need(entry, "d", name))
        if d <= 0:
            self.fail(name, f"stored d = {d!r} is not positive")
            return
        ref = c / d
        if abs(adj_norm - ref) > adj_tol * abs(ref):
            self.fail(name, f"||Q*^n f|| = {adj_norm!r} vs c/d = {ref!r} "
                            f"beyond relative {adj_tol:.1e}")
        y_norm = float(vector_norm(y, kind))
        slack = float(adjoint @ y - adj_norm * y_norm / lam)
        stored_slack = float(self.need(entry, "eq1_slack", name))
        scale = max(1.0, abs(c), adj_norm * y_norm)
        if not self.close(stored_slack, slack, scale=scale):
            self.fail(name, f"stored eq1_slack {stored_slack!r} != "
                            f"recomputed {slack!r}")
        if slack < -cert_tol * scale:
            self.fail(name, f"attainment slack {slack!r} below -tol*scale")

    def _check_alphas(self, rep, matrix, powers, x0, eps, lam, tols):
        kind = NormKind(self.need(rep["operator"], "kind", "operator"))
        limits = self.need(rep, "limits", "report")
        k_coeffs = self.need(self.need(limits, "k", "limits"), "coefficients",
                             "limits.k")
        k_mat = _poly(matrix, k_coeffs)
        alpha_slack = float(self.need(tols, "alpha_slack", "tolerances"))
        x0_norm = float(vector_norm(x0, kind))
        for group in self.need(rep, "alpha", "report"):
            label = self.need(group, "t", "alpha group")
            t_mat = _poly(matrix, self.need(group, "t_coefficients",
                                            f"alpha T={label}"))
            for rec in self.need(group, "records", f"alpha T={label}"):
                n = int(self.need(rec, "power", "alpha record"))
                name = f"alpha record T={label}, n={n}"
                if n not in powers or (n - 1) not in powers:
                    raise ScenarioError(
                        f"verify: {name} references missing solve data")
                entry_n, y_n, f_n, a_n = powers[n]
                _, y_prev, _, _ = powers[n - 1]
                numer = float(f_n @ (a_n @ (t_mat @ (k_mat @ y_prev))))
                denom = float((a_n.T @ f_n) @ y_n)
                if denom == 0.0:
                    self.fail(name, "pairing denominator vanished")
                    continue
                alpha = numer / denom
                stored_alpha = float(self.need(rec, "alpha", name))
                scale = float(self.need(rec, "pairing_scale", name))
                if not self.close(stored_alpha, alpha, scale=max(1.0, abs(alpha))):
                    self.fail(name, f"stored alpha {stored_alpha!r} != "
                                    f"recomputed {alpha!r}")
                bound = float(self.need(rec, "bound", name))
                if abs(stored_alpha) > bound + alpha_slack * scale:
                    self.fail(name, f"|alpha| = {abs(stored_alpha)!r} exceeds "
                                    f"bound {bound!r} + tol*scale")
                envelope = float(self.need(rec, "envelope", name))
                env_ref = abs(alpha) * (x0_norm + eps)
                if not self.close(envelope, env_ref, scale=max(1.0, env_ref)):
                    self.fail(name, f"stored envelope {envelope!r} != "
                                    f"|alpha| (||x0|| + eps) = {env_ref!r}")
                if abs(numer) > envelope * (1.0 + 1e-12) + 1e-300:
                    self.fail(name, "convergent exceeds its envelope")


def _poly(matrix: np.ndarray, coeffs) -> np.ndarray:
    out = np.zeros_like(matrix)
    power = np.eye(matrix.shape[0])
    for i, c in enumerate(coeffs):
        if i > 0:
            power = power @ matrix
        if c != 0.0:
            out = out + float(c) * power
    return out


def _verify_trace_csv(report: dict, trace_path: str) -> list:
    failures = []
    by_power = {int(entry["power"]): entry for entry in report["solves"]}
    try:
        with open(trace_path, encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ScenarioError(f"verify: cannot read {trace_path}: {exc}") from exc
    if not rows or tuple(rows[0]) != TRACE_COLUMNS:
        raise ScenarioError(
            f"verify: {trace_path} header {rows[0] if rows else []} != "
            f"{list(TRACE_COLUMNS)}")
    seen = set()
    for row in rows[1:]:
        if len(row) != len(TRACE_COLUMNS):
            raise ScenarioError(f"verify: malformed trace row {row}")
        n = int(row[0])
        seen.add(n)
        if n not in by_power:
            failures.append(f"trace row n={n}: no matching solve in report")
            continue
        entry = by_power[n]
        expected = {
            "d_n": entry["d"], "norm_y_n": entry["minimizer_norm"],
            "ratio_n": entry["ratio"], "eq1_slack": entry["eq1_slack"],
            "f_n_x0": entry["f_x0"], "residual": entry["residual"],
        }
        for column, ref in expected.items():
            cell = row[TRACE_COLUMNS.index(column)]
            if ref is None:
                if cell != "":
                    failures.append(f"trace row n={n}: {column} should be "
                                    f"empty, got {cell!r}")
            elif cell == "" or float(cell) != float(ref):
                failures.append(f"trace row n={n}: {column} = {cell!r} "
                                f"differs from report value {ref!r}")
    missing = sorted(set(by_power) - seen)
    if missing:
        failures.append(f"trace file lacks rows for powers {missing}")
    return failures


def verify_only(report_path: str, trace_path: str | None = None):
    """Re-check a stored run. Returns (exit_code, messages).

    0: everything re-verifies. 4: at least one identity fails (each failure
    names its record). Missing fields or unreadable files raise
    ScenarioError, which the CLI maps to exit 2.
    """
    try:
        with open(report_path, encoding="utf-8") as fh:
            report = json.load(fh)
    except OSError as exc:
        raise ScenarioError(f"verify: cannot read {report_path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"verify: {report_path} is not valid JSON: {exc}") from exc
    failures = _Verifier(report).run()
    if trace_path is not None:
        failures.extend(_verify_trace_csv(report, trace_path))
    if failures:
        return 4, failures
    return 0, ["all stored identities re-verified"]
