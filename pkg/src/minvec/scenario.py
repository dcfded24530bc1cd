"""Scenario files: JSON descriptions of a full pipeline run.

A scenario pins everything the pipeline needs: the operator (gallery entry
or CSV matrix), the norm, the center x0, epsilon, the trace depth, the
relaxation factor lambda, the decay target rho, the Krylov degree, every
tolerance, and the seed. Identical scenario + seed must reproduce outputs
byte for byte, so all defaults are resolved here, once, into a frozen
object that the rest of the pipeline treats as read-only.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ScenarioError
from .gallery import GalleryKind, GallerySpec, build, norming_setup
from .operators import OperatorHandle
from .spaces import NormKind, vector_norm

X0_SOURCES = ("ones", "explicit", "norming")

DEFAULT_TOLERANCES = {
    "root": 1e-12,         # scalar root finding inside the L2 solver
    "certificate": 1e-9,   # feasibility / Eq. (1) slack floors
    "adjoint_ratio": 1e-8, # relative tolerance on ||Q*^n f|| = c/d
    "rank": 1e-10,         # Krylov rank-revealing cut
    "support": 1e-6,       # numerical support truncation of w
    "cluster_cap": 0.1,    # dual-distance cap when clustering functionals
    "invariance": 1e-6,    # subspace leakage threshold
    "g_margin": 1e-8,      # slack allowed in g(x0) >= epsilon
    "annihilation_factor": 10.0,  # multiple of the last alpha envelope
    "alpha_slack": 1e-9,   # absolute slack in the alpha bound, times scale
}

DEFAULT_ALPHA_SAMPLES = ((1.0,), (0.0, 1.0), (0.0, 1.0, 2.0))
DEFAULT_INVARIANCE_SAMPLES = ((1.0,), (0.0, 1.0), (0.0, 0.0, 1.0), (0.0, 1.0, 2.0))


@dataclass(frozen=True)
class Scenario:
    """A fully resolved, validated run description."""

    name: str
    operator_spec: GallerySpec
    kind: NormKind
    x0_source: str
    x0_vector: np.ndarray | None
    epsilon: float | None  # None = ||x0|| / 3, resolved against the realized x0
    powers: int
    lambda_factor: float
    rho: float
    degree: int
    commutant_power: int
    delta: float | None  # None = half the smallest observed ratio
    seed: int
    out_dir: str | None
    tolerances: dict = field(default_factory=dict)
    alpha_samples: tuple = DEFAULT_ALPHA_SAMPLES
    invariance_samples: tuple = DEFAULT_INVARIANCE_SAMPLES

    def build_operator(self) -> OperatorHandle:
        return build(self.operator_spec, self.kind)

    def realize_x0(self, op: OperatorHandle) -> np.ndarray:
        if self.x0_source == "explicit":
            return np.asarray(self.x0_vector, dtype=float)
        if self.x0_source == "ones":
            ones = np.ones(op.dim)
            return ones / vector_norm(ones, self.kind)
        setup = norming_setup(op)
        return setup.x0

    def realize_epsilon(self, x0: np.ndarray) -> float:
        if self.epsilon is not None:
            return self.epsilon
        return vector_norm(x0, self.kind) / 3.0

    def as_dict(self) -> dict:
        """JSON-ready echo of every resolved field, for the report."""
        spec = self.operator_spec
        out = {
            "name": self.name,
            "operator": {
                "gallery": spec.kind.value,
                "size": spec.size,
                "eta": spec.eta,
                "weights": list(spec.weights) if spec.weights else None,
                "path": spec.path or None,
            },
            "norm": self.kind.value,
            "x0": {
                "source": self.x0_source,
                "vector": None if self.x0_vector is None else list(self.x0_vector),
            },
            "epsilon": self.epsilon,
            "powers": self.powers,
            "lambda": self.lambda_factor,
            "rho": self.rho,
            "degree": self.degree,
            "commutant_power": self.commutant_power,
            "delta": self.delta,
            "seed": self.seed,
            "tolerances": dict(self.tolerances),
            "alpha_samples": [list(c) for c in self.alpha_samples],
            "invariance_samples": [list(c) for c in self.invariance_samples],
        }
        return out


def _fail(msg: str) -> ScenarioError:
    return ScenarioError(f"scenario: {msg}")


def _expect(cond: bool, msg: str):
    if not cond:
        raise _fail(msg)


def _number(raw, name: str) -> float:
    _expect(isinstance(raw, (int, float)) and not isinstance(raw, bool),
            f"{name} must be a number, got {raw!r}")
    return float(raw)


def _coeff_lists(raw, name: str) -> tuple:
    _expect(isinstance(raw, list) and raw, f"{name} must be a non-empty list of lists")
    out = []
    for i, entry in enumerate(raw):
        _expect(isinstance(entry, list) and entry,
                f"{name}[{i}] must be a non-empty list of numbers")
        out.append(tuple(_number(c, f"{name}[{i}]") for c in entry))
    return tuple(out)


def _parse_operator(raw) -> GallerySpec:
    _expect(isinstance(raw, dict), "operator must be an object")
    if "matrix_path" in raw:
        path = raw["matrix_path"]
        _expect(isinstance(path, str) and path, "operator.matrix_path must be a path")
        return GallerySpec(kind=GalleryKind.DENSE_USER, size=0, path=path)
    name = raw.get("gallery")
    _expect(isinstance(name, str), "operator.gallery is required (or matrix_path)")
    try:
        kind = GalleryKind(name)
    except ValueError:
        raise _fail(f"unknown gallery operator {name!r}") from None
    _expect(kind is not GalleryKind.DENSE_USER,
            "dense_user requires operator.matrix_path")
    size = raw.get("size")
    _expect(isinstance(size, int) and not isinstance(size, bool) and size >= 2,
            "operator.size must be an integer >= 2")
    eta = _number(raw.get("eta", 1e-8), "operator.eta")
    weights = raw.get("weights")
    if weights is None:
        weights = ()
    else:
        _expect(isinstance(weights, list) and len(weights) == size - 1,
                f"operator.weights must list {size - 1} values")
        weights = tuple(_number(v, "operator.weights") for v in weights)
    return GallerySpec(kind=kind, size=size, eta=eta, weights=weights)


def parse_scenario(raw: dict, name: str = "scenario") -> Scenario:
    """Validate a decoded JSON object into a Scenario, defaults resolved."""
    _expect(isinstance(raw, dict), "top level must be a JSON object")
    known = {
        "name", "operator", "norm", "x0", "epsilon", "powers", "lambda", "rho",
        "degree", "commutant_power", "delta", "seed", "out_dir", "tolerances",
        "alpha_samples", "invariance_samples",
    }
    unknown = sorted(set(raw) - known)
    _expect(not unknown, f"unknown keys {unknown}")

    spec = _parse_operator(raw.get("operator", {}))
    norm = raw.get("norm", "l2")
    try:
        kind = NormKind(norm)
    except ValueError:
        raise _fail(f"unknown norm {norm!r}") from None

    x0_raw = raw.get("x0", {})
    _expect(isinstance(x0_raw, dict), "x0 must be an object")
    unknown_x0 = sorted(set(x0_raw) - {"source", "vector"})
    _expect(not unknown_x0, f"unknown x0 keys {unknown_x0}")
    source = x0_raw.get("source", "explicit" if "vector" in x0_raw else "ones")
    _expect(source in X0_SOURCES, f"x0.source must be one of {X0_SOURCES}")
    vector = None
    if source == "explicit":
        vec_raw = x0_raw.get("vector")
        _expect(isinstance(vec_raw, list) and vec_raw, "x0.vector required for explicit")
        vector = np.array([_number(v, "x0.vector") for v in vec_raw])
        _expect(np.all(np.isfinite(vector)), "x0.vector must be finite")
        _expect(np.any(vector != 0.0), "x0.vector must be nonzero")
    else:
        _expect("vector" not in x0_raw, "x0.vector only applies to source 'explicit'")

    epsilon = raw.get("epsilon")
    if epsilon is not None:
        epsilon = _number(epsilon, "epsilon")
        _expect(epsilon > 0.0, "epsilon must be positive")

    powers = raw.get("powers", 6)
    _expect(isinstance(powers, int) and not isinstance(powers, bool) and powers >= 2,
            "powers must be an integer >= 2")
    lam = _number(raw.get("lambda", 2.0), "lambda")
    _expect(lam >= 1.0, "lambda must be >= 1")
    rho = _number(raw.get("rho", 0.5), "rho")
    _expect(0.0 < rho < 1.0, "rho must lie strictly between 0 and 1")
    degree = raw.get("degree", 12)
    _expect(isinstance(degree, int) and not isinstance(degree, bool) and degree >= 1,
            "degree must be an integer >= 1")
    cpow = raw.get("commutant_power", 12)
    _expect(isinstance(cpow, int) and not isinstance(cpow, bool) and cpow >= 1,
            "commutant_power must be an integer >= 1")
    delta = raw.get("delta")
    if delta is not None:
        delta = _number(delta, "delta")
        _expect(delta > 0.0, "delta must be positive")
    seed = raw.get("seed", 0)
    _expect(isinstance(seed, int) and not isinstance(seed, bool) and seed >= 0,
            "seed must be a non-negative integer")
    out_dir = raw.get("out_dir")
    if out_dir is not None:
        _expect(isinstance(out_dir, str) and out_dir, "out_dir must be a path")

    tol_raw = raw.get("tolerances", {})
    _expect(isinstance(tol_raw, dict), "tolerances must be an object")
    unknown_tols = sorted(set(tol_raw) - set(DEFAULT_TOLERANCES))
    _expect(not unknown_tols, f"unknown tolerance keys {unknown_tols}")
    tolerances = dict(DEFAULT_TOLERANCES)
    for key, value in tol_raw.items():
        value = _number(value, f"tolerances.{key}")
        _expect(value > 0.0, f"tolerances.{key} must be positive")
        tolerances[key] = value

    alpha_samples = DEFAULT_ALPHA_SAMPLES
    if "alpha_samples" in raw:
        alpha_samples = _coeff_lists(raw["alpha_samples"], "alpha_samples")
    invariance_samples = DEFAULT_INVARIANCE_SAMPLES
    if "invariance_samples" in raw:
        invariance_samples = _coeff_lists(raw["invariance_samples"], "invariance_samples")

    label = raw.get("name", name)
    _expect(isinstance(label, str) and label, "name must be a non-empty string")

    return Scenario(
        name=label, operator_spec=spec, kind=kind, x0_source=source,
        x0_vector=vector, epsilon=epsilon, powers=powers, lambda_factor=lam,
        rho=rho, degree=degree, commutant_power=cpow, delta=delta, seed=seed,
        out_dir=out_dir, tolerances=tolerances, alpha_samples=alpha_samples,
        invariance_samples=invariance_samples,
    )


def load_scenario(path: str) -> Scenario:
    """Read and validate a scenario JSON file."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise _fail(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise _fail(f"{path} is not valid JSON: {exc}") from exc
    return parse_scenario(raw, name=path)
