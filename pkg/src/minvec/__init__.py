"""minvec: minimal vectors, decay traces, and invariant subspace candidates.

The library realizes, for a dense injective operator Q on a finite
dimensional normed space, the classical minimal-vector machinery: the
unique norm-minimal preimage of a ball under Q^n, the dual functional that
certifies it, the decay of the minimizer norms along a subsequence, and
the Krylov candidate for a subspace invariant under everything commuting
with Q. Every quantity ships with a machine-checked certificate.
"""

from .errors import (
    DegenerateDecompositionError,
    DegenerateInputError,
    DimensionMismatchError,
    EstimationError,
    HypothesisViolatedError,
    InjectivityError,
    InputError,
    InvalidProblemError,
    MinvecError,
    NumericalOverflowError,
    ScenarioError,
    SetupError,
    SolverError,
    SolverStalledError,
)
from .estimator import InvariantSubspaceFinder
from .gallery import (
    NormingSetup,
    GalleryKind,
    GallerySpec,
    build,
    norming_setup,
    dense_user,
    jordan_shift,
    volterra,
    weighted_shift,
)
from .iteration import (
    AlphaRecord,
    AnnihilationEntry,
    AnnihilationReport,
    ContrapositiveReport,
    GEstimate,
    IterationTrace,
    LimitEstimate,
    SubsequencePlan,
    TraceRecord,
    WEstimate,
    alpha_sequence,
    check_quasinilpotence_contrapositive,
    estimate_g,
    estimate_limits,
    estimate_w,
    run_trace,
    select_subsequence,
    verify_annihilation,
)
from .operators import (
    CommutantElement,
    OperatorHandle,
    commutant_sample,
    operator_from_matrix,
    operator_norm,
    quasinilpotence_profile,
)
from .pipeline import PipelineResult, run_pipeline
from .reporting import build_report, verify_only, write_report, write_trace_csv
from .scenario import Scenario, load_scenario, parse_scenario
from .simplex import LinearProgram, LpSolution, LpStatus, make_lp, solve_lp
from .solver import (
    CertificateReport,
    CheckResult,
    MinimalProblem,
    MinimalSolution,
    certificate_report,
    relax_to_lambda,
    solve_minimal,
)
from .spaces import Functional, NormKind, SpaceSpec, dual_pair, norming_functional, vector_norm
from .subspace import (
    PropernessReport,
    SubspaceCandidate,
    SupportReport,
    build_candidate,
    invariance_residual,
    numerical_support,
    properness_check,
)

__version__ = "1.0.0"

__all__ = [
    "AlphaRecord",
    "AnnihilationEntry",
    "AnnihilationReport",
    "CertificateReport",
    "CheckResult",
    "CommutantElement",
    "ContrapositiveReport",
    "NormingSetup",
    "DegenerateDecompositionError",
    "DegenerateInputError",
    "DimensionMismatchError",
    "EstimationError",
    "Functional",
    "GEstimate",
    "GalleryKind",
    "GallerySpec",
    "HypothesisViolatedError",
    "InjectivityError",
    "InputError",
    "InvalidProblemError",
    "InvariantSubspaceFinder",
    "IterationTrace",
    "LimitEstimate",
    "LinearProgram",
    "LpSolution",
    "LpStatus",
    "MinimalProblem",
    "MinimalSolution",
    "MinvecError",
    "NumericalOverflowError",
    "OperatorHandle",
    "PipelineResult",
    "PropernessReport",
    "Scenario",
    "ScenarioError",
    "SetupError",
    "SolverError",
    "SolverStalledError",
    "SpaceSpec",
    "SubsequencePlan",
    "SubspaceCandidate",
    "SupportReport",
    "TraceRecord",
    "WEstimate",
    "alpha_sequence",
    "build",
    "build_candidate",
    "build_report",
    "certificate_report",
    "check_quasinilpotence_contrapositive",
    "commutant_sample",
    "norming_setup",
    "dense_user",
    "dual_pair",
    "estimate_g",
    "estimate_limits",
    "estimate_w",
    "invariance_residual",
    "jordan_shift",
    "load_scenario",
    "make_lp",
    "norming_functional",
    "numerical_support",
    "operator_from_matrix",
    "operator_norm",
    "parse_scenario",
    "properness_check",
    "quasinilpotence_profile",
    "relax_to_lambda",
    "run_pipeline",
    "run_trace",
    "select_subsequence",
    "solve_lp",
    "solve_minimal",
    "vector_norm",
    "verify_annihilation",
    "verify_only",
    "volterra",
    "weighted_shift",
    "write_report",
    "write_trace_csv",
    "NormKind",
]
