"""Exception hierarchy shared across the package.

Input problems (bad dimensions, degenerate vectors, malformed scenarios)
and solver failures (stalls, lost injectivity, broken certificates) are
kept in separate branches so the CLI can map them to distinct exit codes.
"""


class MinvecError(Exception):
    """Base class for all package errors."""


class InputError(MinvecError):
    """Caller-supplied data is invalid (CLI exit code 2)."""


class DimensionMismatchError(InputError):
    """Vector/matrix shapes are inconsistent with the ambient space."""


class DegenerateInputError(InputError):
    """An input is degenerate where a nonzero/nontrivial value is required."""


class InvalidProblemError(InputError):
    """Problem data violates a precondition (e.g. radius >= norm of center)."""


class ScenarioError(InputError):
    """A scenario file failed to parse or validate."""


class SolverError(MinvecError):
    """A numerical routine failed to produce a certified result (exit code 3)."""


class InjectivityError(SolverError):
    """Operator (or a power of it) is numerically singular."""


class SolverStalledError(SolverError):
    """Iteration cap reached without convergence."""


class NumericalOverflowError(SolverError):
    """A computation overflowed to infinity."""


class EstimationError(SolverError):
    """An iterative estimate did not converge; carries the best bound found."""

    def __init__(self, message, best_bound=None):
        super().__init__(message)
        self.best_bound = best_bound


class HypothesisViolatedError(SolverError):
    """The compactness-style lower bound required by the iteration fails."""


class DegenerateDecompositionError(SolverError):
    """A projection denominator vanished; the attainment inequality is broken."""


class SetupError(SolverError):
    """A scenario construction step could not reach its target."""
