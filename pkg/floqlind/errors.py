from __future__ import annotations

# ---------------------------------------------------------------------------
# Base classes
# ---------------------------------------------------------------------------


class NumericalError(Exception):
    """Raised when a computation cannot produce a trustworthy result."""


class ScenarioError(Exception):
    """Raised when a scenario document is malformed or violates its schema."""


# ---------------------------------------------------------------------------
# linalg
# ---------------------------------------------------------------------------


class InvalidDimensionError(NumericalError, ValueError):
    """Raised when a Hilbert-space dimension below 2 is requested."""


class NotSquareError(NumericalError, ValueError):
    """Raised when a matrix function receives a non-square array."""


class DimensionMismatchError(NumericalError, ValueError):
    """Raised when a superoperator and an operand disagree in dimension."""


class SingularMatrixError(NumericalError):
    """Raised when a logarithm or inverse of a singular matrix is requested."""


class BranchCutError(NumericalError):
    """Raised when an eigenvalue sits on the negative real axis of the logarithm."""


class NonDiagonalizableError(NumericalError):
    """Raised when the eigenvector matrix is too ill-conditioned to trust."""


class NotHermitianError(NumericalError, ValueError):
    """Raised when a Hermitian matrix is required but the residual is above tolerance."""


class IndexOutOfRangeError(NumericalError, IndexError):
    """Raised when a basis index lies outside 1..d²−1."""


# ---------------------------------------------------------------------------
# lindblad / solver
# ---------------------------------------------------------------------------


class InvalidGeneratorError(NumericalError):
    """Raised when H_t or a_t violates Hermiticity or positivity at time t."""

    def __init__(self, message: str, t: float | None = None, check: str | None = None):
        super().__init__(message)
        self.t = t
        self.check = check


class DecompositionError(NumericalError):
    """Raised when a superoperator cannot be written in first standard form."""


class StepTooLargeError(NumericalError, ValueError):
    """Raised when the integrator step exceeds the smallest breakpoint gap."""


class QuadratureAccuracyError(NumericalError):
    """Raised when adaptive quadrature misses its accuracy target."""

    def __init__(self, message: str, estimate: float | None = None):
        super().__init__(message)
        self.estimate = estimate


class NotCommutativeError(NumericalError):
    """Raised when a commutative-only method meets a non-commuting generator family."""


# ---------------------------------------------------------------------------
# floquet / certify / models
# ---------------------------------------------------------------------------


class InvalidModelError(NumericalError, ValueError):
    """Raised when built-in model parameters are out of their admissible range."""


class InvalidDensityMatrixError(NumericalError, ValueError):
    """Raised when an initial state is not Hermitian, PSD and of unit trace."""


class SingularFamilyError(NumericalError):
    """Raised when a map family is not invertible at a grid point."""

    def __init__(self, message: str, t: float | None = None):
        super().__init__(message)
        self.t = t


class FiniteDifferenceError(NumericalError):
    """Raised when a derivative at t=0 cannot be estimated."""


class ScenarioValidationError(ScenarioError):
    """Raised when a scenario fails invariant checks before any computation."""

    def __init__(self, diagnostics: list[str]):
        super().__init__("; ".join(diagnostics) or "invalid scenario")
        self.diagnostics = list(diagnostics)
