"""Exception types shared across the package."""

__all__ = [
    "SgprecondError",
    "ParameterDomainError",
    "SizeError",
    "UsageError",
    "CoefficientError",
    "DominanceError",
    "FactorizationError",
    "ConvergenceError",
    "EnclosureError",
    "ExprError",
    "ExprSyntaxError",
    "ExprEvalError",
    "ConfigError",
]


class SgprecondError(Exception):
    """Base class for all library-specific errors."""


class ParameterDomainError(SgprecondError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class SizeError(SgprecondError, ValueError):
    """A requested object exceeds a configured size cap."""


class UsageError(SgprecondError, TypeError):
    """Objects of incompatible kinds were combined (e.g. a tensor-only
    preconditioner requested for a complete-polynomial basis)."""


class CoefficientError(SgprecondError, ValueError):
    """A coefficient field violates its contract (e.g. nonpositive mean)."""


class DominanceError(SgprecondError, ArithmeticError):
    """The mean coefficient does not dominate the fluctuating part strongly
    enough for the requested computation.

    ``index`` identifies the failing pivot (d_j <= 0) or element.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class FactorizationError(SgprecondError, ArithmeticError):
    """A direct factorization failed or produced an indefinite matrix."""


class ConvergenceError(SgprecondError, RuntimeError):
    """An iterative method did not reach its tolerance.

    ``estimate`` carries the best available result (an EigEstimate for
    eigenvalue solvers, a residual history for linear solvers).
    """

    def __init__(self, message, estimate=None, history=None):
        super().__init__(message)
        self.estimate = estimate
        self.history = history


class EnclosureError(SgprecondError, AssertionError):
    """A computed eigenvalue escaped its guaranteed analytic enclosure."""


class ExprError(SgprecondError):
    """Base class for coefficient-expression errors."""


class ExprSyntaxError(ExprError, ValueError):
    """Malformed expression text; ``offset`` is the byte position."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class ExprEvalError(ExprError, ArithmeticError):
    """Expression evaluation failed (division by zero, missing variable)."""


class ConfigError(SgprecondError, ValueError):
    """Invalid experiment configuration; ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
