"""Exception types shared across the package."""


class RidgeLabError(Exception):
    """Base class for all package-specific errors."""


class InvalidInputError(RidgeLabError, ValueError):
    """Input contains non-finite values or malformed shapes."""


class SingularPenaltyError(RidgeLabError, ValueError):
    """Penalty lies at or below the divergence boundary -s_min^2."""


class SingularKernelError(RidgeLabError, ValueError):
    """Kernel Gram matrix is singular or not positive definite."""


class RankDeficiencyError(RidgeLabError, ValueError):
    """Design matrix is rank-deficient where full rank is required."""


class StepTooLargeError(RidgeLabError, ValueError):
    """Gradient descent diverged; the step size exceeds the stable range."""


class DimensionMismatchError(RidgeLabError, ValueError):
    """Array shapes are incompatible."""


class ParseError(RidgeLabError, ValueError):
    """Base class for file-format parsing failures."""


class BadMagicError(ParseError):
    """File does not start with the expected magic number."""


class TruncatedFileError(ParseError):
    """File payload is shorter than its header declares."""


class CountMismatchError(ParseError):
    """Image count and label count disagree."""
