"""Exception hierarchy shared by every module of the toolkit."""


class ResqError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(ResqError, ValueError):
    """An input violates a structural invariant (shape, hermiticity, trace...)."""


class NotHermitian(ValidationError):
    pass


class NotUnitTrace(ValidationError):
    pass


class NotPSD(ValidationError):
    pass


class NotUnitary(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class BadDimension(ValidationError):
    pass


class BadRank(ValidationError):
    pass


class BadDistribution(ValidationError):
    pass


class NonSquareBipartition(ValidationError):
    pass


class AlphaOutOfRange(ValidationError):
    pass


class InvalidStrategy(ValidationError):
    pass


class NoConvergence(ResqError, ArithmeticError):
    pass


class SolverDiverged(ResqError, ArithmeticError):
    """The barrier solver hit its iteration cap or lost feasibility.

    ``best_value`` carries the best primal objective reached, if any.
    """

    def __init__(self, message, best_value=None):
        super().__init__(message)
        self.best_value = best_value


class UnboundedProgram(ResqError):
    """The support of rho is not contained in the support of sigma."""

    def __init__(self, message, leakage=None):
        super().__init__(message)
        self.leakage = leakage


class UnboundedRatio(UnboundedProgram):
    pass


class SupportsActuallyNested(ResqError, ValueError):
    pass


class OptimizerStalled(ResqError, ArithmeticError):
    def __init__(self, message, best_value=None):
        super().__init__(message)
        self.best_value = best_value


class ParseError(ResqError, ValueError):
    """Malformed input file. Carries the file, line and reason."""

    def __init__(self, path, line, reason):
        super().__init__(f"{path}:{line}: {reason}")
        self.path = path
        self.line = line
        self.reason = reason
