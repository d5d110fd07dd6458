"""Exception taxonomy shared across the package."""


class CayleyLabError(Exception):
    """Base class for all package errors."""


class ValidationError(CayleyLabError):
    """Bad configuration or malformed input (CLI exit code 2)."""


class SearchExhausted(CayleyLabError):
    """Certificate search budget expired without a verified certificate
    (eta too high, delta too small, or wrong degree; CLI exit code 3)."""


class NumericalRegimeError(CayleyLabError):
    """Base for numerical-regime failures (CLI exit code 4)."""


class DuplicateNode(NumericalRegimeError):
    pass


class NonNormalInput(NumericalRegimeError):
    pass


class ConvergenceFailure(NumericalRegimeError):
    pass


class IllConditioned(NumericalRegimeError):
    pass


class SingularPhase(NumericalRegimeError):
    pass


class ResampleBudgetExceeded(NumericalRegimeError):
    pass


class TooLarge(NumericalRegimeError):
    pass


class TooManyTrajectories(NumericalRegimeError):
    pass


class InvalidRegime(NumericalRegimeError):
    pass
