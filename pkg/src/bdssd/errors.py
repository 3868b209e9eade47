"""Exception types raised across the package."""


class BDError(Exception):
    """Base class for every error raised by bdssd."""


class ChainConstructionError(BDError, ValueError):
    """Malformed chain data (NaN, wrong lengths, d < 1)."""


class ValidationError(BDError, ValueError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ParseError(BDError, ValueError):
    def __init__(self, message, field=None, line=None):
        where = []
        if field is not None:
            where.append(f"field {field!r}")
        if line is not None:
            where.append(f"line {line}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.field = field
        self.line = line


class PreconditionError(BDError, ValueError):
    """An operation was called on a chain outside its domain."""


class NotErgodic(PreconditionError):
    pass


class NotMonotone(PreconditionError):
    pass


class HypothesisViolated(PreconditionError):
    pass


class NegativeEigenvalue(PreconditionError):
    pass


class EpsOutOfRange(PreconditionError):
    pass


class EpsTooLarge(PreconditionError):
    pass


class ThetaOutOfRange(PreconditionError):
    pass


class NonpositiveRate(PreconditionError):
    pass


class NoAbsorption(PreconditionError):
    pass


class InvalidState(PreconditionError):
    pass


class ShapeMismatch(PreconditionError):
    pass


class PoleProximity(BDError, ArithmeticError):
    pass


class SingularMatrix(BDError, ArithmeticError):
    pass


class StochasticityViolation(BDError, ArithmeticError):
    """A matrix that must be stochastic has an entry below the clamp tolerance."""


class RepeatedEigenvalue(BDError, ArithmeticError):
    pass


class IntertwiningError(BDError, ArithmeticError):
    pass


class NoFeasibleEta(BDError, ValueError):
    def __init__(self, message, limit_holds=None):
        super().__init__(message)
        self.limit_holds = limit_holds


class CapExceeded(BDError, RuntimeError):
    pass
