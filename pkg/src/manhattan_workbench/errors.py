"""Exception and warning types shared across the workbench."""


class WorkbenchError(Exception):
    """Base class for all workbench failures."""


class ConfigError(WorkbenchError, ValueError):
    """Malformed or inconsistent run configuration."""


class ConditionFailure(WorkbenchError):
    """A ping-pong condition does not hold for the supplied geometry."""


class NumericalFailure(WorkbenchError, ArithmeticError):
    """A numerical procedure could not deliver a trustworthy answer."""


# moebius
class AmbiguousClass(NumericalFailure):
    def __init__(self, trace, tol):
        self.trace = trace
        self.tol = tol
        super().__init__(f"|trace| = {abs(trace)!r} is within {tol:g} of 2")


class NotHyperbolic(WorkbenchError, ValueError):
    pass


class NoBoundaryFixedPoints(WorkbenchError, ValueError):
    pass


# schottky
class ArcConstructionFailed(ConditionFailure):
    pass


class UnknownLabel(ConfigError, KeyError):
    pass


# coding
class NonHyperbolicWord(ConditionFailure):
    def __init__(self, word, trace):
        self.word = word
        self.trace = trace
        super().__init__(f"word {word} evaluates to a non-hyperbolic element (trace {trace:.12g})")


# pressure
class DivergentTail(NumericalFailure):
    pass


class TruncationInsufficient(NumericalFailure):
    pass


class StepTooLarge(NumericalFailure, ValueError):
    pass


# manhattan
class BracketFailure(NumericalFailure):
    pass


class InsufficientPoints(NumericalFailure, ValueError):
    pass


class PrecisionFloorWarning(UserWarning):
    """The pressure error bar is coarser than the requested root tolerance."""


# orbit_oracle
class SaturatedWindow(NumericalFailure):
    pass


class TooFewClasses(NumericalFailure):
    pass


class BudgetTooSmallWarning(UserWarning):
    """Counting function is saturated by the enumeration budget."""


class EntropyBoundWarning(UserWarning):
    """An entropy estimate fell outside the expected range (1/2, 1]."""
