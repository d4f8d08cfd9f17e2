"""Exception types raised across lavanet."""


class LavanetError(Exception):
    """Base class for all lavanet errors."""


class UnknownParameter(LavanetError, KeyError):
    def __init__(self, name):
        super().__init__(name)
        self.name = name

    def __str__(self):
        return f"unknown parameter {self.name!r}"


class ValidationError(LavanetError, ValueError):
    """Raised with the complete list of parameter violations."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class InvalidDistributionParams(LavanetError, ValueError):
    pass


class GridMismatch(LavanetError, ValueError):
    pass


class NonSquare(LavanetError, ValueError):
    pass


class PerCoreOutOfRange(LavanetError, ValueError):
    pass


class ShapeMismatch(LavanetError, ValueError):
    pass


class InconsistentChunkShapes(LavanetError, ValueError):
    pass


class ParseError(LavanetError, ValueError):
    """Malformed learning-rule text.

    ``position`` is the 0-based character offset of the offending token,
    ``expected`` a short description of what the parser wanted there.
    """

    def __init__(self, position, expected, text=""):
        self.position = position
        self.expected = expected
        self.text = text
        super().__init__(f"at position {position}: expected {expected}")


class UnknownVariable(LavanetError, ValueError):
    pass


class WindowOverflow(LavanetError, ValueError):
    pass


class InvalidLeaveOut(LavanetError, ValueError):
    pass


class SquareOutOfBounds(LavanetError, ValueError):
    pass


class RegionsDontFit(LavanetError, ValueError):
    pass


class IncompleteRun(LavanetError, RuntimeError):
    pass


class HookTooLate(LavanetError, RuntimeError):
    pass


class PhaseError(LavanetError, RuntimeError):
    """A build or run phase failed; ``phase`` names where."""

    def __init__(self, phase, cause):
        self.phase = phase
        self.cause = cause
        super().__init__(f"{phase} failed: {cause}")
