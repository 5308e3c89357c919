"""Exception types shared across the library."""


class LatticeFlowError(Exception):
    """Base class for all library errors."""


class DegenerateGenerators(LatticeFlowError):
    """Generators are (numerically) collinear and span no area."""


class NotHyperbolic(LatticeFlowError):
    """Matrix has |trace| <= 2; no periodic orbit with positive period."""


class NotUnimodular(LatticeFlowError):
    """Integer matrix whose determinant is not +1 (or not in {+1, -1})."""


class ClosureFailed(LatticeFlowError):
    """Orbit closure certificate did not round to an integer unimodular matrix."""

    def __init__(self, max_deviation):
        self.max_deviation = max_deviation
        super().__init__(f"closure certificate deviates by {max_deviation:.3e}")


class ReductionDiverged(LatticeFlowError):
    """Fundamental-domain reduction exceeded its iteration cap (non-finite input?)."""


class ParseError(LatticeFlowError):
    """Expression syntax error, with byte offset and the tokens that were expected."""

    def __init__(self, offset, expected, message=None):
        self.offset = offset
        self.expected = tuple(expected)
        msg = message or f"parse error at offset {offset}: expected {' | '.join(self.expected)}"
        super().__init__(msg)


class PaletteFormatError(LatticeFlowError):
    """Malformed palette file, with the offending line number."""

    def __init__(self, line, message):
        self.line = line
        super().__init__(f"line {line}: {message}")


class TooFewSamples(LatticeFlowError):
    """Palette has fewer than the minimum number of samples."""


class UnknownPalette(LatticeFlowError):
    """Requested palette name is neither builtin nor a readable file."""


class DimensionMismatch(LatticeFlowError):
    """Animation frames do not all share the same dimensions."""
