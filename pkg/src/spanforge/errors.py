"""Exception types shared across the package."""


class SpanforgeError(Exception):
    """Base class for all spanforge errors."""


class ParseError(SpanforgeError):
    """Formula text does not conform to the grammar.

    Carries the character offset at which parsing failed.
    """

    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


class GateError(SpanforgeError):
    """Invalid gate definition or registry lookup failure."""


class FormulaError(SpanforgeError):
    """Formula violates a structural precondition (read-once, arity, gate set)."""


class NormalizeError(FormulaError):
    """Formula has no normal form in the gate-tree model (e.g. a negated variable)."""


class SpanProgramError(SpanforgeError):
    """Inconsistent span-program data."""


class CompositionError(SpanforgeError):
    """Direct-sum composition cannot be assembled as requested."""


class SolverError(SpanforgeError):
    """A numeric witness solve failed its feasibility check."""


class BoundError(SpanforgeError):
    """No cost bound is available for a gate, or the minimax solver cannot run."""


class NotCanonicalError(SpanforgeError):
    """Program does not have the canonical shape required by a checker."""


class CalibrationError(SpanforgeError):
    """The weighted-tree construction failed its zero-eigenvector calibration."""
