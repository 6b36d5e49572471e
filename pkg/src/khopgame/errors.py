"""Exception hierarchy for the khopgame package."""


class KhopGameError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(KhopGameError):
    """A line of an input file could not be parsed."""

    def __init__(self, path, line_no, message):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = str(path)
        self.line_no = line_no


class ValidationError(KhopGameError):
    """Inputs are well-formed but violate a documented precondition or invariant."""


class ContractViolation(KhopGameError):
    """An operation was asked to do something the model forbids.

    Examples: re-inviting an already-invited user, flipping a determined
    state, or a hop label beyond the revenue table.
    """


class EnumerationCapExceeded(KhopGameError):
    """Exact enumeration refused because too many unknown edges are in scope."""


class UndefinedBoundError(KhopGameError):
    """A curvature bound is undefined for these parameters (R_0 equals R_1)."""


class UndefinedRatioError(KhopGameError):
    """A marginal-benefit ratio is undefined because the denominator is zero."""
