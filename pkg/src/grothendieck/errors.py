"""Exception types shared across the package."""


class InvalidInput(ValueError):
    """An argument violates a documented precondition."""


class GuardExceeded(RuntimeError):
    """A size or enumeration budget was exceeded.

    ``guard`` names the limit that tripped so callers (and the CLI) can tell
    the user which override to raise.
    """

    def __init__(self, message, guard=None):
        super().__init__(message)
        self.guard = guard


class InapplicableTheorem(ValueError):
    """A closed-form result was requested outside its hypotheses."""


class UndefinedRatio(ArithmeticError):
    """The integer optimum is not positive, so an integrality ratio is meaningless."""
