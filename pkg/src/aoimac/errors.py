"""Exception types raised by the library.

All of them derive from ``ValueError`` so callers that only care about
"bad input" can catch a single type.
"""


class InvalidParameterError(ValueError):
    """A physical or probabilistic parameter is out of its domain."""


class InvalidConfigError(ValueError):
    """A simulation or experiment configuration is malformed."""


class StabilityError(ValueError):
    """A quantity that only exists for a stable data queue was requested."""


class DegenerateInputError(ValueError):
    """Inputs make the requested quantity undefined (e.g. unbounded age)."""


class UnsupportedRegimeError(ValueError):
    """The closed form is only derived for a different parameter regime."""


class InfeasibleProblemError(ValueError):
    """No policy can stabilise the data queue (arrival rate too high)."""
