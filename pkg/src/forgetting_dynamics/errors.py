"""Exception types shared across the package.

Every error carries a short machine-readable ``code`` so that CLI callers
and report consumers can branch on it without parsing messages.
"""


class ConfigError(ValueError):
    """A configuration failed validation."""

    code = "CONFIG"


class OutOfRangeError(ConfigError):
    """A field lies outside its admissible domain."""

    code = "OUT_OF_RANGE"


class UnquantizableError(ConfigError):
    """No integer support size matches the requested similarity ratio."""

    code = "UNQUANTIZABLE"


class DivergentError(ConfigError):
    """An effective learning rate reaches the instability threshold."""

    code = "DIVERGENT"


class UnknownKeyError(ConfigError):
    """A config file contains a key that is not a config field."""

    code = "UNKNOWN_KEY"


class NonFiniteError(RuntimeError):
    """A state component left the double-precision range during a run."""

    code = "NON_FINITE"


class HardGateError(RuntimeError):
    """Closed forms and the numerical integrator disagree beyond tolerance."""

    code = "HARD_GATE"
