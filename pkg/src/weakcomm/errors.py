class WeakValueUndefined(ValueError):
    """Pre- and post-selected states are orthogonal, so the weak value diverges."""


class ProtocolViolation(RuntimeError):
    """A party broke the protocol contract (e.g. re-measured a consumed spin)."""


class ConfigError(ValueError):
    """Invalid run configuration."""
