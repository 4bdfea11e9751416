class DimensionError(ValueError):
    pass


class ConfigError(ValueError):
    pass


class InvariantViolation(RuntimeError):
    pass
