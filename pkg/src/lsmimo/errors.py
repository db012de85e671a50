"""Exception types raised across the simulator."""


class SimulationError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(SimulationError, ValueError):
    pass


class ParameterError(SimulationError, ValueError):
    pass


class FramingError(SimulationError, ValueError):
    pass


class CapacityError(SimulationError, ValueError):
    pass


class SingularChannelError(SimulationError, ArithmeticError):
    pass


class FormatError(SimulationError, ValueError):
    pass


class ConcealmentError(SimulationError, ValueError):
    pass


class UndefinedRateError(SimulationError, ZeroDivisionError):
    pass


class ConfigError(SimulationError, ValueError):
    """Invalid configuration; ``errors`` holds one message per violated key."""

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))
