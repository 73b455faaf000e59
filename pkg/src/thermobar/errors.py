"""Exception hierarchy for thermobar."""


class ThermobarError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(ThermobarError):
    """Invalid or incomplete model/run configuration."""


class MissingKeyError(ConfigError):
    pass


class UnknownKeyError(ConfigError):
    pass


class NonPositiveParameterError(ConfigError):
    pass


class BadOrderingError(ConfigError):
    pass


class ParseError(ConfigError):
    def __init__(self, msg, line=None, column=None):
        where = f" (line {line}" + (f", column {column}" if column else "") + ")" if line else ""
        super().__init__(msg + where)
        self.line = line
        self.column = column


class TooFewCellsError(ThermobarError):
    pass


class ShapeMismatchError(ThermobarError):
    pass


class ConstraintViolationError(ThermobarError):
    pass


class LayoutMismatchError(ThermobarError):
    pass


class SeedlessRandomError(ThermobarError):
    pass


class InconsistentCustomError(ThermobarError):
    pass


class AssemblyError(ThermobarError):
    pass


class SingularStepError(ThermobarError):
    pass


class WindowTooShortError(ThermobarError):
    pass


class EnergyUnderflowError(ThermobarError):
    pass


class EigenFailureError(ThermobarError):
    pass


class KernelMismatchError(ThermobarError):
    pass


class BadRangeError(ThermobarError):
    pass


class NonNegativeAbscissaError(ThermobarError):
    pass
