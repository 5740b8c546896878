"""Exception hierarchy shared by all subpackages."""


class CliprmError(Exception):
    pass


class ValidationError(CliprmError, ValueError):
    """Bad user input: shapes, ranges, empty collections, schema problems."""


class RegistryError(CliprmError, KeyError):
    def __str__(self):  # KeyError quotes its message otherwise
        return str(self.args[0]) if self.args else ""


class DeviceError(CliprmError, RuntimeError):
    pass


class WeightsUnavailableError(CliprmError, RuntimeError):
    """Pretrained weights could not be found locally or fetched."""


class CapabilityError(CliprmError, RuntimeError):
    """An optional backend (physics engine, GL context, library) is missing."""


class ConfigurationError(CliprmError, ValueError):
    pass


class DegenerateBaselineError(ConfigurationError):
    """Goal and baseline prompts embed to (nearly) the same point."""


class NumericError(CliprmError, ArithmeticError):
    pass


class DegenerateDistributionError(CliprmError, ValueError):
    """Zero variance in rewards or labels; correlation is undefined."""


class SchemaError(ValidationError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)
