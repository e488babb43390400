"""Exception hierarchy shared by all modules."""


class ModRicciError(Exception):
    """Base class. ``exit_code`` is used by the command line runner."""

    exit_code = 3


class ConfigError(ModRicciError):
    exit_code = 2


class NumericError(ModRicciError):
    exit_code = 3


# models
class InvalidSpec(ConfigError):
    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class SingularEvaluation(NumericError):
    pass


# curvature
class StepTooSmall(NumericError):
    pass


# radial
class CutLocusReached(NumericError):
    pass


class IntegrationFailure(NumericError):
    pass


class UnsupportedKind(ConfigError):
    pass


# functional
class ExponentOutOfRange(ConfigError):
    pass


class GammaTooLarge(ConfigError):
    pass


class RadiusAboveThreshold(ConfigError):
    pass


class UnsupportedDimension(ConfigError):
    pass


# pde
class StabilityFailure(NumericError):
    pass


class TruncationTooTight(NumericError):
    pass


class CoverTooLarge(ConfigError):
    pass


class SolverFailure(NumericError):
    pass


class DimensionTooLow(ConfigError):
    pass


class EquationResidualTooLarge(NumericError):
    pass


# convergence
class GeodesicAmbiguous(NumericError):
    pass


class EndpointsTooClose(ConfigError):
    pass


class MetricViolation(NumericError):
    pass


# cli
class ConfigParseError(ConfigError):
    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)


class ModelUnknown(ConfigError):
    pass


class UnknownKind(ConfigError):
    pass


class HypothesisViolated(ConfigError):
    pass
