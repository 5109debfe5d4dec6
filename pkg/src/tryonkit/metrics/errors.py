"""Error taxonomy for the metrics engine."""


class MetricError(Exception):
    pass


class DimensionMismatch(MetricError):
    pass


class NumericalFailure(MetricError):
    pass


class InsufficientSamples(MetricError):
    pass


class ExtractorContractViolation(MetricError):
    pass
