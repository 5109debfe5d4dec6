"""Image quality and silhouette-consistency metrics."""

from .errors import (
    DimensionMismatch,
    ExtractorContractViolation,
    InsufficientSamples,
    MetricError,
    NumericalFailure,
)
from .features import (
    FlatFeatureExtractor,
    IdentityLayerExtractor,
    LayeredFeatureExtractor,
    PatchMeanExtractor,
    read_features,
    write_features,
)
from .fid import fid
from .lpips import lpips
from .normal_rate import (
    CaseClassification,
    DegenerateCaseWarning,
    NormalRateCase,
    NormalRateResult,
    normal_output_rate,
)
from .report import (
    MetricReport,
    ModelMetrics,
    NormalRateEntry,
    render_normal_rates,
    render_quant_table,
    render_report,
)
from .ssim import SsimParams, gaussian_window, ssim
from .stats import GaussianStats, accumulate_stats

__all__ = [
    "CaseClassification",
    "DegenerateCaseWarning",
    "DimensionMismatch",
    "ExtractorContractViolation",
    "FlatFeatureExtractor",
    "GaussianStats",
    "IdentityLayerExtractor",
    "InsufficientSamples",
    "LayeredFeatureExtractor",
    "MetricError",
    "MetricReport",
    "ModelMetrics",
    "NormalRateCase",
    "NormalRateEntry",
    "NormalRateResult",
    "NumericalFailure",
    "PatchMeanExtractor",
    "SsimParams",
    "accumulate_stats",
    "fid",
    "gaussian_window",
    "lpips",
    "normal_output_rate",
    "read_features",
    "render_normal_rates",
    "render_quant_table",
    "render_report",
    "ssim",
    "write_features",
]
