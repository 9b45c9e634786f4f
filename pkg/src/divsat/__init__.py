"""divsat: diversity metrics, saturation detection, and filter evaluation
for embedding-vector pipelines.

The library answers four questions about a growing collection of embedding
vectors: how spread out is it (absolute diversity), how different are two
collections (comparative diversity via Gaussian-kernel MMD), when has a
generative pipeline stopped adding anything new (saturation detection),
and did a relevance filter help or hurt (confusion metrics, correlation,
and diversity impact).
"""

from .analysis import (
    CorrelationReport,
    CorrelationResult,
    DiversityImpactReport,
    PairedSeries,
    aggregate_r,
    correlate,
    correlation_report,
    diversity_impact,
    pearson_p,
    pearson_r,
)
from .diversity import (
    AxisStats,
    DiversityScore,
    axis_stats,
    centroid_diversity,
    diversity_report,
    std_diversity,
)
from .embedset import (
    EmbeddingRecord,
    EmbeddingSet,
    load_set,
    parse_record,
    record_to_json,
    subset,
    write_set,
)
from .errors import (
    CountMismatch,
    DegenerateSeries,
    DimensionMismatch,
    DivsatError,
    DuplicateId,
    EmbedderError,
    EmptyInput,
    EmptySet,
    EmptyVector,
    InsufficientSamples,
    InvalidRepetitions,
    IoError,
    JudgeError,
    LabelMismatch,
    LengthMismatch,
    MalformedLine,
    MissingVerdict,
    NonFiniteValue,
    ProtocolError,
    ProviderError,
    SizeMismatch,
    SpawnError,
    UnknownId,
    UnknownVerdictId,
    UnparseableLine,
    UsageError,
)
from .filtergate import (
    CaptionItem,
    ConfusionMetrics,
    FilterPrompt,
    FilterVerdict,
    apply_filter,
    build_filter_prompts,
    evaluate_filter,
    external_judge,
    load_captions,
    load_truth,
    load_verdicts,
    parse_filter_response,
    run_filter,
    write_verdicts,
)
from .mmd import (
    MEDIAN_HEURISTIC,
    KernelConfig,
    MmdEstimate,
    gaussian_kernel,
    median_heuristic,
    mmd,
    mmd_calculator,
    resolve_bandwidth,
)
from .saturation import (
    BatchProvider,
    Embedder,
    SaturationConfig,
    SaturationState,
    SaturationTrace,
    StopReason,
    TraceStep,
    external_embedder,
    external_provider,
    run_saturation,
    saturation_step,
    write_trace,
)
from .synth import (
    DriftSpec,
    GaussianSpec,
    SyntheticSource,
    drifting_provider,
    gaussian_set,
    stationary_provider,
    token_vector,
)
from . import errors

__version__ = "0.1.0"

__all__ = [
    "AxisStats",
    "BatchProvider",
    "CaptionItem",
    "ConfusionMetrics",
    "CorrelationReport",
    "CorrelationResult",
    "CountMismatch",
    "DegenerateSeries",
    "DimensionMismatch",
    "DiversityImpactReport",
    "DiversityScore",
    "DivsatError",
    "DriftSpec",
    "DuplicateId",
    "EmbedderError",
    "Embedder",
    "EmbeddingRecord",
    "EmbeddingSet",
    "EmptyInput",
    "EmptySet",
    "EmptyVector",
    "FilterPrompt",
    "FilterVerdict",
    "GaussianSpec",
    "InsufficientSamples",
    "InvalidRepetitions",
    "IoError",
    "JudgeError",
    "KernelConfig",
    "LabelMismatch",
    "LengthMismatch",
    "MEDIAN_HEURISTIC",
    "MalformedLine",
    "MissingVerdict",
    "MmdEstimate",
    "NonFiniteValue",
    "PairedSeries",
    "ProtocolError",
    "ProviderError",
    "SaturationConfig",
    "SaturationState",
    "SaturationTrace",
    "SizeMismatch",
    "SpawnError",
    "StopReason",
    "SyntheticSource",
    "TraceStep",
    "UnknownId",
    "UnknownVerdictId",
    "UnparseableLine",
    "UsageError",
    "aggregate_r",
    "apply_filter",
    "axis_stats",
    "build_filter_prompts",
    "centroid_diversity",
    "correlate",
    "correlation_report",
    "diversity_impact",
    "diversity_report",
    "drifting_provider",
    "errors",
    "evaluate_filter",
    "external_embedder",
    "external_judge",
    "external_provider",
    "gaussian_kernel",
    "gaussian_set",
    "load_captions",
    "load_set",
    "load_truth",
    "load_verdicts",
    "median_heuristic",
    "mmd",
    "mmd_calculator",
    "parse_filter_response",
    "parse_record",
    "pearson_p",
    "pearson_r",
    "record_to_json",
    "resolve_bandwidth",
    "run_filter",
    "run_saturation",
    "saturation_step",
    "stationary_provider",
    "std_diversity",
    "subset",
    "token_vector",
    "write_set",
    "write_trace",
    "write_verdicts",
]
