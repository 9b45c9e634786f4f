"""Exception hierarchy.

Every error raised by this package derives from DivsatError and carries a
stable machine-readable ``code`` that the CLI surfaces as
``{"error": {"code": ..., "message": ...}}``.
"""

from __future__ import annotations


class DivsatError(Exception):
    """Base class for all package errors."""

    code = "error"


# data model / JSONL ingestion

class MalformedLine(DivsatError):
    code = "malformed_line"


class NonFiniteValue(DivsatError):
    code = "non_finite_value"


class EmptyVector(DivsatError):
    code = "empty_vector"


class EmptySet(DivsatError):
    code = "empty_set"


class DimensionMismatch(DivsatError):
    code = "dimension_mismatch"


class DuplicateId(DivsatError):
    code = "duplicate_id"


class UnknownId(DivsatError):
    code = "unknown_id"


class IoError(DivsatError):
    code = "io_error"


# comparative diversity

class SizeMismatch(DivsatError):
    code = "size_mismatch"


class InvalidRepetitions(DivsatError):
    code = "invalid_repetitions"


# subprocess wrappers

class SpawnError(DivsatError):
    code = "spawn_error"


class ProtocolError(DivsatError):
    code = "protocol_error"


class ProviderError(DivsatError):
    code = "provider_error"


class EmbedderError(DivsatError):
    code = "embedder_error"


class JudgeError(DivsatError):
    code = "judge_error"


# relevance filtering

class EmptyInput(DivsatError):
    code = "empty_input"


class CountMismatch(DivsatError):
    code = "count_mismatch"


class UnparseableLine(DivsatError):
    code = "unparseable_line"


class MissingVerdict(DivsatError):
    code = "missing_verdict"


class UnknownVerdictId(DivsatError):
    code = "unknown_verdict_id"


class LabelMismatch(DivsatError):
    code = "label_mismatch"


# correlation analytics

class DegenerateSeries(DivsatError):
    code = "degenerate_series"


class LengthMismatch(DivsatError):
    code = "length_mismatch"


class InsufficientSamples(DivsatError):
    code = "insufficient_samples"


# command line

class UsageError(DivsatError):
    code = "usage_error"
