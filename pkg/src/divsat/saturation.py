"""Saturation-point detection for generative embedding pipelines.

Grow an embedding set batch by batch and stop once comparative diversity
stops moving. Each iteration scores the current set against itself plus
the new batch with the resampling MMD estimator; a score landing strictly
inside the running acceptance window counts toward stopping and can only
widen the window, while any score outside recenters the window at
score +/- stddev and resets the counter. The loop ends after
``early_stop + 1`` consecutive in-window scores, on provider exhaustion,
or at the iteration cap.
"""

from __future__ import annotations

import enum
import json
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Protocol, Sequence, Union

from .embedset import EmbeddingRecord, EmbeddingSet, parse_record
from .errors import (
    DimensionMismatch,
    DivsatError,
    EmbedderError,
    ProtocolError,
    ProviderError,
)
from .mmd import KernelConfig, MmdEstimate, mmd_calculator
from ._proc import as_argv, run_command
from .rng import as_uint64

log = logging.getLogger(__name__)


class BatchProvider(Protocol):
    """Source of new items; a batch shorter than requested signals exhaustion."""

    def next_batch(
        self, count: int, context: Mapping[str, str] | None = None
    ) -> Sequence[str]: ...


class Embedder(Protocol):
    """Maps a text batch to an equal-length embedding set, order preserved."""

    def embed(self, items: Sequence[str]) -> EmbeddingSet: ...


class StopReason(str, enum.Enum):
    SATURATED = "saturated"
    MAX_ITERATIONS = "max_iterations"
    PROVIDER_EXHAUSTED = "provider_exhausted"


@dataclass(frozen=True)
class SaturationConfig:
    """Knobs for the growth loop.

    ``perc`` sizes each batch as a fraction of the current set (or of the
    initial set under ``fixed_batch``); ``early_stop`` is the number of
    consecutive in-window scores beyond the first required to stop.
    """

    perc: float = 0.05
    early_stop: int = 5
    mmd_repetitions: int = 10
    kernel: KernelConfig = field(default_factory=KernelConfig)
    seed: int = 0
    max_iterations: int = 1000
    fixed_batch: bool = False

    def __post_init__(self) -> None:
        if not (0.0 < self.perc <= 1.0):
            raise ValueError("perc must be in (0, 1]")
        if self.early_stop < 0:
            raise ValueError("early_stop must be >= 0")
        if self.mmd_repetitions < 1:
            raise ValueError("mmd_repetitions must be >= 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass(frozen=True)
class SaturationState:
    """Accumulated set plus the acceptance window and streak counter.

    The (-1, -1) window sentinel guarantees the first score falls outside
    (scores are never negative), so the window always recenters on real
    data before any streak can start.
    """

    embeddings: EmbeddingSet
    stop_condition: int = 0
    range_min: float = -1.0
    range_max: float = -1.0
    iteration: int = 0


@dataclass(frozen=True)
class TraceStep:
    """One iteration's record: the score, the window after it, the streak."""

    iteration: int
    batch_size: int
    mmd_mean: float
    mmd_stddev: float
    in_window: bool
    stop_condition: int
    range_min: float
    range_max: float

    def to_json_dict(self) -> dict:
        return {
            "iteration": self.iteration,
            "batch_size": self.batch_size,
            "mmd_mean": self.mmd_mean,
            "mmd_stddev": self.mmd_stddev,
            "in_window": self.in_window,
            "stop_condition": self.stop_condition,
            "range_min": self.range_min,
            "range_max": self.range_max,
        }


@dataclass(frozen=True)
class SaturationTrace:
    steps: tuple[TraceStep, ...]
    reason: StopReason

    @property
    def iterations(self) -> int:
        return len(self.steps)


def saturation_step(
    state: SaturationState,
    estimate: MmdEstimate,
    cfg: SaturationConfig,
    batch: EmbeddingSet,
) -> SaturationState:
    """One pure acceptance-window transition.

    A score strictly inside (range_min, range_max) increments the streak and
    widens the window to cover score +/- stddev; any other score resets the
    streak to zero and recenters the window there. The batch joins the
    accumulated set in both cases.
    """
    if batch.dimension != state.embeddings.dimension:
        raise DimensionMismatch(
            f"batch dimension {batch.dimension} != set dimension {state.embeddings.dimension}"
        )
    score = estimate.mean
    spread = estimate.stddev
    if state.range_min < score < state.range_max:
        stop = state.stop_condition + 1
        range_min = min(score - spread, state.range_min)
        range_max = max(score + spread, state.range_max)
    else:
        stop = 0
        range_min = score - spread
        range_max = score + spread
    merged = EmbeddingSet(state.embeddings.records + batch.records)
    return SaturationState(
        embeddings=merged,
        stop_condition=stop,
        range_min=range_min,
        range_max=range_max,
        iteration=state.iteration + 1,
    )


MmdFunction = Callable[[EmbeddingSet, EmbeddingSet, SaturationConfig, int], MmdEstimate]


def _default_mmd(
    current: EmbeddingSet, combined: EmbeddingSet, cfg: SaturationConfig, seed: int
) -> MmdEstimate:
    return mmd_calculator(
        current, combined, cfg.kernel,
        repetitions=cfg.mmd_repetitions, seed=seed,
    )


def _namespace_batch(batch: EmbeddingSet, iteration: int) -> EmbeddingSet:
    # Batch ids are prefixed with the iteration so accumulation can never
    # collide with earlier batches or the initial set.
    return EmbeddingSet(
        replace(rec, id=f"b{iteration}_{rec.id}") for rec in batch.records
    )


def _fail(exc: DivsatError, steps: list[TraceStep], partial: EmbeddingSet):
    # Propagated provider/embedder failures keep the work done so far.
    exc.trace_steps = tuple(steps)
    exc.partial_set = partial
    raise exc


def run_saturation(
    initial: Union[EmbeddingSet, int],
    provider: BatchProvider,
    embedder: Embedder,
    cfg: SaturationConfig = SaturationConfig(),
    *,
    context: Mapping[str, str] | None = None,
    mmd_fn: MmdFunction | None = None,
) -> tuple[EmbeddingSet, SaturationTrace]:
    """Drive batch generation until comparative diversity saturates.

    Args:
        initial: a non-empty starting EmbeddingSet, or an int n0 to
            bootstrap that many items from the provider first.
        provider, embedder: the growth loop's item source and vectorizer;
            in-process objects or the external_* subprocess wrappers.
        cfg: loop parameters; the per-iteration MMD seed is ``cfg.seed``
            XOR the 1-based iteration number.
        context: optional string map passed to the provider (for example an
            activity name).
        mmd_fn: override for the scoring function, used to replay scripted
            estimates; defaults to the resampling MMD estimator comparing
            the current set against current plus batch.

    Returns:
        The final embedding set (the initial set is a prefix of it) and the
        per-iteration trace with the terminal reason.

    Raises:
        ProviderError, EmbedderError, ProtocolError, SpawnError: propagated
            from the batch machinery, with the partial trace attached as
            ``exc.trace_steps`` and the set so far as ``exc.partial_set``.
    """
    estimator = mmd_fn if mmd_fn is not None else _default_mmd
    steps: list[TraceStep] = []
    if isinstance(initial, int):
        if initial < 1:
            raise ValueError("bootstrap size must be >= 1")
        try:
            texts = list(provider.next_batch(initial, context))
        except DivsatError as exc:
            _fail(exc, steps, None)  # type: ignore[arg-type]
        except Exception as exc:
            raise ProviderError(f"provider failed during bootstrap: {exc}") from exc
        if not texts:
            raise ProviderError("provider produced no items during bootstrap")
        current = _embed(embedder, texts, steps, partial=None)
    else:
        current = initial
    initial_size = current.size
    state = SaturationState(embeddings=current)
    reason: StopReason | None = None

    while state.stop_condition <= cfg.early_stop:
        if state.iteration >= cfg.max_iterations:
            reason = StopReason.MAX_ITERATIONS
            break
        iteration = state.iteration + 1
        base = initial_size if cfg.fixed_batch else state.embeddings.size
        count = max(1, math.ceil(cfg.perc * base))
        try:
            texts = list(provider.next_batch(count, context))
        except DivsatError as exc:
            _fail(exc, steps, state.embeddings)
        except Exception as exc:
            wrapped = ProviderError(f"provider failed at iteration {iteration}: {exc}")
            wrapped.__cause__ = exc
            _fail(wrapped, steps, state.embeddings)
        if len(texts) == 0:
            reason = StopReason.PROVIDER_EXHAUSTED
            break
        exhausted = len(texts) < count
        batch = _embed(embedder, texts, steps, partial=state.embeddings)
        batch = _namespace_batch(batch, iteration)
        combined = EmbeddingSet(state.embeddings.records + batch.records)
        seed_i = as_uint64(cfg.seed ^ iteration)
        estimate = estimator(state.embeddings, combined, cfg, seed_i)
        previous_streak = state.stop_condition
        state = saturation_step(state, estimate, cfg, batch)
        step = TraceStep(
            iteration=iteration,
            batch_size=batch.size,
            mmd_mean=estimate.mean,
            mmd_stddev=estimate.stddev,
            in_window=state.stop_condition == previous_streak + 1,
            stop_condition=state.stop_condition,
            range_min=state.range_min,
            range_max=state.range_max,
        )
        steps.append(step)
        log.debug(
            "iteration %d: n=%d score=%.6g sd=%.6g window=(%.6g, %.6g) streak=%d",
            iteration, state.embeddings.size, estimate.mean, estimate.stddev,
            state.range_min, state.range_max, state.stop_condition,
        )
        if exhausted:
            reason = StopReason.PROVIDER_EXHAUSTED
            break
    if reason is None:
        reason = StopReason.SATURATED
    return state.embeddings, SaturationTrace(steps=tuple(steps), reason=reason)


def _embed(
    embedder: Embedder,
    texts: Sequence[str],
    steps: list[TraceStep],
    partial: EmbeddingSet | None,
) -> EmbeddingSet:
    try:
        batch = embedder.embed(texts)
    except DivsatError as exc:
        _fail(exc, steps, partial)  # type: ignore[arg-type]
    except Exception as exc:
        wrapped = EmbedderError(f"embedder failed: {exc}")
        wrapped.__cause__ = exc
        _fail(wrapped, steps, partial)  # type: ignore[arg-type]
    if batch.size != len(texts):
        wrapped = EmbedderError(
            f"embedder returned {batch.size} records for {len(texts)} items"
        )
        _fail(wrapped, steps, partial)  # type: ignore[arg-type]
    return batch


def write_trace(trace: SaturationTrace, path) -> None:
    """One JSON object per iteration, keys sorted, mirroring TraceStep."""
    from .errors import IoError

    try:
        with open(path, "w", encoding="utf-8") as fh:
            for step in trace.steps:
                fh.write(json.dumps(step.to_json_dict(), sort_keys=True))
                fh.write("\n")
    except OSError as exc:
        raise IoError(str(exc)) from None


class _ExternalProvider:
    def __init__(self, argv: list[str], timeout: float):
        self._argv = argv
        self._timeout = timeout

    def next_batch(
        self, count: int, context: Mapping[str, str] | None = None
    ) -> list[str]:
        argv = [*self._argv, "--count", str(count)]
        if context and context.get("activity"):
            argv += ["--activity", context["activity"]]
        proc = run_command(argv, timeout=self._timeout, failure=ProviderError)
        texts: list[str] = []
        for i, line in enumerate(proc.stdout.splitlines()):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except ValueError:
                raise ProtocolError(f"provider line {i + 1} is not JSON") from None
            if not isinstance(obj, dict) or not isinstance(obj.get("text"), str):
                raise ProtocolError(
                    f"provider line {i + 1} must be an object with a string \"text\""
                )
            texts.append(obj["text"])
        if len(texts) > count:
            raise ProtocolError(
                f"provider emitted {len(texts)} items but only {count} were requested"
            )
        return texts


class _ExternalEmbedder:
    def __init__(self, argv: list[str], timeout: float):
        self._argv = argv
        self._timeout = timeout

    def embed(self, items: Sequence[str]) -> EmbeddingSet:
        payload = "\n".join(
            json.dumps({"id": i, "text": text}) for i, text in enumerate(items)
        )
        proc = run_command(
            self._argv, input_text=payload + "\n",
            timeout=self._timeout, failure=EmbedderError,
        )
        records: list[EmbeddingRecord] = []
        dim: int | None = None
        for i, line in enumerate(proc.stdout.splitlines()):
            if not line.strip():
                continue
            try:
                rec = parse_record(line, line_index=i)
            except DivsatError as exc:
                raise ProtocolError(f"embedder line {i + 1}: {exc}") from None
            if dim is None:
                dim = rec.dimension
            elif rec.dimension != dim:
                raise DimensionMismatch(
                    f"embedder line {i + 1}: dimension {rec.dimension}, expected {dim}"
                )
            records.append(rec)
        if len(records) != len(items):
            raise ProtocolError(
                f"embedder returned {len(records)} records for {len(items)} items"
            )
        return EmbeddingSet(records)


def external_provider(
    command: Sequence[str] | str, timeout: float = 300.0
) -> BatchProvider:
    """Wrap a command as a batch provider.

    Per call the command runs with ``--count N`` appended (plus
    ``--activity A`` when the context carries one) and must print one JSON
    object ``{"text": ...}`` per line; printing fewer than N lines signals
    exhaustion, printing more is a protocol violation.
    """
    return _ExternalProvider(as_argv(command), timeout)


def external_embedder(
    command: Sequence[str] | str, timeout: float = 300.0
) -> Embedder:
    """Wrap a command as an embedder.

    Per call the command receives one JSON object ``{"id": i, "text": ...}``
    per line on stdin and must print an equal count of embedding records
    (``{"vector": [...]}``, optional id) on stdout, order preserved.
    """
    return _ExternalEmbedder(as_argv(command), timeout)
