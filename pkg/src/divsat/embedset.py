"""Embedding-set data model and JSON Lines interchange.

A set is an ordered collection of records, every vector float64 with the
same dimension, ids unique within the set. Sets are never empty; asking a
diversity metric about an empty collection is a caller bug, so emptiness is
rejected at construction time rather than coerced to zero scores downstream.

File format: one JSON object per line,
``{"id": str?, "vector": [num, ...], "label": str?, "meta": {str: str}?}``.
A record without an id gets its zero-based line index, rendered in decimal.
Floats are written with Python's shortest round-trip rendering, so a
write/load cycle reproduces vectors bit for bit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    DivsatError,
    DuplicateId,
    EmptySet,
    EmptyVector,
    IoError,
    MalformedLine,
    NonFiniteValue,
    UnknownId,
)


@dataclass(frozen=True, eq=False)
class EmbeddingRecord:
    """One embedding vector plus its identity and optional metadata."""

    id: str
    vector: np.ndarray
    label: str | None = None
    meta: Mapping[str, str] | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.id, str) or not self.id:
            raise MalformedLine("record id must be a non-empty string")
        if self.label is not None and not isinstance(self.label, str):
            raise MalformedLine("label must be a string when present")
        vec = np.asarray(self.vector, dtype=np.float64)
        if vec.ndim != 1:
            raise MalformedLine("vector must be one-dimensional")
        if vec.size == 0:
            raise EmptyVector(f"record {self.id!r} has an empty vector")
        if not np.all(np.isfinite(vec)):
            raise NonFiniteValue(f"vector for record {self.id!r} contains NaN or infinity")
        vec = np.array(vec)  # private copy, then frozen
        vec.flags.writeable = False
        object.__setattr__(self, "vector", vec)
        if self.meta is not None:
            if not isinstance(self.meta, Mapping) or not all(
                isinstance(k, str) and isinstance(v, str) for k, v in self.meta.items()
            ):
                raise MalformedLine("meta must map strings to strings")
            object.__setattr__(self, "meta", dict(self.meta))

    @property
    def dimension(self) -> int:
        return int(self.vector.shape[0])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EmbeddingRecord):
            return NotImplemented
        return (
            self.id == other.id
            and self.label == other.label
            and self.meta == other.meta
            and self.vector.shape == other.vector.shape
            and bool(np.all(self.vector == other.vector))
        )


class EmbeddingSet:
    """Ordered, fixed-dimension, non-empty collection of embedding records."""

    __slots__ = ("records", "dimension", "_index", "_matrix")

    def __init__(self, records: Iterable[EmbeddingRecord]):
        recs = tuple(records)
        if not recs:
            raise EmptySet("an embedding set must contain at least one record")
        dim = recs[0].dimension
        index: dict[str, int] = {}
        for pos, rec in enumerate(recs):
            if rec.dimension != dim:
                raise DimensionMismatch(
                    f"record {rec.id!r} has dimension {rec.dimension}, expected {dim}"
                )
            if rec.id in index:
                raise DuplicateId(f"duplicate record id {rec.id!r}")
            index[rec.id] = pos
        self.records = recs
        self.dimension = dim
        self._index = index
        self._matrix: np.ndarray | None = None

    @classmethod
    def from_array(
        cls,
        values: np.ndarray,
        ids: Sequence[str] | None = None,
        labels: Sequence[str | None] | None = None,
        id_prefix: str = "",
    ) -> "EmbeddingSet":
        """Build a set from an (n, k) array; default ids are the prefixed row indices."""
        arr = np.asarray(values, dtype=np.float64)
        if arr.ndim != 2:
            raise MalformedLine("expected a two-dimensional (n, k) array")
        n = arr.shape[0]
        if ids is None:
            ids = [f"{id_prefix}{i}" for i in range(n)]
        if labels is None:
            labels = [None] * n
        if len(ids) != n or len(labels) != n:
            raise MalformedLine(
                f"got {n} rows but {len(ids)} ids and {len(labels)} labels"
            )
        return cls(
            EmbeddingRecord(id=i, vector=row, label=lab)
            for i, row, lab in zip(ids, arr, labels)
        )

    @property
    def size(self) -> int:
        return len(self.records)

    @property
    def vectors(self) -> np.ndarray:
        """All vectors stacked into a cached read-only (n, k) matrix."""
        if self._matrix is None:
            mat = np.stack([rec.vector for rec in self.records])
            mat.flags.writeable = False
            self._matrix = mat
        return self._matrix

    def ids(self) -> tuple[str, ...]:
        return tuple(rec.id for rec in self.records)

    def __contains__(self, record_id: str) -> bool:
        return record_id in self._index

    def __getitem__(self, record_id: str) -> EmbeddingRecord:
        try:
            return self.records[self._index[record_id]]
        except KeyError:
            raise UnknownId(f"no record with id {record_id!r}") from None

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[EmbeddingRecord]:
        return iter(self.records)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EmbeddingSet):
            return NotImplemented
        return self.records == other.records

    def __repr__(self) -> str:
        return f"EmbeddingSet(n={self.size}, k={self.dimension})"


def _reject_constant(token: str):
    raise NonFiniteValue(f"non-finite JSON literal {token}")


def parse_record(line: str, line_index: int = 0) -> EmbeddingRecord:
    """Parse one JSON Lines record.

    Args:
        line: one line of text holding a single JSON object.
        line_index: zero-based position of the line in its file; becomes the
            record id when the object carries none.

    Raises:
        MalformedLine: not a JSON object, missing/ill-typed fields, or a null
            inside the vector.
        NonFiniteValue: any NaN or infinite vector entry, including literals
            such as ``NaN`` and numbers that overflow to infinity.
        EmptyVector: a vector with zero entries.
    """
    try:
        obj = json.loads(line, parse_constant=_reject_constant)
    except NonFiniteValue:
        raise
    except ValueError as exc:
        raise MalformedLine(f"not valid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise MalformedLine("line is not a JSON object")
    if "vector" not in obj:
        raise MalformedLine("record has no \"vector\" field")
    raw = obj["vector"]
    if not isinstance(raw, list):
        raise MalformedLine("\"vector\" must be a JSON array")
    if not raw:
        raise EmptyVector("\"vector\" is empty")
    for entry in raw:
        if isinstance(entry, bool) or not isinstance(entry, (int, float)):
            raise MalformedLine("vector entries must be numbers")
        if not math.isfinite(entry):
            raise NonFiniteValue("vector entries must be finite")
    record_id = obj.get("id")
    if record_id is None:
        record_id = str(line_index)
    elif not isinstance(record_id, str) or not record_id:
        raise MalformedLine("\"id\" must be a non-empty string")
    label = obj.get("label")
    if label is not None and not isinstance(label, str):
        raise MalformedLine("\"label\" must be a string")
    meta = obj.get("meta")
    if meta is not None and not isinstance(meta, dict):
        raise MalformedLine("\"meta\" must be a JSON object")
    return EmbeddingRecord(id=record_id, vector=np.array(raw, dtype=np.float64),
                           label=label, meta=meta)


def load_set(path) -> EmbeddingSet:
    """Load a JSON Lines embedding file, preserving record order.

    Whitespace-only lines are ignored but still count toward the line index
    used for defaulted ids. Error messages cite 1-based line numbers.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise IoError(str(exc)) from None
    records: list[EmbeddingRecord] = []
    first_line: dict[str, int] = {}
    dim: int | None = None
    for i, line in enumerate(lines):
        if not line.strip():
            continue
        try:
            rec = parse_record(line, line_index=i)
        except DivsatError as exc:
            raise type(exc)(f"line {i + 1}: {exc}") from None
        if dim is None:
            dim = rec.dimension
        elif rec.dimension != dim:
            raise DimensionMismatch(
                f"line {i + 1}: vector has dimension {rec.dimension}, expected {dim}"
            )
        if rec.id in first_line:
            raise DuplicateId(
                f"line {i + 1}: id {rec.id!r} already used on line {first_line[rec.id] + 1}"
            )
        first_line[rec.id] = i
        records.append(rec)
    if not records:
        raise EmptySet(f"{path}: no records")
    return EmbeddingSet(records)


def record_to_json(rec: EmbeddingRecord) -> str:
    obj: dict = {"id": rec.id, "vector": [float(v) for v in rec.vector]}
    if rec.label is not None:
        obj["label"] = rec.label
    if rec.meta is not None:
        obj["meta"] = dict(rec.meta)
    return json.dumps(obj, ensure_ascii=False, allow_nan=False)


def write_set(embeddings: EmbeddingSet, path) -> None:
    """Write a set as JSON Lines; a later load_set reproduces it exactly."""
    try:
        with open(path, "w", encoding="utf-8") as fh:
            for rec in embeddings.records:
                fh.write(record_to_json(rec))
                fh.write("\n")
    except OSError as exc:
        raise IoError(str(exc)) from None


def subset(embeddings: EmbeddingSet, ids: Iterable[str]) -> EmbeddingSet:
    """Records whose ids are in ``ids``, kept in their original relative order."""
    wanted = set(ids)
    missing = [i for i in wanted if i not in embeddings]
    if missing:
        raise UnknownId(f"no record with id {sorted(missing)[0]!r}")
    return EmbeddingSet(rec for rec in embeddings.records if rec.id in wanted)
