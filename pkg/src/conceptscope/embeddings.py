"""Shared JSON vector-file format.

    {"dim": D, "vectors": [{"id": "...", "values": [... D floats ...]},
                            ...]}

Loaded vectors are normalized to unit Euclidean norm; zero or
non-finite vectors are rejected. A vector entry may carry an optional
"label" string, used by image files in zero-shot evaluation. The
writer emits raw values without renormalizing, so edited (non-unit)
prompts round-trip unchanged.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import BinaryIO, Sequence

import numpy as np

from conceptscope.errors import ParseError, ValidationError


@dataclass(frozen=True)
class VectorEntry:
    id: str
    values: np.ndarray
    label: str | None = None


@dataclass(frozen=True)
class VectorFile:
    dim: int
    entries: tuple[VectorEntry, ...]


def _read_bytes(source: bytes | BinaryIO) -> bytes:
    return source if isinstance(source, bytes) else source.read()


def load_vector_file(source: bytes | BinaryIO, *, normalize: bool = True) -> VectorFile:
    """Parse and (by default) unit-normalize a vector file."""
    data = _read_bytes(source)
    try:
        obj = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"invalid vector file: {exc}") from None
    if not isinstance(obj, dict):
        raise ParseError("vector file must be a JSON object")

    dim = obj.get("dim")
    if not isinstance(dim, int) or isinstance(dim, bool) or dim <= 0:
        raise ValidationError(f"'dim' must be a positive integer, got {dim!r}")
    vectors = obj.get("vectors")
    if not isinstance(vectors, list) or not vectors:
        raise ValidationError("'vectors' must be a non-empty list")

    entries: list[VectorEntry] = []
    seen: set[str] = set()
    for index, item in enumerate(vectors):
        where = f"vectors[{index}]"
        if not isinstance(item, dict):
            raise ValidationError(f"{where}: expected an object")
        vector_id = item.get("id")
        if not isinstance(vector_id, str) or not vector_id:
            raise ValidationError(f"{where}: missing or empty 'id'")
        if vector_id in seen:
            raise ValidationError(f"{where}: duplicate id {vector_id!r}")
        seen.add(vector_id)
        raw = item.get("values")
        if not isinstance(raw, list) or len(raw) != dim:
            raise ValidationError(f"{where}: 'values' must be a list of {dim} numbers")
        values = np.asarray(raw, dtype=np.float64)
        if not np.all(np.isfinite(values)):
            raise ValidationError(f"{where}: non-finite component in {vector_id!r}")
        if normalize:
            norm = float(np.linalg.norm(values))
            if norm == 0.0:
                raise ValidationError(f"{where}: zero vector {vector_id!r} cannot be normalized")
            values = values / norm
        label = item.get("label")
        if label is not None and not isinstance(label, str):
            raise ValidationError(f"{where}: 'label' must be a string when present")
        entries.append(VectorEntry(id=vector_id, values=values, label=label))
    return VectorFile(dim=dim, entries=tuple(entries))


def dump_vector_file(dim: int, entries: Sequence[VectorEntry]) -> bytes:
    """Serialize entries with stable bytes (raw values, no renormalizing)."""
    payload = {
        "dim": dim,
        "vectors": [
            {
                "id": entry.id,
                "values": [float(v) for v in entry.values],
                **({"label": entry.label} if entry.label is not None else {}),
            }
            for entry in entries
        ],
    }
    return (json.dumps(payload, indent=2, sort_keys=True) + "\n").encode("utf-8")
