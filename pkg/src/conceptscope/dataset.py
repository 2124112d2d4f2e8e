"""Dataset model: weighted examples labeled with a prediction and concepts.

The JSONL interchange format (one example per line) is the contract
every other module consumes:

    {"id": "x1", "prediction": 1, "concepts": {"stripes": 1.0},
     "weight": 0.01, "ground_truth": -1}

Files are UTF-8 without BOM. ``weight`` and ``ground_truth`` are
optional; missing weights default to uniform 1/n and the whole weight
column is renormalized to sum to 1 at load time.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import BinaryIO, Sequence

from conceptscope.errors import (
    DomainError,
    ParseError,
    SchemaError,
    ValidationError,
)
from conceptscope.numerics import kahan_sum

WEIGHT_SUM_TOLERANCE = 1e-9

SCHEMA_INFER = "infer"
SCHEMA_STRICT = "strict"


@dataclass(frozen=True)
class LabeledExample:
    """One example: prediction h(x) in {-1,+1}, concept values c(x) in
    [-1,+1], probability mass p(x), and an optional ground-truth label
    used only for comparison series."""

    id: str
    prediction: int
    concepts: dict[str, float]
    weight: float
    ground_truth: int | None = None


@dataclass(frozen=True)
class ConceptDataset:
    """Immutable weighted dataset with a fixed concept schema.

    Invariants (checked at construction): weights are nonnegative and
    sum to 1 within 1e-9, every example carries exactly the schema's
    concept keys, predictions are in {-1,+1} and concept values in
    [-1,+1], and ids are unique.
    """

    examples: tuple[LabeledExample, ...]
    concept_names: tuple[str, ...]
    # Pre-normalization weight total when loaded from a file.
    original_weight_total: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "examples", tuple(self.examples))
        object.__setattr__(self, "concept_names", tuple(self.concept_names))
        _validate(self)

    def __len__(self) -> int:
        return len(self.examples)


def _is_number(value: object) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _validate(dataset: ConceptDataset) -> None:
    names = dataset.concept_names
    if len(set(names)) != len(names):
        raise SchemaError("duplicate concept names in schema")
    if not dataset.examples:
        raise ValidationError("dataset has no examples")
    schema = frozenset(names)
    seen_ids: set[str] = set()
    for ex in dataset.examples:
        if not isinstance(ex.id, str) or not ex.id:
            raise ValidationError("example id must be a non-empty string")
        if ex.id in seen_ids:
            raise ValidationError(f"duplicate example id {ex.id!r}")
        seen_ids.add(ex.id)
        if isinstance(ex.prediction, bool) or ex.prediction not in (-1, 1):
            raise ValidationError(
                f"example {ex.id!r}: prediction must be -1 or +1, got {ex.prediction!r}"
            )
        if ex.ground_truth is not None and (
            isinstance(ex.ground_truth, bool) or ex.ground_truth not in (-1, 1)
        ):
            raise ValidationError(
                f"example {ex.id!r}: ground_truth must be -1 or +1, got {ex.ground_truth!r}"
            )
        if set(ex.concepts) != schema:
            missing = sorted(schema - set(ex.concepts))
            extra = sorted(set(ex.concepts) - schema)
            raise SchemaError(
                f"example {ex.id!r}: concept keys do not match schema"
                f" (missing {missing}, extra {extra})"
            )
        for name in names:
            value = ex.concepts[name]
            if not _is_number(value) or not math.isfinite(value) or not -1.0 <= value <= 1.0:
                raise ValidationError(
                    f"example {ex.id!r}: concept {name!r} value {value!r} outside [-1, +1]"
                )
        if not _is_number(ex.weight) or not math.isfinite(ex.weight) or ex.weight < 0:
            raise ValidationError(
                f"example {ex.id!r}: weight must be a finite number >= 0, got {ex.weight!r}"
            )
    total = kahan_sum(ex.weight for ex in dataset.examples)
    if abs(total - 1.0) > WEIGHT_SUM_TOLERANCE:
        raise ValidationError(
            f"weights sum to {total!r}; expected 1 within {WEIGHT_SUM_TOLERANCE}"
        )


def _as_sign(value: object, where: str) -> int:
    """Accept 1/-1 as int or integral float; reject everything else."""
    if isinstance(value, bool):
        raise ValidationError(f"{where}: expected -1 or +1, got a boolean")
    if isinstance(value, int) and value in (-1, 1):
        return value
    if isinstance(value, float) and value in (-1.0, 1.0):
        return int(value)
    raise ValidationError(f"{where}: expected -1 or +1, got {value!r}")


def load_dataset(
    source: bytes | BinaryIO,
    schema_mode: str = SCHEMA_INFER,
    *,
    schema: Sequence[str] | None = None,
) -> ConceptDataset:
    """Parse JSONL bytes into a ConceptDataset.

    Args:
        source: raw bytes or a binary file object.
        schema_mode: ``infer`` takes the schema from the first line in
            its key order; ``strict`` validates every line against the
            explicit ``schema`` sequence.
        schema: concept names, required for strict mode.

    Missing weights default to uniform 1/n; the weight column is then
    renormalized to total 1 and the raw total is kept on the dataset.
    """
    if schema_mode not in (SCHEMA_INFER, SCHEMA_STRICT):
        raise DomainError(f"unknown schema_mode {schema_mode!r}")
    if schema_mode == SCHEMA_STRICT and not schema:
        raise DomainError("strict schema_mode requires an explicit schema")

    data = source if isinstance(source, bytes) else source.read()
    if data.startswith(b"\xef\xbb\xbf"):
        raise ParseError("input starts with a UTF-8 BOM; the format forbids it")
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"input is not valid UTF-8: {exc}") from None

    rows: list[tuple[int, dict]] = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        stripped = line.strip()
        if not stripped:
            continue
        try:
            obj = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise ParseError(f"line {lineno}: invalid JSON ({exc.msg})") from None
        if not isinstance(obj, dict):
            raise ParseError(f"line {lineno}: expected a JSON object")
        rows.append((lineno, obj))
    if not rows:
        raise ParseError("no examples found in input")

    n = len(rows)
    schema_names: tuple[str, ...] | None = tuple(schema) if schema else None
    parsed: list[tuple[str, int, dict[str, float], float | None, int | None]] = []
    seen_ids: dict[str, int] = {}

    for lineno, obj in rows:
        where = f"line {lineno}"
        example_id = obj.get("id")
        if not isinstance(example_id, str) or not example_id:
            raise ValidationError(f"{where}: missing or empty 'id'")
        if example_id in seen_ids:
            raise ValidationError(
                f"{where}: duplicate id {example_id!r} (first seen on line {seen_ids[example_id]})"
            )
        seen_ids[example_id] = lineno

        if "prediction" not in obj:
            raise ValidationError(f"{where}: missing 'prediction'")
        prediction = _as_sign(obj["prediction"], f"{where}: prediction")

        concepts_raw = obj.get("concepts")
        if not isinstance(concepts_raw, dict):
            raise ValidationError(f"{where}: 'concepts' must be an object")
        if schema_names is None:
            schema_names = tuple(concepts_raw.keys())
        if set(concepts_raw) != set(schema_names):
            missing = sorted(set(schema_names) - set(concepts_raw))
            extra = sorted(set(concepts_raw) - set(schema_names))
            raise SchemaError(
                f"{where}: concept keys do not match schema (missing {missing}, extra {extra})"
            )
        concepts: dict[str, float] = {}
        for name in schema_names:
            value = concepts_raw[name]
            if not _is_number(value) or not math.isfinite(value) or not -1.0 <= value <= 1.0:
                raise ValidationError(
                    f"{where}: concept {name!r} value {value!r} outside [-1, +1]"
                )
            concepts[name] = float(value)

        weight: float | None = None
        if "weight" in obj and obj["weight"] is not None:
            raw_weight = obj["weight"]
            if not _is_number(raw_weight) or not math.isfinite(raw_weight) or raw_weight < 0:
                raise ValidationError(f"{where}: weight must be a finite number >= 0")
            weight = float(raw_weight)

        ground_truth: int | None = None
        if "ground_truth" in obj and obj["ground_truth"] is not None:
            ground_truth = _as_sign(obj["ground_truth"], f"{where}: ground_truth")

        parsed.append((example_id, prediction, concepts, weight, ground_truth))

    uniform = 1.0 / n
    raw_weights = [w if w is not None else uniform for (_, _, _, w, _) in parsed]
    total = kahan_sum(raw_weights)
    if total <= 0.0:
        raise ValidationError("total weight must be positive")

    examples = tuple(
        LabeledExample(
            id=example_id,
            prediction=prediction,
            concepts=concepts,
            weight=raw / total,
            ground_truth=ground_truth,
        )
        for (example_id, prediction, concepts, _, ground_truth), raw in zip(parsed, raw_weights)
    )
    assert schema_names is not None
    return ConceptDataset(examples, schema_names, original_weight_total=total)


def to_jsonl(dataset: ConceptDataset) -> bytes:
    """Serialize in the JSONL interchange format with stable bytes."""
    lines = []
    for ex in dataset.examples:
        obj: dict[str, object] = {
            "id": ex.id,
            "prediction": ex.prediction,
            "concepts": {name: float(ex.concepts[name]) for name in dataset.concept_names},
            "weight": float(ex.weight),
        }
        if ex.ground_truth is not None:
            obj["ground_truth"] = ex.ground_truth
        lines.append(json.dumps(obj, separators=(",", ":"), allow_nan=False))
    return ("\n".join(lines) + "\n").encode("utf-8")


def with_ground_truth_predictions(dataset: ConceptDataset) -> ConceptDataset:
    """Dataset with predictions replaced by ground-truth labels.

    Used for the "ground truth" comparison series in reports; errors if
    any example lacks a ground-truth label.
    """
    examples = []
    for ex in dataset.examples:
        if ex.ground_truth is None:
            raise ValidationError(
                f"example {ex.id!r} has no ground_truth; cannot build the ground-truth series"
            )
        examples.append(
            LabeledExample(
                id=ex.id,
                prediction=ex.ground_truth,
                concepts=ex.concepts,
                weight=ex.weight,
                ground_truth=ex.ground_truth,
            )
        )
    return ConceptDataset(
        tuple(examples), dataset.concept_names, dataset.original_weight_total
    )
