"""The three concept-importance measures and their sampling plan.

For prediction h(x) in {-1,+1}, concept value c(x) in [-1,+1] and
probability mass p(x), the measures are

    symmetric            E[h(x) c(x)]          concept/class agreement
    class-conditioned    E[c(x) | h(x) = +1]   necessity of the concept
    concept-conditioned  E[h(x) | c(x) >= t]   sufficiency of the concept

estimated as weighted means over the dataset. All reductions use
fixed-order Kahan summation, so equal input bytes give bit-identical
results. Empty conditioning sets raise UndefinedMeasureError rather
than returning NaN.

The sampling plan inverts the two-sided Hoeffding tail for [-1,1]
variables, exp(-n eps^2 / 2) = delta, giving n = ceil(2 ln(1/delta) /
eps^2) samples for radius eps, and radius sqrt(2 ln(1/delta) / n) for
n samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from conceptscope.dataset import ConceptDataset
from conceptscope.errors import DomainError, SchemaError, UndefinedMeasureError
from conceptscope.numerics import KahanAccumulator

SYMMETRIC = "symmetric"
CLASS_CONDITIONED = "class_conditioned"
CONCEPT_CONDITIONED = "concept_conditioned"

MEASURE_KINDS = (SYMMETRIC, CLASS_CONDITIONED, CONCEPT_CONDITIONED)


@dataclass(frozen=True)
class MeasureResult:
    """A measure value with its conditioning info.

    ``effective_count`` is the total weight of the conditioning set;
    ``confidence_radius`` is the Hoeffding radius at the requested
    delta, computed from the conditioning set's example count.
    """

    kind: str
    concept_name: str
    value: float
    threshold: float | None
    effective_count: float
    confidence_radius: float | None


def _require_concept(dataset: ConceptDataset, concept: str) -> None:
    if concept not in dataset.concept_names:
        raise SchemaError(
            f"unknown concept {concept!r}; schema has {list(dataset.concept_names)}"
        )


def _clamp(value: float) -> float:
    # Weights may sum to 1 only within 1e-9, so guard the [-1, 1] range.
    return min(1.0, max(-1.0, value))


def _radius_or_none(count: int, delta: float | None) -> float | None:
    if delta is None:
        return None
    return hoeffding_radius(count, delta)


def symmetric_measure(
    dataset: ConceptDataset, concept: str, *, delta: float | None = None
) -> MeasureResult:
    """Weighted mean of h(x)*c(x) over the whole dataset."""
    _require_concept(dataset, concept)
    total = KahanAccumulator()
    weight = KahanAccumulator()
    for ex in dataset.examples:
        total.add(ex.weight * ex.prediction * ex.concepts[concept])
        weight.add(ex.weight)
    return MeasureResult(
        kind=SYMMETRIC,
        concept_name=concept,
        value=_clamp(total.total),
        threshold=None,
        effective_count=weight.total,
        confidence_radius=_radius_or_none(len(dataset.examples), delta),
    )


def class_conditioned_measure(
    dataset: ConceptDataset, concept: str, *, delta: float | None = None
) -> MeasureResult:
    """Weighted mean of c(x) over examples predicted +1."""
    _require_concept(dataset, concept)
    numerator = KahanAccumulator()
    denominator = KahanAccumulator()
    count = 0
    for ex in dataset.examples:
        if ex.prediction == 1:
            numerator.add(ex.weight * ex.concepts[concept])
            denominator.add(ex.weight)
            count += 1
    if count == 0 or denominator.total <= 0.0:
        raise UndefinedMeasureError(
            f"class-conditioned measure of {concept!r} is undefined:"
            " no weight on examples predicted +1"
        )
    return MeasureResult(
        kind=CLASS_CONDITIONED,
        concept_name=concept,
        value=_clamp(numerator.total / denominator.total),
        threshold=None,
        effective_count=denominator.total,
        confidence_radius=_radius_or_none(count, delta),
    )


def concept_conditioned_measure(
    dataset: ConceptDataset,
    concept: str,
    theta: float,
    *,
    delta: float | None = None,
) -> MeasureResult:
    """Weighted mean of h(x) over examples with c(x) >= theta.

    Ties c(x) == theta are included. For discrete concepts theta = 1
    conditions on the concept being fully present.
    """
    _require_concept(dataset, concept)
    if not isinstance(theta, (int, float)) or isinstance(theta, bool):
        raise DomainError(f"theta must be a number, got {theta!r}")
    if not math.isfinite(theta) or not -1.0 <= theta <= 1.0:
        raise DomainError(f"theta must lie in [-1, +1], got {theta!r}")
    numerator = KahanAccumulator()
    denominator = KahanAccumulator()
    count = 0
    for ex in dataset.examples:
        if ex.concepts[concept] >= theta:
            numerator.add(ex.weight * ex.prediction)
            denominator.add(ex.weight)
            count += 1
    if count == 0 or denominator.total <= 0.0:
        raise UndefinedMeasureError(
            f"concept-conditioned measure of {concept!r} at theta={theta!r} is undefined:"
            " no weight on examples with the concept above threshold"
        )
    return MeasureResult(
        kind=CONCEPT_CONDITIONED,
        concept_name=concept,
        value=_clamp(numerator.total / denominator.total),
        threshold=float(theta),
        effective_count=denominator.total,
        confidence_radius=_radius_or_none(count, delta),
    )


def hoeffding_sample_size(epsilon: float, delta: float) -> int:
    """Samples needed so a [-1,1] mean deviates < epsilon w.p. 1 - delta."""
    if not 0.0 < epsilon < 1.0:
        raise DomainError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta!r}")
    return math.ceil(2.0 * math.log(1.0 / delta) / (epsilon * epsilon))


def hoeffding_radius(n: int, delta: float) -> float:
    """Deviation radius guaranteed w.p. 1 - delta by n samples in [-1,1]."""
    if not isinstance(n, int) or isinstance(n, bool) or n <= 0:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta!r}")
    return math.sqrt(2.0 * math.log(1.0 / delta) / n)
