"""Executable verification suites over randomized synthetic instances.

Three suites are provided:

* ``axioms``: weight-split invariance, duplicate-and-halve linearity,
  and the conditional decomposition identity of the symmetric measure,
  each to 1e-12 on random datasets.
* ``theorem1``: closed-form completeness equals the brute-force decoder
  maximum to 1e-12 on random binary datasets.
* ``theorem2``: the conditional concept mean stays within epsilon of
  the continuous linear-head score on cap-constrained samples, with a
  three-sigma allowance on the Monte Carlo failure rate.

All suites are deterministic given their seed and emit structured
failure records for offline inspection.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from conceptscope.completeness import completeness_brute_force, completeness_closed_form
from conceptscope.dataset import ConceptDataset, LabeledExample
from conceptscope.errors import UndefinedMeasureError
from conceptscope.measures import (
    class_conditioned_measure,
    concept_conditioned_measure,
    symmetric_measure,
)
from conceptscope.synthetic import (
    BINARY,
    CONTINUOUS,
    WEIGHTS_DYADIC,
    WEIGHTS_RANDOM,
    SyntheticSpec,
    derive_seed,
    generate_dataset,
    make_rng,
    split_example,
    theorem2_trial,
)

IDENTITY_TOLERANCE = 1e-12


@dataclass
class SuiteReport:
    suite: str
    passed: bool
    lines: list[str]
    failures: list[dict] = field(default_factory=list)


def _map_trials(worker, indices, threads: int) -> list:
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(worker, indices))
    return [worker(i) for i in indices]


def _all_measures(dataset: ConceptDataset, concept: str, theta: float) -> dict[str, float | None]:
    values: dict[str, float | None] = {}
    values["symmetric"] = symmetric_measure(dataset, concept).value
    try:
        values["class_conditioned"] = class_conditioned_measure(dataset, concept).value
    except UndefinedMeasureError:
        values["class_conditioned"] = None
    try:
        values["concept_conditioned"] = concept_conditioned_measure(
            dataset, concept, theta
        ).value
    except UndefinedMeasureError:
        values["concept_conditioned"] = None
    return values


def _duplicate_and_halve(dataset: ConceptDataset) -> ConceptDataset:
    examples = []
    for suffix in ("", "+dup"):
        for ex in dataset.examples:
            examples.append(
                LabeledExample(
                    id=ex.id + suffix,
                    prediction=ex.prediction,
                    concepts=ex.concepts,
                    weight=ex.weight / 2.0,
                    ground_truth=ex.ground_truth,
                )
            )
    return ConceptDataset(tuple(examples), dataset.concept_names)


def _decomposition_gap(dataset: ConceptDataset, concept: str) -> float | None:
    """Check E[hc] = E[c|h=1] Pr(h=1) - E[c|h=-1] Pr(h=-1).

    The h=-1 side is recomputed here with plain fsum so the check does
    not reuse the package's summation path.
    """
    negatives = [ex for ex in dataset.examples if ex.prediction == -1]
    weight_neg = math.fsum(ex.weight for ex in negatives)
    try:
        positive = class_conditioned_measure(dataset, concept)
    except UndefinedMeasureError:
        return None
    if not negatives or weight_neg <= 0.0:
        return None
    mean_neg = math.fsum(ex.weight * ex.concepts[concept] for ex in negatives) / weight_neg
    expected = positive.value * positive.effective_count - mean_neg * weight_neg
    return abs(symmetric_measure(dataset, concept).value - expected)


def run_axioms_suite(trials: int, seed: int, *, threads: int = 1) -> SuiteReport:
    """Recursivity, weight linearity and the decomposition identity."""

    def one_trial(index: int) -> list[dict]:
        child = derive_seed(seed, index)
        rng = make_rng(child, 1)
        n = int(rng.integers(2, 13))
        kind = BINARY if index % 2 == 0 else CONTINUOUS
        dataset = generate_dataset(
            SyntheticSpec(
                n_examples=n,
                n_concepts=2,
                concept_kind=kind,
                seed=child,
                weight_kind=WEIGHTS_DYADIC,
            )
        )
        concept = dataset.concept_names[0]
        theta = float(rng.uniform(-1.0, 1.0))
        failures: list[dict] = []

        fraction = int(rng.integers(1, 1024)) / 1024.0
        target = dataset.examples[int(rng.integers(n))].id
        before = _all_measures(dataset, concept, theta)
        after = _all_measures(split_example(dataset, target, fraction), concept, theta)
        for name in before:
            left, right = before[name], after[name]
            if (left is None) != (right is None):
                failures.append(
                    {"check": "recursivity", "trial": index, "measure": name,
                     "detail": "definedness changed across split"}
                )
            elif left is not None and abs(left - right) > IDENTITY_TOLERANCE:
                failures.append(
                    {"check": "recursivity", "trial": index, "measure": name,
                     "gap": abs(left - right), "fraction": fraction}
                )

        doubled = _all_measures(_duplicate_and_halve(dataset), concept, theta)
        for name in before:
            left, right = before[name], doubled[name]
            if left is not None and right is not None and abs(left - right) > IDENTITY_TOLERANCE:
                failures.append(
                    {"check": "linearity", "trial": index, "measure": name,
                     "gap": abs(left - right)}
                )

        gap = _decomposition_gap(dataset, concept)
        if gap is not None and gap > IDENTITY_TOLERANCE:
            failures.append({"check": "decomposition", "trial": index, "gap": gap})
        return failures

    failures = [f for trial in _map_trials(one_trial, range(trials), threads) for f in trial]
    checks = ("recursivity", "linearity", "decomposition")
    lines = []
    for check in checks:
        bad = sum(1 for f in failures if f["check"] == check)
        status = "PASS" if bad == 0 else "FAIL"
        lines.append(
            f"axioms/{check}: {status} ({trials - bad}/{trials} within {IDENTITY_TOLERANCE:g})"
        )
    return SuiteReport("axioms", not failures, lines, failures)


def run_theorem1_suite(trials: int, seed: int, *, threads: int = 1) -> SuiteReport:
    """Closed-form completeness against the brute-force decoder maximum."""

    def one_trial(index: int) -> list[dict]:
        child = derive_seed(seed, index)
        rng = make_rng(child, 1)
        dataset = generate_dataset(
            SyntheticSpec(
                n_examples=int(rng.integers(1, 13)),
                n_concepts=1,
                concept_kind=BINARY,
                seed=child,
                weight_kind=WEIGHTS_RANDOM,
            )
        )
        concept = dataset.concept_names[0]
        closed = completeness_closed_form(dataset, concept)
        brute = completeness_brute_force(dataset, concept)
        failures: list[dict] = []
        gap = abs(closed.value - brute.value)
        if gap > IDENTITY_TOLERANCE:
            failures.append(
                {"check": "equality", "trial": index, "gap": gap,
                 "closed": closed.value, "brute": brute.value}
            )
        if not 0.5 - 1e-9 <= closed.value <= 1.0:
            failures.append(
                {"check": "range", "trial": index, "value": closed.value}
            )
        return failures

    failures = [f for trial in _map_trials(one_trial, range(trials), threads) for f in trial]
    bad = len({f["trial"] for f in failures})
    status = "PASS" if not failures else "FAIL"
    lines = [
        f"theorem1/equality: {status} ({trials - bad}/{trials} within {IDENTITY_TOLERANCE:g})"
    ]
    return SuiteReport("theorem1", not failures, lines, failures)


def run_theorem2_suite(
    epsilon: float,
    delta: float,
    dim: int,
    trials: int,
    seed: int,
    *,
    threads: int = 1,
):
    """Monte Carlo check of the concept-score bound.

    Passes when the empirical failure rate stays within delta plus
    three sigma of the binomial sampling noise.
    """

    def one_trial(index: int):
        return theorem2_trial(epsilon, delta, dim, derive_seed(seed, index))

    records = _map_trials(one_trial, range(trials), threads)
    held = sum(1 for r in records if r.bound_holds)
    failure_rate = 1.0 - held / trials
    slack = 3.0 * math.sqrt(delta * (1.0 - delta) / trials)
    passed = failure_rate <= delta + slack
    failures = [
        {"check": "bound", "trial": i, "lhs_gap": r.lhs_gap, "n_used": r.n_used}
        for i, r in enumerate(records)
        if not r.bound_holds
    ]
    status = "PASS" if passed else "FAIL"
    lines = [
        f"theorem2/bound: {status} ({held}/{trials} trials with gap < {epsilon:g};"
        f" failure rate {failure_rate:.4f} vs allowed {delta + slack:.4f}, dim {dim})"
    ]
    report = SuiteReport("theorem2", passed, lines, failures)
    return report, records
