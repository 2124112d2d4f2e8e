"""Independent brute-force oracles used to check package results.

Everything here is written with plain loops and math.fsum so it shares
no code path with the package's Kahan reductions.
"""

from __future__ import annotations

import math


def naive_symmetric(dataset, concept):
    return math.fsum(
        ex.weight * ex.prediction * ex.concepts[concept] for ex in dataset.examples
    )


def naive_class_conditioned(dataset, concept):
    members = [ex for ex in dataset.examples if ex.prediction == 1]
    total = math.fsum(ex.weight for ex in members)
    if not members or total <= 0.0:
        return None
    return math.fsum(ex.weight * ex.concepts[concept] for ex in members) / total


def naive_concept_conditioned(dataset, concept, theta):
    members = [ex for ex in dataset.examples if ex.concepts[concept] >= theta]
    total = math.fsum(ex.weight for ex in members)
    if not members or total <= 0.0:
        return None
    return math.fsum(ex.weight * ex.prediction for ex in members) / total


def naive_completeness(dataset, concept):
    """Max weighted agreement over the four level-to-class decoders."""
    best = None
    for out_pos in (1, -1):
        for out_neg in (1, -1):
            score = math.fsum(
                ex.weight
                for ex in dataset.examples
                if ex.prediction == (out_pos if ex.concepts[concept] == 1.0 else out_neg)
            )
            if best is None or score > best:
                best = score
    return best


def naive_vote_metrics(records, k):
    labels = ["present" if r.yes_count >= k else "absent" for r in records]
    correct = sum(1 for label, r in zip(labels, records) if label == r.true_label)
    present = [(label, r) for label, r in zip(labels, records) if r.true_label == "present"]
    recall = (
        sum(1 for label, _ in present if label == "present") / len(present)
        if present
        else None
    )
    return correct / len(records), recall


def naive_macro_f1(pairs):
    labels = sorted({p for p, _ in pairs} | {t for _, t in pairs})
    scores = []
    for label in labels:
        tp = sum(1 for p, t in pairs if p == label and t == label)
        fp = sum(1 for p, t in pairs if p == label and t != label)
        fn = sum(1 for p, t in pairs if p != label and t == label)
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        scores.append(
            2 * precision * recall / (precision + recall) if precision + recall else 0.0
        )
    return math.fsum(scores) / len(labels)
