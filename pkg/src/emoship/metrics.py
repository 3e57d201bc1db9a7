"""Sequence aggregation, macro-averaged evaluation, and pilot-study analytics."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .core import (EmotionLabel, NON_NEUTRAL_EMOTIONS, POSITIVE_EMOTIONS)
from .errors import DataError, InputError


def majority_vote(seq: Sequence[EmotionLabel]) -> EmotionLabel:
    """Most frequent label; ties resolve to the lowest class code."""
    if not seq:
        raise DataError("majority_vote needs a non-empty sequence")
    counts: Dict[EmotionLabel, int] = {}
    for label in seq:
        counts[label] = counts.get(label, 0) + 1
    return min(counts, key=lambda lab: (-counts[lab], int(lab)))


@dataclass(frozen=True)
class ConfusionMatrix:
    """rows = truth, cols = prediction, over the given label order."""

    labels: Tuple[EmotionLabel, ...]
    counts: Tuple[Tuple[int, ...], ...]

    @classmethod
    def build(cls, truth: Sequence[EmotionLabel], pred: Sequence[EmotionLabel],
              labels: Sequence[EmotionLabel] = NON_NEUTRAL_EMOTIONS
              ) -> "ConfusionMatrix":
        if len(truth) != len(pred):
            raise InputError(f"length mismatch: {len(truth)} truth vs {len(pred)} pred")
        index = {lab: i for i, lab in enumerate(labels)}
        grid = [[0] * len(labels) for _ in labels]
        for t, p in zip(truth, pred):
            grid[index[t]][index[p]] += 1
        return cls(labels=tuple(labels), counts=tuple(tuple(r) for r in grid))

    def row_sums(self) -> Tuple[int, ...]:
        return tuple(sum(row) for row in self.counts)

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["truth\\pred"] + [lab.name.lower() for lab in self.labels])
            for lab, row in zip(self.labels, self.counts):
                writer.writerow([lab.name.lower()] + list(row))


def macro_metrics(truth: Sequence[EmotionLabel], pred: Sequence[EmotionLabel],
                  labels: Sequence[EmotionLabel] = NON_NEUTRAL_EMOTIONS
                  ) -> Tuple[float, float, float]:
    """One-vs-rest macro (precision, recall, accuracy) over C classes.

    Classes with a zero denominator contribute 0 to the macro mean.  The
    plain multiclass accuracy is available via :func:`multiclass_accuracy`.
    """
    if len(truth) != len(pred):
        raise InputError(f"length mismatch: {len(truth)} truth vs {len(pred)} pred")
    for seq in (truth, pred):
        for lab in seq:
            if lab not in labels:
                raise InputError(f"label {lab!r} outside the evaluated set")
    C = len(labels)
    precision_sum = recall_sum = accuracy_sum = 0.0
    n = len(truth)
    for lab in labels:
        tp = sum(1 for t, p in zip(truth, pred) if t == lab and p == lab)
        fp = sum(1 for t, p in zip(truth, pred) if t != lab and p == lab)
        fn = sum(1 for t, p in zip(truth, pred) if t == lab and p != lab)
        tn = n - tp - fp - fn
        precision_sum += tp / (tp + fp) if tp + fp > 0 else 0.0
        recall_sum += tp / (tp + fn) if tp + fn > 0 else 0.0
        accuracy_sum += (tp + tn) / n if n > 0 else 0.0
    return precision_sum / C, recall_sum / C, accuracy_sum / C


def multiclass_accuracy(truth: Sequence[EmotionLabel],
                        pred: Sequence[EmotionLabel]) -> float:
    if len(truth) != len(pred):
        raise InputError(f"length mismatch: {len(truth)} truth vs {len(pred)} pred")
    if not truth:
        raise InputError("empty label lists")
    return sum(1 for t, p in zip(truth, pred) if t == p) / len(truth)


# -- pilot-study analytics --------------------------------------------------

PILOT_COLUMNS = ("participant", "t_always_on_min", "t_neye_min", "t_capture_min",
                 "distinct_em", "true_em", "false_em", "missed_em")


@dataclass(frozen=True)
class PilotRow:
    participant: str
    t_always_on: float  # minutes
    t_neye: float
    t_capture: float
    distinct_em: int
    true_em: int
    false_em: int
    missed_em: int

    def __post_init__(self):
        if min(self.t_always_on, self.t_neye, self.t_capture) < 0:
            raise DataError(f"{self.participant}: times must be >= 0")
        if min(self.distinct_em, self.true_em, self.false_em, self.missed_em) < 0:
            raise DataError(f"{self.participant}: counts must be >= 0")


def pilot_derive(row: PilotRow) -> Tuple[Optional[float], Optional[float]]:
    """(precision, recall) over emotional moments; None marks an undefined metric."""
    tp, fp, fn = row.true_em, row.false_em, row.missed_em
    precision = tp / (tp + fp) if tp + fp > 0 else None
    recall = tp / (tp + fn) if tp + fn > 0 else None
    return precision, recall


@dataclass(frozen=True)
class PilotSummary:
    mean_precision: float  # pooled over all moments
    mean_recall: float
    unweighted_precision: float  # per-participant average, for reference
    unweighted_recall: float
    total_always_on: float
    total_neye: float
    total_capture: float
    reduction_neye: float
    reduction_capture: float


def pilot_summary(rows: Sequence[PilotRow]) -> PilotSummary:
    """Aggregate the per-participant table.

    The headline precision/recall pool true/false/missed moments across
    participants (this is the arithmetic behind the reported study means);
    the per-participant unweighted averages are also exposed.
    """
    if not rows:
        raise InputError("pilot summary needs at least one row")
    tp = sum(r.true_em for r in rows)
    fp = sum(r.false_em for r in rows)
    fn = sum(r.missed_em for r in rows)
    if tp + fp == 0 or tp + fn == 0:
        raise InputError("no emotional moments in pilot data")
    per_row = [pilot_derive(r) for r in rows]
    precisions = [p for p, _ in per_row if p is not None]
    recalls = [r for _, r in per_row if r is not None]
    t_on = sum(r.t_always_on for r in rows)
    t_neye = sum(r.t_neye for r in rows)
    t_cap = sum(r.t_capture for r in rows)
    if t_on <= 0:
        raise InputError("total always-on time must be positive")
    return PilotSummary(
        mean_precision=tp / (tp + fp),
        mean_recall=tp / (tp + fn),
        unweighted_precision=sum(precisions) / len(precisions),
        unweighted_recall=sum(recalls) / len(recalls),
        total_always_on=t_on, total_neye=t_neye, total_capture=t_cap,
        reduction_neye=(t_on - t_neye) / t_on,
        reduction_capture=(t_on - t_cap) / t_on)


def load_pilot_csv(path) -> List[PilotRow]:
    try:
        with open(path, "r", encoding="utf-8", newline="") as f:
            reader = csv.DictReader(f)
            if reader.fieldnames is None:
                raise InputError(f"{path}: empty pilot CSV")
            missing = [c for c in PILOT_COLUMNS if c not in reader.fieldnames]
            if missing:
                raise InputError(f"{path}: missing pilot columns {missing}")
            rows = []
            for lineno, rec in enumerate(reader, start=2):
                try:
                    rows.append(PilotRow(
                        participant=rec["participant"],
                        t_always_on=float(rec["t_always_on_min"]),
                        t_neye=float(rec["t_neye_min"]),
                        t_capture=float(rec["t_capture_min"]),
                        distinct_em=int(rec["distinct_em"]),
                        true_em=int(rec["true_em"]),
                        false_em=int(rec["false_em"]),
                        missed_em=int(rec["missed_em"])))
                except (TypeError, ValueError, DataError) as exc:
                    raise InputError(f"{path}:{lineno}: {exc}") from exc
    except OSError as exc:
        raise InputError(f"cannot read pilot CSV {path}: {exc}") from exc
    if not rows:
        raise InputError(f"{path}: no pilot rows")
    return rows


def profile_type(counts: Dict[EmotionLabel, int]) -> Tuple[str, float, float]:
    """Positive/negative emotional-profile typing.

    Returns (type, Pr, Nr): "TypeI" when the positive ratio strictly exceeds
    the negative ratio, else "TypeII".
    """
    total = 0
    positive = 0
    for label, count in counts.items():
        if label.is_neutral:
            continue
        if count < 0:
            raise DataError(f"negative count for {label}")
        total += count
        if label in POSITIVE_EMOTIONS:
            positive += count
    if total == 0:
        raise DataError("profile typing needs at least one non-neutral moment")
    pr = positive / total
    nr = 1.0 - pr
    return ("TypeI" if pr > nr else "TypeII"), pr, nr
