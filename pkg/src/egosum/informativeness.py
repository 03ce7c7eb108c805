"""Informativeness filtering and its evaluation against frame labels."""
from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass, asdict
from typing import Mapping, Sequence

import numpy as np

from .model import DatasetError, Event, FrameRecord

#: Discard threshold used by the summarization pipeline.
DEFAULT_THRESHOLD = 0.025
#: Threshold with the best F-measure in the reported informativeness sweep.
BEST_F_THRESHOLD = 0.05

SWEEP_COLUMNS = ("threshold", "tp", "fp", "fn", "tn",
                 "accuracy", "precision", "recall", "f_measure")


@dataclass(frozen=True)
class FilteredEvent:
    event_id: str
    kept: tuple[FrameRecord, ...]
    discarded: tuple[str, ...]
    threshold: float
    empty: bool = False

    @property
    def M(self) -> int:
        return len(self.kept)

    @property
    def frames(self) -> tuple[FrameRecord, ...]:
        return self.kept

    @property
    def kept_ids(self) -> tuple[str, ...]:
        return tuple(f.frame_id for f in self.kept)


@dataclass(frozen=True)
class ClassificationMetrics:
    threshold: float
    tp: int
    fp: int
    fn: int
    tn: int
    accuracy: float
    precision: float
    recall: float
    f_measure: float

    @classmethod
    def from_counts(cls, threshold: float, tp: int, fp: int, fn: int, tn: int) -> "ClassificationMetrics":
        precision = tp / (tp + fp) if tp + fp else 1.0
        recall = tp / (tp + fn) if tp + fn else 1.0
        f = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        total = tp + fp + fn + tn
        return cls(threshold, tp, fp, fn, tn, (tp + tn) / total, precision, recall, f)


def filter_informative(e: Event, threshold: float = DEFAULT_THRESHOLD) -> FilteredEvent:
    """Split an event into frames scoring at least ``threshold`` and the rest.

    Frames on the boundary are kept. If nothing survives, the result has
    ``empty=True`` and a :class:`UserWarning` is issued.
    """
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold {threshold} not in [0, 1]")
    kept = tuple(f for f in e.frames if f.informativeness >= threshold)
    discarded = tuple(f.frame_id for f in e.frames if f.informativeness < threshold)
    empty = not kept
    if empty:
        warnings.warn(f"event {e.event_id!r}: no frame reaches threshold {threshold}",
                      stacklevel=2)
    return FilteredEvent(e.event_id, kept, discarded, threshold, empty)


def _aligned(labels: Mapping[str, bool], scores: Mapping[str, float]):
    if not labels:
        raise DatasetError("no labeled frames")
    if set(labels) != set(scores):
        extra = sorted(set(labels) ^ set(scores))
        raise DatasetError(f"labels and scores cover different frames, e.g. {extra[0]!r}")
    keys = sorted(labels)
    y = np.array([bool(labels[k]) for k in keys])
    s = np.array([float(scores[k]) for k in keys])
    return y, s


def classification_metrics(labels: Mapping[str, bool], scores: Mapping[str, float],
                           threshold: float) -> ClassificationMetrics:
    """Confusion counts for "informative iff score >= threshold"."""
    y, s = _aligned(labels, scores)
    pred = s >= threshold
    tp = int(np.sum(pred & y))
    fp = int(np.sum(pred & ~y))
    fn = int(np.sum(~pred & y))
    tn = int(np.sum(~pred & ~y))
    return ClassificationMetrics.from_counts(threshold, tp, fp, fn, tn)


def threshold_sweep(labels: Mapping[str, bool], scores: Mapping[str, float],
                    thresholds: Sequence[float]) -> list[ClassificationMetrics]:
    """Metrics at each threshold, computed from one sort of the scores."""
    t = np.asarray(thresholds, dtype=np.float64)
    if t.ndim != 1 or len(t) == 0:
        raise ValueError("thresholds must be a non-empty 1-d sequence")
    if np.any(np.diff(t) <= 0):
        raise ValueError("thresholds must be strictly increasing")
    y, s = _aligned(labels, scores)
    pos_scores = np.sort(s[y])
    neg_scores = np.sort(s[~y])
    # number of scores >= t
    tp = len(pos_scores) - np.searchsorted(pos_scores, t, side="left")
    fp = len(neg_scores) - np.searchsorted(neg_scores, t, side="left")
    fn = len(pos_scores) - tp
    tn = len(neg_scores) - fp
    return [ClassificationMetrics.from_counts(float(th), int(a), int(b), int(c), int(d))
            for th, a, b, c, d in zip(t, tp, fp, fn, tn)]


def sweep_to_csv(rows: Sequence[ClassificationMetrics]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in asdict(r).items()})
    return buf.getvalue()


def event_labels_and_scores(events: Sequence[Event]) -> tuple[dict[str, bool], dict[str, float]]:
    """Pool level-1 labels and informativeness scores over annotated events."""
    labels, scores = {}, {}
    for e in events:
        gt = e.require_ground_truth()
        for f in e.frames:
            labels[f.frame_id] = bool(gt.informative_labels[f.frame_id])
            scores[f.frame_id] = f.informativeness
    return labels, scores
