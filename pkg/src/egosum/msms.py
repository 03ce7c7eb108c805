"""Sum of Maximal Similarities (SMS), its mean curve (MSMS) and AUC weights.

SMS scores a summary against a validation set by averaging, over the
validation frames, the best similarity each one finds in the summary. Growing
the summary one ranked frame at a time gives a curve over ``t / M``; curves of
different events are resampled on a shared grid and averaged.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .diversity import SimilarityKernel, similarity_matrix
from .informativeness import FilteredEvent
from .model import DatasetError, FrameRecord
from .relevance import CRITERIA, FusionWeights

GRID_SIZE = 101


def default_grid(size: int = GRID_SIZE) -> np.ndarray:
    return np.linspace(0.0, 1.0, size)


@dataclass(frozen=True)
class SmsCurve:
    event_id: str
    fractions: tuple[float, ...]
    values: tuple[float, ...]

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.fractions, self.values))


@dataclass(frozen=True)
class MsmsCurve:
    grid: tuple[float, ...]
    values: tuple[float, ...]
    auc: float


def sms(validation: Sequence[FrameRecord], summary_frames: Sequence[FrameRecord],
        k: SimilarityKernel) -> float:
    if not validation:
        raise ValueError("validation set is empty")
    if not summary_frames:
        raise ValueError("summary is empty")
    S = similarity_matrix(validation, summary_frames, k)
    return float(np.mean(S.max(axis=1)))


def sms_curve(event: FilteredEvent, ranked: Sequence[str], validation: Sequence[FrameRecord],
              k: SimilarityKernel) -> SmsCurve:
    """SMS of every prefix of ``ranked``, placed at fractions t / M."""
    M = event.M
    by_id = {f.frame_id: f for f in event.kept}
    if len(ranked) != M or set(ranked) != set(by_id):
        raise DatasetError(f"ranking does not cover the {M} kept frames of {event.event_id!r}")
    if not validation:
        raise ValueError("validation set is empty")
    S = similarity_matrix(validation, [by_id[fid] for fid in ranked], k)
    prefix_best = np.maximum.accumulate(S, axis=1)
    values = prefix_best.mean(axis=0)
    fractions = np.arange(1, M + 1) / M
    return SmsCurve(event.event_id, tuple(fractions.tolist()), tuple(values.tolist()))


def sms_curve_from_summaries(event_id: str, M: int, summaries: Sequence[Sequence[FrameRecord]],
                             validation: Sequence[FrameRecord], k: SimilarityKernel) -> SmsCurve:
    """Curve for summaries that are not prefixes of one ranking.

    ``summaries[t - 1]`` is the size-``t`` summary. Values need not be
    monotone (uniform sampling, for instance, is not nested).
    """
    if len(summaries) != M:
        raise ValueError(f"expected {M} summaries, got {len(summaries)}")
    values = [sms(validation, s, k) for s in summaries]
    return SmsCurve(event_id, tuple(t / M for t in range(1, M + 1)), tuple(values))


def interpolate_curve(c: SmsCurve, grid: Sequence[float] | None = None) -> np.ndarray:
    """Linear interpolation on ``grid``, held constant beyond the end points."""
    g = default_grid() if grid is None else np.asarray(grid, dtype=np.float64)
    if np.any(np.diff(g) < 0):
        raise ValueError("grid must be ascending")
    return np.interp(g, c.fractions, c.values)


def auc(values: Sequence[float], grid: Sequence[float] | None = None) -> float:
    """Trapezoidal area; ``grid`` defaults to evenly spaced points on [0, 1]."""
    y = np.asarray(values, dtype=np.float64)
    if y.size < 2:
        raise ValueError("need at least two points")
    x = np.linspace(0.0, 1.0, y.size) if grid is None else np.asarray(grid, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError("grid and values differ in length")
    if np.any(np.diff(x) < 0):
        raise ValueError("grid must be ascending")
    return float(np.sum(np.diff(x) * (y[1:] + y[:-1]) / 2.0))


def msms(curves: Sequence[SmsCurve], grid_size: int = GRID_SIZE) -> MsmsCurve:
    if not curves:
        raise ValueError("no curves to average")
    grid = default_grid(grid_size)
    stacked = np.vstack([interpolate_curve(c, grid) for c in curves])
    values = stacked.mean(axis=0)
    return MsmsCurve(tuple(grid.tolist()), tuple(values.tolist()), auc(values, grid))


def estimate_weights(per_criterion_auc: Mapping[str, float]) -> FusionWeights:
    """Fusion weights proportional to each criterion's stand-alone AUC."""
    if set(per_criterion_auc) != set(CRITERIA):
        raise ValueError(f"need an AUC for each of {CRITERIA}")
    vals = {k: float(per_criterion_auc[k]) for k in CRITERIA}
    if any(not np.isfinite(v) or v < 0 for v in vals.values()):
        raise ValueError("AUCs must be finite and non-negative")
    total = sum(vals.values())
    if total <= 0:
        raise ValueError("all AUCs are zero; weights undefined")
    w = {k: v / total for k, v in vals.items()}
    return FusionWeights(w)


def curves_to_csv(curves: Mapping[str, SmsCurve | MsmsCurve]) -> str:
    """Long-format CSV with columns ``id,fraction,value``."""
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(("id", "fraction", "value"))
    for name, c in curves.items():
        xs = c.grid if isinstance(c, MsmsCurve) else c.fractions
        for x, y in zip(xs, c.values):
            out.writerow((name, repr(float(x)), repr(float(y))))
    return buf.getvalue()
