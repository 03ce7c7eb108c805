"""End-to-end summarization: filter, rank, fuse, re-rank, evaluate."""
from __future__ import annotations

import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional, Sequence, TypeVar, Union

import numpy as np

from .diversity import SelectionTrace, SimilarityKernel, fit_kernel, greedy_select
from .informativeness import DEFAULT_THRESHOLD, FilteredEvent, filter_informative
from .model import Dataset, DatasetError, Event, FrameRecord, GroundTruth, Summary
from .msms import (GRID_SIZE, MsmsCurve, SmsCurve, estimate_weights, msms, sms_curve,
                   sms_curve_from_summaries)
from .relevance import CRITERIA, FusionWeights, RankedList, fuse_relevance, rank_all

T_ = TypeVar("T_")


class PipelineError(ValueError):
    """Raised when a dataset cannot be processed under a given configuration."""


@dataclass(frozen=True)
class PipelineConfig:
    informativeness_threshold: float = DEFAULT_THRESHOLD
    summary_fraction: Optional[float] = 0.2
    summary_length: Optional[int] = None
    # "estimate" or a fixed (saliency, objects, faces) triple
    weights: Union[str, tuple[float, float, float]] = "estimate"
    estimation_events: Optional[tuple[str, ...]] = None
    use_novelty: bool = True
    grid_size: int = GRID_SIZE
    random_seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if not 0.0 <= self.informativeness_threshold <= 1.0:
            raise ValueError("informativeness_threshold must lie in [0, 1]")
        if self.summary_length is None:
            if self.summary_fraction is None or not 0.0 < self.summary_fraction <= 1.0:
                raise ValueError("summary_fraction must lie in (0, 1]")
        elif self.summary_length < 1:
            raise ValueError("summary_length must be positive")
        if isinstance(self.weights, str):
            if self.weights != "estimate":
                raise ValueError(f"weights must be 'estimate' or a triple, got {self.weights!r}")
        else:
            FusionWeights.of(*self.weights)
        if self.grid_size < 2 or self.workers < 1:
            raise ValueError("grid_size must be >= 2 and workers >= 1")

    def summary_size(self, M: int) -> int:
        """Number of frames to select from ``M`` kept frames."""
        if M == 0:
            return 0
        if self.summary_length is not None:
            return min(self.summary_length, M)
        # rounding guards against 0.1 * 30 = 3.0000000000000004
        return max(1, min(M, math.ceil(round(self.summary_fraction * M, 9))))

    def to_json(self) -> dict:
        return {
            "informativeness_threshold": self.informativeness_threshold,
            "summary_fraction": self.summary_fraction,
            "summary_length": self.summary_length,
            "weights": self.weights if isinstance(self.weights, str) else list(self.weights),
            "estimation_events": None if self.estimation_events is None else list(self.estimation_events),
            "use_novelty": self.use_novelty,
            "grid_size": self.grid_size,
            "random_seed": self.random_seed,
        }


_CONFIG_TYPES: dict[str, Callable[[str], object]] = {
    "informativeness_threshold": float,
    "summary_fraction": float,
    "summary_length": int,
    "grid_size": int,
    "random_seed": int,
    "workers": int,
}


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def parse_weights(text: str) -> Union[str, tuple[float, float, float]]:
    text = text.strip()
    if text == "estimate":
        return text
    parts = [float(x) for x in text.split(",")]
    if len(parts) != 3:
        raise ValueError("fixed weights need three comma-separated values")
    return tuple(parts)


def parse_config_text(text: str) -> dict:
    """Read ``key = value`` lines; ``#`` starts a comment."""
    out: dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in _CONFIG_TYPES:
            out[key] = _CONFIG_TYPES[key](value)
        elif key == "use_novelty":
            out[key] = _parse_bool(value)
        elif key == "weights":
            out[key] = parse_weights(value)
        elif key == "estimation_events":
            out[key] = tuple(s.strip() for s in value.split(",") if s.strip())
        else:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
    return out


# ---------------------------------------------------------------------------
# baselines and set metrics


def baseline_uniform(e: Union[Event, FilteredEvent], T: int) -> Summary:
    """``T`` frames at evenly spaced temporal positions (midpoint rule).

    Index ``i`` is ``floor((i + 0.5) * N / T)``; a collision moves to the next
    free index. Baseline summaries carry zero relevance/novelty scores.
    """
    frames = e.frames
    N = len(frames)
    if not 1 <= T <= N:
        raise ValueError(f"T={T} outside 1..{N}")
    picked: list[int] = []
    taken: set[int] = set()
    for i in range(T):
        idx = (2 * i + 1) * N // (2 * T)
        while idx in taken:
            idx = (idx + 1) % N
        taken.add(idx)
        picked.append(idx)
    picked.sort()
    ids = tuple(frames[i].frame_id for i in picked)
    return Summary(e.event_id, ids, tuple((0.0, 0.0) for _ in ids), ids)


def cluster_recall(summary: Summary, gt: GroundTruth, T: Optional[int] = None) -> float:
    """Share of ground-truth groups hit by the first ``T`` selected frames."""
    if not gt.group_ids:
        raise PipelineError(f"event {summary.event_id!r} has no ground-truth groups")
    T = len(summary.selected) if T is None else T
    hit = {gt.group_ids[fid] for fid in summary.selected[:T] if fid in gt.group_ids}
    return len(hit) / gt.n_groups


# ---------------------------------------------------------------------------
# per-event stages


@dataclass(frozen=True)
class PreparedEvent:
    event: Event
    filtered: FilteredEvent
    lists: Mapping[str, RankedList]
    kernel: SimilarityKernel

    @property
    def M(self) -> int:
        return self.filtered.M

    def validation_frames(self) -> list[FrameRecord]:
        gt = self.event.require_ground_truth()
        return [self.event.frame(fid) for fid in gt.summary_ids]


def prepare_event(e: Event, threshold: float) -> PreparedEvent:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        filtered = filter_informative(e, threshold)
    lists = rank_all(filtered) if filtered.M else {}
    return PreparedEvent(e, filtered, lists, fit_kernel(filtered))


def full_ranking(p: PreparedEvent, weights: FusionWeights,
                 use_novelty: bool = True) -> tuple[Summary, SelectionTrace, RankedList]:
    """Re-rank all ``M`` kept frames; any summary is a prefix of this."""
    fused = fuse_relevance([p.lists[k] for k in CRITERIA], weights)
    summary, trace = greedy_select(p.filtered, fused, p.M, p.kernel, use_novelty)
    return summary, trace, fused


def truncate(summary: Summary, trace: SelectionTrace, T: int) -> tuple[Summary, SelectionTrace]:
    return summary.truncate(T), SelectionTrace(trace.steps[:T])


def _map(fn: Callable[..., T_], items: Sequence, workers: int) -> list[T_]:
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _evaluable(p: PreparedEvent) -> bool:
    gt = p.event.ground_truth
    return gt is not None and bool(gt.summary_ids) and p.M > 0


def ranking_curve(p: PreparedEvent, weights: FusionWeights, use_novelty: bool = True) -> SmsCurve:
    summary, _, _ = full_ranking(p, weights, use_novelty)
    return sms_curve(p.filtered, summary.selected, p.validation_frames(), p.kernel)


def uniform_curve(p: PreparedEvent) -> SmsCurve:
    kept = p.filtered.kept
    by_id = {f.frame_id: f for f in kept}
    summaries = [[by_id[fid] for fid in baseline_uniform(p.filtered, t).selected]
                 for t in range(1, p.M + 1)]
    return sms_curve_from_summaries(p.event.event_id, p.M, summaries,
                                    p.validation_frames(), p.kernel)


@dataclass(frozen=True)
class WeightEstimate:
    weights: FusionWeights
    per_criterion_auc: Mapping[str, float]
    curves: Mapping[str, MsmsCurve]
    events: tuple[str, ...]


def estimate_fusion_weights(prepared: Sequence[PreparedEvent], grid_size: int = GRID_SIZE,
                            workers: int = 1) -> WeightEstimate:
    """Run each criterion alone through novelty re-ranking and weight by MSMS AUC."""
    usable = [p for p in prepared if _evaluable(p)]
    if not usable:
        raise PipelineError("weight estimation needs events with a ground-truth summary "
                            "and at least one kept frame")
    curves, aucs = {}, {}
    for k in CRITERIA:
        hot = FusionWeights.one_hot(k)
        per_event = _map(lambda p: ranking_curve(p, hot), usable, workers)
        curves[k] = msms(per_event, grid_size)
        aucs[k] = curves[k].auc
    return WeightEstimate(estimate_weights(aucs), aucs, curves,
                          tuple(p.event.event_id for p in usable))


# ---------------------------------------------------------------------------
# orchestration


@dataclass
class PipelineResult:
    summaries: list[Summary]
    traces: list[SelectionTrace]
    report: dict
    curves: dict = field(default_factory=dict)

    def report_json(self) -> str:
        return report_to_json(self.report)


def report_to_json(report: Mapping) -> str:
    return json.dumps(report, indent=2, allow_nan=False) + "\n"


def summary_to_json(summary: Summary, trace: SelectionTrace) -> dict:
    return {
        "event_id": summary.event_id,
        "selected": list(summary.selected),
        "presentation_order": list(summary.presentation_order),
        "trace": trace.to_json(),
    }


def _estimation_set(prepared: Sequence[PreparedEvent], cfg: PipelineConfig) -> list[PreparedEvent]:
    if cfg.estimation_events is None:
        return [p for p in prepared if p.event.ground_truth is not None]
    by_id = {p.event.event_id: p for p in prepared}
    missing = [eid for eid in cfg.estimation_events if eid not in by_id]
    if missing:
        raise PipelineError(f"unknown estimation events: {missing}")
    chosen = [by_id[eid] for eid in cfg.estimation_events]
    lacking = [p.event.event_id for p in chosen if p.event.ground_truth is None]
    if lacking:
        raise PipelineError(f"estimation events lack ground truth: {lacking}")
    return chosen


def run_pipeline(d: Dataset, cfg: PipelineConfig = PipelineConfig(),
                 evaluate: bool = True) -> PipelineResult:
    """Summarize every event of ``d`` and, if ``evaluate``, score against ground truth.

    The report holds the weights (and the per-criterion AUCs they came from),
    one entry per event with its selection trace, and, for annotated events,
    MSMS AUCs of the fused ranking and of uniform sampling plus cluster recall.
    """
    prepared = _map(lambda e: prepare_event(e, cfg.informativeness_threshold),
                    list(d.events), cfg.workers)

    estimate = None
    if isinstance(cfg.weights, str):
        estimate = estimate_fusion_weights(_estimation_set(prepared, cfg), cfg.grid_size,
                                           cfg.workers)
        weights = estimate.weights
    else:
        weights = FusionWeights.of(*cfg.weights)

    def summarize(p: PreparedEvent):
        if p.M == 0:
            empty = Summary(p.event.event_id, (), (), ())
            return empty, SelectionTrace(()), None
        full, trace, _ = full_ranking(p, weights, cfg.use_novelty)
        summary, trace_T = truncate(full, trace, cfg.summary_size(p.M))
        return summary, trace_T, full

    results = _map(summarize, prepared, cfg.workers)

    per_event = []
    fused_curves, uniform_curves = [], []
    for p, (summary, trace, full) in zip(prepared, results):
        entry = summary_to_json(summary, trace)
        entry.update({"N": len(p.event), "M": p.M, "T": len(summary.selected),
                      "empty": p.M == 0})
        if evaluate and _evaluable(p):
            validation = p.validation_frames()
            fused_c = sms_curve(p.filtered, full.selected, validation, p.kernel)
            uni_c = uniform_curve(p)
            fused_curves.append(fused_c)
            uniform_curves.append(uni_c)
            gt = p.event.ground_truth
            P = len(gt.summary_ids)
            entry["sms_at_T"] = fused_c.values[len(summary.selected) - 1]
            if gt.group_ids:
                entry["cluster_recall_at_T"] = cluster_recall(summary, gt)
                entry["cluster_recall_at_P"] = cluster_recall(full, gt, P)
        per_event.append(entry)

    report: dict = {
        "config": cfg.to_json(),
        "weights": dict(weights.w),
        "weights_source": "estimated" if estimate else "fixed",
        "estimation_events": list(estimate.events) if estimate else None,
        "per_criterion_auc": dict(estimate.per_criterion_auc) if estimate else None,
        "fused_auc": None,
        "uniform_auc": None,
        "per_event": per_event,
    }
    curves: dict = {}
    if estimate:
        curves.update({f"criterion:{k}": c for k, c in estimate.curves.items()})
    if fused_curves:
        fused_m = msms(fused_curves, cfg.grid_size)
        uniform_m = msms(uniform_curves, cfg.grid_size)
        report["fused_auc"] = fused_m.auc
        report["uniform_auc"] = uniform_m.auc
        curves["fused"] = fused_m
        curves["uniform"] = uniform_m
    return PipelineResult([r[0] for r in results], [r[1] for r in results], report, curves)
