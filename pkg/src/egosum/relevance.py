"""Per-criterion relevance scores, rank normalization and weighted fusion."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

from .informativeness import FilteredEvent
from .model import DatasetError, FrameRecord

CRITERIA = ("saliency", "objects", "faces")
FUSED = "fused"

#: Largest face score accepted before exponentiation.
FACE_EXP_LIMIT = 700.0

RANKED_COLUMNS = ("frame_id", "criterion", "raw_score", "rank", "normalized")


@dataclass(frozen=True)
class RankedEntry:
    frame_id: str
    raw_score: float
    rank: int
    normalized: float
    timestamp: int


@dataclass(frozen=True)
class RankedList:
    event_id: str
    criterion: str
    entries: tuple[RankedEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def frame_ids(self) -> tuple[str, ...]:
        return tuple(e.frame_id for e in self.entries)

    def normalized_by_id(self) -> dict[str, float]:
        return {e.frame_id: e.normalized for e in self.entries}

    def relevance_by_id(self) -> dict[str, float]:
        """Relevance used by the greedy selector.

        A fused list carries the weighted sum of normalized scores as its raw
        score; a single-criterion list uses its normalized rank score.
        """
        if self.criterion == FUSED:
            return {e.frame_id: e.raw_score for e in self.entries}
        return self.normalized_by_id()

    def to_csv(self, header: bool = True) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if header:
            w.writerow(RANKED_COLUMNS)
        for e in self.entries:
            w.writerow([e.frame_id, self.criterion, repr(e.raw_score), e.rank, repr(e.normalized)])
        return buf.getvalue()


@dataclass(frozen=True)
class FusionWeights:
    w: Mapping[str, float]

    def __post_init__(self):
        if set(self.w) != set(CRITERIA):
            raise ValueError(f"weights must cover exactly {CRITERIA}, got {sorted(self.w)}")
        if any(not math.isfinite(v) or v < 0 for v in self.w.values()):
            raise ValueError("weights must be finite and non-negative")
        if abs(sum(self.w.values()) - 1.0) > 1e-9:
            raise ValueError(f"weights sum to {sum(self.w.values())}, not 1")

    @classmethod
    def of(cls, saliency: float, objects: float, faces: float) -> "FusionWeights":
        return cls({"saliency": saliency, "objects": objects, "faces": faces})

    @classmethod
    def uniform(cls) -> "FusionWeights":
        return cls({k: 1 / 3 for k in CRITERIA})

    @classmethod
    def one_hot(cls, criterion: str) -> "FusionWeights":
        return cls({k: float(k == criterion) for k in CRITERIA})

    def as_tuple(self) -> tuple[float, float, float]:
        return tuple(self.w[k] for k in CRITERIA)


def saliency_relevance(f: FrameRecord) -> float:
    return float(f.saliency)


def object_relevance(f: FrameRecord) -> float:
    if not all(math.isfinite(s) for s in f.object_scores):
        raise DatasetError(f"non-finite object score on frame {f.frame_id!r}")
    return float(math.fsum(f.object_scores))


def face_relevance(f: FrameRecord) -> float:
    """Exponential sum of face-detector confidences (negative scores allowed)."""
    for s in f.face_scores:
        if not math.isfinite(s):
            raise DatasetError(f"non-finite face score on frame {f.frame_id!r}")
        if s > FACE_EXP_LIMIT:
            raise DatasetError(f"face score {s} on frame {f.frame_id!r} exceeds "
                             f"{FACE_EXP_LIMIT}; exp would overflow")
    return float(math.fsum(math.exp(s) for s in f.face_scores))


CRITERION_FUNCS: dict[str, Callable[[FrameRecord], float]] = {
    "saliency": saliency_relevance,
    "objects": object_relevance,
    "faces": face_relevance,
}


def criterion_scores(frames: FilteredEvent, criterion: str) -> list[tuple[str, float]]:
    fn = CRITERION_FUNCS[criterion]
    return [(f.frame_id, fn(f)) for f in frames.kept]


def _rank(event_id: str, criterion: str, raw: Mapping[str, float],
          timestamps: Mapping[str, int]) -> RankedList:
    order = sorted(raw, key=lambda fid: (-raw[fid], timestamps[fid], fid))
    M = len(order)
    entries = []
    for pos, fid in enumerate(order, start=1):
        norm = (M - pos) / (M - 1) if M > 1 else 1.0
        entries.append(RankedEntry(fid, raw[fid], pos, norm, timestamps[fid]))
    return RankedList(event_id, criterion, tuple(entries))


def rank_normalize(scores: Sequence[tuple[str, float]], frames: FilteredEvent,
                   criterion: str) -> RankedList:
    """Rank kept frames by raw score and map rank R to (M - R) / (M - 1).

    Ties go to the earlier timestamp, then the smaller frame id. A single
    frame gets normalized score 1.
    """
    if not frames.kept:
        raise DatasetError(f"event {frames.event_id!r} has no kept frames to rank")
    timestamps = {f.frame_id: f.timestamp for f in frames.kept}
    raw: dict[str, float] = {}
    for fid, s in scores:
        if fid not in timestamps:
            raise DatasetError(f"score for frame {fid!r} not kept in event {frames.event_id!r}")
        if fid in raw:
            raise DatasetError(f"duplicate score for frame {fid!r}")
        raw[fid] = float(s)
    missing = [fid for fid in timestamps if fid not in raw]
    if missing:
        raise DatasetError(f"no score for kept frame {missing[0]!r}")
    return _rank(frames.event_id, criterion, raw, timestamps)


def rank_criterion(frames: FilteredEvent, criterion: str) -> RankedList:
    return rank_normalize(criterion_scores(frames, criterion), frames, criterion)


def fuse_relevance(lists: Sequence[RankedList], weights: FusionWeights) -> RankedList:
    """Weighted sum of normalized criterion scores, re-ranked by the same rule."""
    by_crit = {rl.criterion: rl for rl in lists}
    if len(lists) != len(CRITERIA) or set(by_crit) != set(CRITERIA):
        raise ValueError(f"need one ranked list per criterion {CRITERIA}")
    ref = by_crit[CRITERIA[0]]
    ids = set(ref.frame_ids)
    for rl in lists:
        if set(rl.frame_ids) != ids or len(rl.frame_ids) != len(ids):
            raise DatasetError(f"ranked list {rl.criterion!r} covers a different frame set")
    norm = {k: by_crit[k].normalized_by_id() for k in CRITERIA}
    fused = {}
    for fid in ids:
        total = 0.0
        for k in CRITERIA:
            total += weights.w[k] * norm[k][fid]
        fused[fid] = min(total, 1.0)
    timestamps = {e.frame_id: e.timestamp for e in ref.entries}
    return _rank(ref.event_id, FUSED, fused, timestamps)


def rank_all(frames: FilteredEvent) -> dict[str, RankedList]:
    return {k: rank_criterion(frames, k) for k in CRITERIA}


def ranked_lists_to_csv(lists: Sequence[RankedList]) -> str:
    return "".join(rl.to_csv(header=(i == 0)) for i, rl in enumerate(lists))
