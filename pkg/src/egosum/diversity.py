"""Visual similarity, novelty and greedy relevance-plus-novelty selection."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .informativeness import FilteredEvent
from .model import DatasetError, FrameRecord, Summary
from .relevance import RankedList


@dataclass(frozen=True)
class SimilarityKernel:
    """Gaussian kernel on Euclidean feature distance: exp(-d^2 / (2 sigma^2))."""

    sigma: float = 1.0
    kind: str = "gaussian"

    def __post_init__(self):
        if self.kind != "gaussian":
            raise ValueError(f"unsupported kernel kind {self.kind!r}")
        if not (np.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError(f"sigma must be positive, got {self.sigma}")

    def from_distance(self, d):
        return np.exp(-np.square(d) / (2.0 * self.sigma ** 2))


@dataclass(frozen=True)
class SelectionStep:
    frame_id: str
    relevance: float
    novelty: float
    objective: float
    runner_up_objective: Optional[float]


@dataclass(frozen=True)
class SelectionTrace:
    steps: tuple[SelectionStep, ...]

    def to_json(self) -> list[dict]:
        return [{"frame_id": s.frame_id, "r": s.relevance, "n": s.novelty,
                 "objective": s.objective, "runner_up": s.runner_up_objective}
                for s in self.steps]


def pairwise_distances(X: np.ndarray, Y: np.ndarray | None = None) -> np.ndarray:
    """Euclidean distances between rows of ``X`` and rows of ``Y``."""
    X = np.asarray(X, dtype=np.float64)
    Y = X if Y is None else np.asarray(Y, dtype=np.float64)
    if X.shape[1] != Y.shape[1]:
        raise ValueError(f"feature dimensions differ: {X.shape[1]} vs {Y.shape[1]}")
    # explicit differences, so identical rows give exactly 0
    diff = X[:, None, :] - Y[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def feature_matrix(frames: Sequence[FrameRecord]) -> np.ndarray:
    return np.array([f.features for f in frames], dtype=np.float64).reshape(len(frames), -1)


def fit_kernel(frames: FilteredEvent) -> SimilarityKernel:
    """Bandwidth = median pairwise distance between kept frames (1 if that is 0)."""
    if frames.M < 2:
        return SimilarityKernel(1.0)
    D = pairwise_distances(feature_matrix(frames.kept))
    iu = np.triu_indices(frames.M, k=1)
    sigma = float(np.median(D[iu]))
    return SimilarityKernel(sigma if sigma > 0 else 1.0)


def similarity(a: FrameRecord, b: FrameRecord, k: SimilarityKernel) -> float:
    if len(a.features) != len(b.features):
        raise ValueError(f"feature dimension mismatch between {a.frame_id!r} and {b.frame_id!r}")
    d = pairwise_distances(a.vector[None, :], b.vector[None, :])[0, 0]
    return float(k.from_distance(d))


def similarity_matrix(A: Sequence[FrameRecord], B: Sequence[FrameRecord],
                      k: SimilarityKernel) -> np.ndarray:
    return k.from_distance(pairwise_distances(feature_matrix(A), feature_matrix(B)))


def novelty(candidate: FrameRecord, selected: Sequence[FrameRecord], k: SimilarityKernel) -> float:
    """1 minus the largest similarity to an already selected frame; 1 if none."""
    if not selected:
        return 1.0
    return 1.0 - max(similarity(candidate, s, k) for s in selected)


def greedy_select(frames: FilteredEvent, fused: RankedList, T: int,
                  k: SimilarityKernel, use_novelty: bool = True) -> tuple[Summary, SelectionTrace]:
    """Pick ``T`` frames maximizing relevance + novelty one at a time.

    The first pick is the top of ``fused`` (novelty is 1 for every candidate
    when nothing is selected). Equal objectives go to the better-ranked frame.
    With ``use_novelty=False`` the objective is relevance alone, which
    reproduces a plain truncation of the ranked list.
    """
    M = frames.M
    if not 1 <= T <= M:
        raise ValueError(f"T={T} outside 1..{M}")
    by_id = {f.frame_id: f for f in frames.kept}
    if set(fused.frame_ids) != set(by_id) or len(fused) != M:
        raise DatasetError(f"ranked list does not cover the kept frames of {frames.event_id!r}")

    # candidates in rank order, so argmax's first-hit rule is the rank tie-break
    order = list(fused.frame_ids)
    rel = fused.relevance_by_id()
    r = np.array([rel[fid] for fid in order])
    S = similarity_matrix([by_id[fid] for fid in order], [by_id[fid] for fid in order], k)

    max_sim = np.zeros(M)
    available = np.ones(M, dtype=bool)
    chosen: list[int] = []
    steps = []
    for _ in range(T):
        n = 1.0 - max_sim if chosen and use_novelty else np.full(M, 1.0 if use_novelty else 0.0)
        obj = np.where(available, r + n, -np.inf)
        i = int(np.argmax(obj))
        others = np.delete(obj, i)
        runner = float(others.max()) if others.size and np.isfinite(others.max()) else None
        steps.append(SelectionStep(order[i], float(r[i]), float(n[i]), float(obj[i]), runner))
        chosen.append(i)
        available[i] = False
        max_sim = np.maximum(max_sim, S[i])

    selected = tuple(order[i] for i in chosen)
    presentation = tuple(sorted(selected, key=lambda fid: by_id[fid].order_key))
    summary = Summary(frames.event_id, selected,
                      tuple((s.relevance, s.novelty) for s in steps), presentation)
    return summary, SelectionTrace(tuple(steps))
