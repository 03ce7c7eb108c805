"""Synthetic lifelog events with planted visual clusters and expert annotations.

Each event is a stream of frames shot every 30 seconds. Informative frames
belong to one of several visual clusters (scenes) that recur in temporal
segments; non-informative frames (blur, wall, sky) sit near a separate junk
region of feature space and receive low informativeness scores. Detector
scores follow a per-cluster relevance level, so relevance concentrates on
some scenes, which is the situation novelty re-ranking is meant to fix.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Dataset, Event, FrameRecord, GroundTruth

FRAME_INTERVAL = 30  # seconds, 2 frames per minute
BASE_TIME = 1_500_000_000


@dataclass(frozen=True)
class SynthParams:
    events: int = 10
    frames_per_event: tuple[int, int] = (20, 40)
    clusters_per_event: tuple[int, int] = (4, 6)
    feature_dim: int = 8
    noise_scale: float = 0.25
    noninformative_rate: float = 0.2
    seed: int = 0
    # spread of cluster relevance levels; 0 makes every scene equally relevant
    relevance_concentration: float = 0.8
    # Dirichlet concentration of cluster sizes; small values give one dominant scene
    cluster_balance: float = 0.5

    def __post_init__(self):
        lo, hi = self.frames_per_event
        clo, chi = self.clusters_per_event
        if self.events < 1 or self.feature_dim < 1:
            raise ValueError("events and feature_dim must be positive")
        if not (1 <= lo <= hi and 1 <= clo <= chi):
            raise ValueError("ranges must be positive and ordered")
        if not 0.0 <= self.noninformative_rate <= 1.0:
            raise ValueError("noninformative_rate must lie in [0, 1]")
        if self.noise_scale < 0 or self.relevance_concentration < 0 or self.cluster_balance <= 0:
            raise ValueError("noise_scale, relevance_concentration, cluster_balance out of range")


def _cluster_sequence(rng: np.random.Generator, n: int, c: int, balance: float) -> np.ndarray:
    """Cluster label per informative frame, laid out as temporal segments."""
    sizes = np.ones(c, dtype=int)
    if n > c:
        sizes += rng.multinomial(n - c, rng.dirichlet(np.full(c, balance)))
    segments = []
    for label, size in enumerate(sizes):
        n_seg = min(size, int(rng.integers(1, 3)))
        cuts = np.sort(rng.choice(np.arange(1, size), n_seg - 1, replace=False)) if n_seg > 1 else []
        for part in np.split(np.arange(size), cuts):
            segments.append(np.full(len(part), label))
    order = rng.permutation(len(segments))
    return np.concatenate([segments[i] for i in order])


def _scores(rng: np.random.Generator, propensity: float, informativeness: float):
    p = float(np.clip(propensity, 0.0, 1.0))
    saliency = max(0.0, float(20.0 + 100.0 * p * informativeness + rng.normal(0, 8)))
    n_obj = int(rng.poisson(0.5 + 4.0 * p * informativeness))
    objects = [round(float(rng.uniform(0.1, 0.4) + 0.6 * p * rng.uniform()), 6) for _ in range(n_obj)]
    n_face = int(rng.poisson(2.0 * p * informativeness))
    faces = [round(float(rng.normal(-1.0 + 2.5 * p, 0.7)), 6) for _ in range(n_face)]
    return round(saliency, 6), objects, faces


def _event(rng: np.random.Generator, p: SynthParams, index: int) -> Event:
    event_id = f"e{index:04d}"
    N = int(rng.integers(p.frames_per_event[0], p.frames_per_event[1] + 1))
    c = int(rng.integers(p.clusters_per_event[0], p.clusters_per_event[1] + 1))
    n_junk = int(round(p.noninformative_rate * N))
    n_inf = max(N - n_junk, c)
    N = n_inf + n_junk
    D = p.feature_dim

    centers = rng.normal(0.0, 1.0, (c, D))
    junk_center = rng.normal(0.0, 1.0, D)
    levels = np.clip(0.5 + p.relevance_concentration * (rng.uniform(0, 1, c) - 0.5), 0, 1)

    labels = list(_cluster_sequence(rng, n_inf, c, p.cluster_balance))
    for pos in np.sort(rng.choice(N, n_junk, replace=False)):
        labels.insert(int(pos), -1)

    frames, informative, groups = [], [], {}
    best: dict[int, tuple[float, str]] = {}
    start = BASE_TIME + index * 100_000
    for i, lab in enumerate(labels):
        fid = f"{event_id}_f{i:04d}"
        if lab >= 0:
            offset = rng.normal(0.0, p.noise_scale, D)
            feats = centers[lab] + offset
            inf_score = float(rng.beta(4.0, 1.5))
            prop = levels[lab] + rng.normal(0.0, 0.1)
            informative.append(fid)
            groups[fid] = int(lab)
            dist = float(np.linalg.norm(offset))
            if lab not in best or dist < best[lab][0]:
                best[lab] = (dist, fid)
        else:
            feats = junk_center + rng.normal(0.0, 2.0 * p.noise_scale, D)
            inf_score = float(rng.beta(1.2, 20.0))
            prop = float(rng.uniform(0.0, 0.2))
        sal, obj, face = _scores(rng, prop, inf_score)
        frames.append(FrameRecord(
            frame_id=fid, event_id=event_id, timestamp=start + FRAME_INTERVAL * i,
            features=tuple(round(float(x), 6) for x in feats),
            informativeness=round(inf_score, 6), saliency=sal,
            object_scores=tuple(obj), face_scores=tuple(face)))

    ids = [f.frame_id for f in frames]
    summary = tuple(sorted((fid for _, fid in best.values()), key=ids.index))
    positive = set(informative)
    gt = GroundTruth({fid: fid in positive for fid in ids}, groups, summary)
    return Event.build(event_id, frames, gt)


def synth_dataset(p: SynthParams) -> Dataset:
    """Generate a dataset that depends only on ``p`` (including its seed)."""
    children = np.random.SeedSequence(p.seed).spawn(p.events)
    events = tuple(_event(np.random.default_rng(s), p, i) for i, s in enumerate(children))
    meta = {"generator": "egosum.synth", "seed": str(p.seed)}
    return Dataset(events, p.feature_dim, meta)
