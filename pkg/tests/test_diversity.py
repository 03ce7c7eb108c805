import math

import numpy as np
import pytest

from egosum.diversity import (SimilarityKernel, fit_kernel, greedy_select, novelty,
                              pairwise_distances, similarity)
from egosum.informativeness import FilteredEvent
from egosum.model import DatasetError
from egosum.relevance import FusionWeights, fuse_relevance, rank_all

from conftest import make_frame, random_filtered
from oracles import brute_median_distance, kernel, reference_greedy


def fused_for(fe, weights=None):
    return fuse_relevance(list(rank_all(fe).values()), weights or FusionWeights.of(0.5, 0.3, 0.2))


def test_kernel_two_frames():
    fe = FilteredEvent("ev", (make_frame("ev_0", (0.0, 0.0)), make_frame("ev_1", (2.0, 0.0), ts=1)),
                       (), 0.0)
    assert fit_kernel(fe).sigma == 2.0


def test_kernel_identical_frames_falls_back():
    fe = FilteredEvent("ev", tuple(make_frame(f"ev_{i}", (1.0, 1.0), ts=i) for i in range(4)), (), 0.0)
    k = fit_kernel(fe)
    assert k.sigma == 1.0
    assert all(similarity(a, b, k) == 1.0 for a in fe.kept for b in fe.kept)


def test_kernel_median_matches_brute_force(rng):
    for _ in range(20):
        fe = random_filtered(rng, 5, 3)
        assert fit_kernel(fe).sigma == pytest.approx(brute_median_distance(fe.kept), rel=1e-12)


def test_kernel_single_frame():
    fe = FilteredEvent("ev", (make_frame("ev_0"),), (), 0.0)
    assert fit_kernel(fe).sigma > 0


def test_similarity_values(rng):
    k = SimilarityKernel(1.5)
    a = make_frame("a_0", (0.0, 0.0))
    assert similarity(a, a, k) == 1.0
    b = make_frame("b_0", (1.5, 0.0))
    assert similarity(a, b, k) == pytest.approx(0.606531, abs=1e-6)
    for _ in range(50):
        x = make_frame("x_0", rng.normal(size=4))
        y = make_frame("y_0", rng.normal(size=4))
        s = similarity(x, y, k)
        assert s == similarity(y, x, k)
        assert 0.0 < s <= 1.0
        assert s == pytest.approx(kernel(x.features, y.features, 1.5), rel=1e-12)


def test_similarity_dimension_mismatch():
    with pytest.raises(ValueError):
        similarity(make_frame("a_0", (0.0,)), make_frame("b_0", (0.0, 1.0)), SimilarityKernel())
    with pytest.raises(ValueError):
        pairwise_distances(np.zeros((2, 2)), np.zeros((2, 3)))


def test_bad_kernel():
    with pytest.raises(ValueError):
        SimilarityKernel(0.0)
    with pytest.raises(ValueError):
        SimilarityKernel(1.0, kind="cosine")


def test_novelty_cases(rng):
    k = SimilarityKernel(1.0)
    c = make_frame("c_0", (1.0, 2.0))
    assert novelty(c, [], k) == 1.0
    assert novelty(c, [make_frame("d_0", (1.0, 2.0))], k) == 0.0
    sel = [make_frame(f"s_{i}", rng.normal(size=2)) for i in range(3)]
    expect = 1.0 - max(kernel(c.features, s.features, 1.0) for s in sel)
    assert novelty(c, sel, k) == pytest.approx(expect, rel=1e-12)


def test_t1_is_top_of_fused_list(rng):
    for _ in range(20):
        fe = random_filtered(rng, int(rng.integers(1, 10)), 3)
        fused = fused_for(fe)
        summary, trace = greedy_select(fe, fused, 1, fit_kernel(fe))
        assert summary.selected == (fused.frame_ids[0],)
        assert trace.steps[0].novelty == 1.0


def test_t_equals_m_is_permutation(rng):
    fe = random_filtered(rng, 9, 3)
    summary, _ = greedy_select(fe, fused_for(fe), 9, fit_kernel(fe))
    assert sorted(summary.selected) == sorted(fe.kept_ids)
    assert list(summary.presentation_order) == sorted(summary.selected,
                                                      key=lambda f: fe.kept_ids.index(f))


def test_matches_reference_greedy(rng):
    for _ in range(200):
        M = int(rng.integers(1, 11))
        fe = random_filtered(rng, M, int(rng.integers(1, 5)))
        fused = fused_for(fe)
        k = fit_kernel(fe)
        T = int(rng.integers(1, M + 1))
        summary, _ = greedy_select(fe, fused, T, k)
        rank = {e.frame_id: e.rank for e in fused.entries}
        rel = {e.frame_id: e.raw_score for e in fused.entries}
        assert list(summary.selected) == reference_greedy(fe.kept, rel, rank, T, k.sigma)


def test_trace_objective_dominates_all_candidates(rng):
    for _ in range(50):
        fe = random_filtered(rng, 8, 3)
        fused = fused_for(fe)
        k = fit_kernel(fe)
        summary, trace = greedy_select(fe, fused, 8, k)
        rel = {e.frame_id: e.raw_score for e in fused.entries}
        by_id = {f.frame_id: f for f in fe.kept}
        for t, step in enumerate(trace.steps):
            chosen = [by_id[f] for f in summary.selected[:t]]
            rest = [f for f in fe.kept if f.frame_id not in summary.selected[:t + 1]]
            assert step.novelty <= 1.0
            assert step.novelty == pytest.approx(novelty(by_id[step.frame_id], chosen, k), abs=1e-12)
            assert step.objective == pytest.approx(step.relevance + step.novelty)
            for f in rest:
                assert step.objective >= rel[f.frame_id] + novelty(f, chosen, k) - 1e-12
            if step.runner_up_objective is not None:
                assert step.objective >= step.runner_up_objective


def test_identical_features_follow_ranked_order(rng):
    frames = tuple(make_frame(f"ev_{i}", (3.0, 3.0), ts=i, saliency=float(rng.uniform(0, 9)),
                              objects=(float(rng.uniform()),)) for i in range(7))
    fe = FilteredEvent("ev", frames, (), 0.0)
    fused = fused_for(fe)
    summary, _ = greedy_select(fe, fused, 7, fit_kernel(fe))
    assert summary.selected == fused.frame_ids


def test_no_novelty_is_truncation(rng):
    fe = random_filtered(rng, 9, 3)
    fused = fused_for(fe)
    summary, trace = greedy_select(fe, fused, 4, fit_kernel(fe), use_novelty=False)
    assert summary.selected == fused.frame_ids[:4]
    assert all(s.novelty == 0.0 for s in trace.steps)


def test_deterministic(rng):
    fe = random_filtered(rng, 9, 3)
    fused = fused_for(fe)
    assert greedy_select(fe, fused, 5, fit_kernel(fe)) == greedy_select(fe, fused, 5, fit_kernel(fe))


def test_errors(rng):
    fe = random_filtered(rng, 4, 2)
    other = random_filtered(rng, 4, 2, event_id="zz")
    with pytest.raises(ValueError):
        greedy_select(fe, fused_for(fe), 0, SimilarityKernel())
    with pytest.raises(ValueError):
        greedy_select(fe, fused_for(fe), 5, SimilarityKernel())
    with pytest.raises(DatasetError):
        greedy_select(fe, fused_for(other), 2, SimilarityKernel())


def test_trace_json(rng):
    fe = random_filtered(rng, 3, 2)
    _, trace = greedy_select(fe, fused_for(fe), 3, fit_kernel(fe))
    rows = trace.to_json()
    assert [set(r) for r in rows] == [{"frame_id", "r", "n", "objective", "runner_up"}] * 3
    assert rows[-1]["runner_up"] is None
