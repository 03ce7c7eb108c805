"""Exit criteria for the package, one test per criterion.

Each test records a PASS/FAIL line that is printed in the terminal summary.
"""
import math
import time

import numpy as np
import pytest

from egosum.cli import main as cli_main
from egosum.diversity import fit_kernel, greedy_select
from egosum.informativeness import FilteredEvent, classification_metrics
from egosum.msms import auc, default_grid, estimate_weights, sms_curve
from egosum.pipeline import (PipelineConfig, baseline_uniform, cluster_recall, full_ranking,
                             prepare_event, run_pipeline)
from egosum.relevance import CRITERIA, FusionWeights, fuse_relevance, rank_all, rank_normalize
from egosum.synth import SynthParams, synth_dataset

from conftest import make_frame, random_filtered
from oracles import confusion, reference_greedy, refined_trapezoid

pytestmark = pytest.mark.acceptance

RESULTS = []


@pytest.fixture
def record(request):
    def _record(label, ok, detail=""):
        RESULTS.append((label, bool(ok), detail))
        assert ok, f"{label}: {detail}"
    return _record


def small_events(n_seeds=250, events=4):
    """Synthetic events with M <= 10 and D <= 4."""
    for seed in range(n_seeds):
        p = SynthParams(events=events, frames_per_event=(2, 10), clusters_per_event=(1, 4),
                        feature_dim=1 + seed % 4, seed=1000 + seed)
        yield seed, synth_dataset(p)


def seeded_weights(seed):
    w = np.random.default_rng(seed).dirichlet(np.ones(3))
    return FusionWeights.of(float(w[0]), float(w[1]), 1.0 - float(w[0]) - float(w[1]))


SUITE_SEEDS = range(40)


@pytest.fixture(scope="module")
def suite():
    """200 events (40 seeds x 5) with >= 4 planted clusters and scene-level relevance."""
    out = []
    for seed in SUITE_SEEDS:
        d = synth_dataset(SynthParams(events=5, clusters_per_event=(4, 6), seed=seed))
        out.append((d, run_pipeline(d, PipelineConfig())))
    return out


def test_ac01_greedy_oracle_equivalence(record):
    start = time.perf_counter()
    n_events = mismatches = 0
    for seed, d in small_events():
        w = seeded_weights(seed)
        for e in d.events:
            p = prepare_event(e, 0.025)
            if p.M == 0:
                continue
            assert p.M <= 10 and d.feature_dim <= 4
            fused = fuse_relevance(list(p.lists.values()), w)
            summary, _ = greedy_select(p.filtered, fused, p.M, p.kernel)
            rel = {x.frame_id: x.raw_score for x in fused.entries}
            rank = {x.frame_id: x.rank for x in fused.entries}
            ref = reference_greedy(p.filtered.kept, rel, rank, p.M, p.kernel.sigma)
            mismatches += list(summary.selected) != ref
            n_events += 1
    elapsed = time.perf_counter() - start
    record("AC1 greedy == reference greedy", n_events >= 1000 and mismatches == 0 and elapsed < 30,
           f"{n_events} events, {mismatches} mismatches, {elapsed:.1f}s")


def test_ac02_sms_endpoint(record, suite):
    checked, worst = 0, 0.0
    datasets = [d for d, _ in suite] + [d for _, d in small_events(60)]
    for d in datasets:
        w = FusionWeights.uniform()
        for e in d.events:
            p = prepare_event(e, 0.025)
            gt = e.ground_truth
            if p.M == 0 or not set(gt.summary_ids) <= set(p.filtered.kept_ids):
                continue
            summary, _, _ = full_ranking(p, w)
            c = sms_curve(p.filtered, summary.selected, p.validation_frames(), p.kernel)
            worst = max(worst, abs(c.values[-1] - 1.0))
            checked += 1
    record("AC2 SMS endpoint = 1", checked > 0 and worst <= 1e-9,
           f"{checked} events, max |SMS(M) - 1| = {worst:.2e}")


def test_ac03_sms_monotone(record, suite):
    curves = 0
    worst_drop = 0.0
    for d, res in suite:
        w = FusionWeights(res.report["weights"])
        for e in d.events:
            p = prepare_event(e, 0.025)
            if p.M == 0:
                continue
            for weights in [w] + [FusionWeights.one_hot(k) for k in CRITERIA]:
                for novelty in (True, False):
                    summary, _, _ = full_ranking(p, weights, novelty)
                    v = sms_curve(p.filtered, summary.selected, p.validation_frames(), p.kernel).values
                    worst_drop = max([worst_drop] + [a - b for a, b in zip(v, v[1:])])
                    curves += 1
    record("AC3 SMS curves non-decreasing", worst_drop <= 1e-12,
           f"{curves} curves, largest drop {worst_drop:.2e}")


def test_ac04_prefix_consistency(record):
    rng = np.random.default_rng(4)
    failures = 0
    for trial in range(500):
        M = int(rng.integers(2, 16))
        fe = random_filtered(rng, M, int(rng.integers(1, 6)))
        fused = fuse_relevance(list(rank_all(fe).values()), seeded_weights(trial))
        k = fit_kernel(fe)
        T = int(rng.integers(1, M))
        a, ta = greedy_select(fe, fused, T, k)
        b, tb = greedy_select(fe, fused, T + 1, k)
        failures += a.selected != b.selected[:T] or ta.steps != tb.steps[:T]
    record("AC4 prefix consistency", failures == 0, f"500 trials, {failures} failures")


def test_ac05_rank_normalization_laws(record):
    rng = np.random.default_rng(5)
    bad = 0
    for trial in range(200):
        M = int(rng.integers(2, 30))
        frames = tuple(make_frame(f"ev_{i}", ts=i) for i in range(M))
        fe = FilteredEvent("ev", frames, (), 0.0)
        raw = rng.uniform(-3, 3, M)
        base = rank_normalize(list(zip(fe.kept_ids, raw)), fe, "saliency")
        norms = [e.normalized for e in base.entries]
        bad += norms[0] != 1.0 or norms[-1] != 0.0
        for transform in (lambda x: x ** 3 + x, np.exp):
            moved = rank_normalize(list(zip(fe.kept_ids, transform(raw))), fe, "saliency")
            bad += moved.frame_ids != base.frame_ids
            bad += [e.normalized for e in moved.entries] != norms
    record("AC5 rank normalization laws", bad == 0, f"200 score sets, {bad} violations")


def test_ac06_weight_normalization(record):
    rng = np.random.default_rng(6)
    worst_sum = worst_scale = 0.0
    for _ in range(1000):
        aucs = dict(zip(CRITERIA, rng.uniform(0.01, 1.0, 3)))
        w = estimate_weights(aucs).as_tuple()
        scale = float(10 ** rng.uniform(-3, 3))
        ws = estimate_weights({k: v * scale for k, v in aucs.items()}).as_tuple()
        worst_sum = max(worst_sum, abs(sum(w) - 1.0))
        worst_scale = max(worst_scale, max(abs(a - b) for a, b in zip(w, ws)))
    record("AC6 weight normalization", worst_sum <= 1e-9 and worst_scale <= 1e-9,
           f"max |sum-1| {worst_sum:.1e}, max scale drift {worst_scale:.1e}")


def test_ac07_metrics_oracle(record):
    rng = np.random.default_rng(7)
    bad = 0
    for trial in range(100):
        n = int(rng.integers(1, 60))
        labels = {f"f{i}": bool(rng.integers(2)) for i in range(n)}
        scores = {k: float(rng.uniform()) for k in labels}
        t = float(rng.uniform())
        m = classification_metrics(labels, scores, t)
        tp, fp, fn, tn = confusion(labels, scores, t)
        bad += (m.tp, m.fp, m.fn, m.tn) != (tp, fp, fn, tn)
        bad += not math.isclose(m.accuracy, (tp + tn) / n)
        bad += classification_metrics(labels, scores, 0.0).recall != 1.0
    record("AC7 metrics oracle", bad == 0, f"100 labeled sets, {bad} mismatches")


def test_ac08_auc_exactness(record):
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(2, 120))
        grid = np.sort(np.concatenate([[0.0, 1.0], rng.uniform(0, 1, n - 2)]))
        vals = np.sort(rng.uniform(0, 1, n))
        worst = max(worst, abs(auc(vals, grid) - refined_trapezoid(grid.tolist(), vals.tolist())))
    const = auc(np.ones(101), default_grid())
    record("AC8 AUC exactness", worst <= 1e-9 and abs(const - 1.0) <= 1e-12,
           f"max deviation {worst:.1e}, constant-1 AUC {const!r}")


def test_ac09_diversity_effectiveness(record, suite):
    full, plain, uniform = [], [], []
    for d, res in suite:
        w = FusionWeights(res.report["weights"])
        for e in d.events:
            gt = e.ground_truth
            P = len(gt.summary_ids)
            p = prepare_event(e, 0.025)
            with_novelty, _, _ = full_ranking(p, w, True)
            without, _, _ = full_ranking(p, w, False)
            full.append(cluster_recall(with_novelty, gt, P))
            plain.append(cluster_recall(without, gt, P))
            uniform.append(cluster_recall(baseline_uniform(e, P), gt))
    f, n, u = np.mean(full), np.mean(plain), np.mean(uniform)
    assert len(full) == 200
    record("AC9 novelty raises cluster recall@P", f > n and f > u - 0.05 and n > u - 0.05,
           f"full {f:.3f} > no-novelty {n:.3f}; uniform {u:.3f}")


def test_ac10_msms_dominance(record, suite):
    wins = sum(res.report["fused_auc"] >= res.report["uniform_auc"] for _, res in suite)
    share = wins / len(suite)
    record("AC10 fused MSMS AUC >= uniform", share >= 0.9, f"{wins}/{len(suite)} seeds")


def test_ac11_summarize_deterministic(record, tmp_path):
    data = tmp_path / "d.jsonl"
    assert cli_main(["synth", "--events", "6", "--seed", "11", "--out", str(data)]) == 0
    outs = []
    for i in range(2):
        out = tmp_path / f"r{i}.json"
        assert cli_main(["summarize", str(data), "--fraction", "0.2", "--seed", "3",
                         "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    record("AC11 summarize byte-identical", outs[0] == outs[1] and len(outs[0]) > 0,
           f"{len(outs[0])} bytes")
