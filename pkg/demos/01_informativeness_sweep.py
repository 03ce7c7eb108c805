"""
Informativeness filtering and its precision/recall trade-off
============================================================

Frames whose informativeness score falls below a threshold are dropped
before ranking. Sweeping the threshold against the level-1 labels shows how
much recall is lost as the filter gets stricter.
"""
import numpy as np

from egosum import SynthParams, filter_informative, synth_dataset, threshold_sweep
from egosum.informativeness import BEST_F_THRESHOLD, DEFAULT_THRESHOLD, event_labels_and_scores

dataset = synth_dataset(SynthParams(events=20, noninformative_rate=0.3, seed=1))
labels, scores = event_labels_and_scores(dataset.events)
print(f"{len(labels)} frames, {sum(labels.values())} labeled informative")

###############################################################################
# Sweep thresholds from 0 to 0.3

rows = threshold_sweep(labels, scores, np.round(np.arange(0, 0.301, 0.025), 3))
print(f"{'thr':>6} {'prec':>6} {'rec':>6} {'F':>6}")
for r in rows:
    print(f"{r.threshold:6.3f} {r.precision:6.3f} {r.recall:6.3f} {r.f_measure:6.3f}")

best = max(rows, key=lambda r: r.f_measure)
print(f"best F-measure {best.f_measure:.3f} at threshold {best.threshold}")

###############################################################################
# The pipeline default keeps nearly every informative frame

for thr in (DEFAULT_THRESHOLD, BEST_F_THRESHOLD):
    kept = sum(filter_informative(e, thr).M for e in dataset.events)
    print(f"threshold {thr}: {kept} of {dataset.n_frames} frames kept")
