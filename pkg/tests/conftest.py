import numpy as np
import pytest

from egosum.informativeness import FilteredEvent
from egosum.model import Event, FrameRecord, GroundTruth


def make_frame(fid, features=(0.0, 0.0), ts=None, event_id="ev", informativeness=0.5,
               saliency=1.0, objects=(), faces=()):
    if ts is None:
        ts = int(fid.rsplit("_", 1)[-1]) if "_" in fid else 0
    return FrameRecord(fid, event_id, ts, tuple(float(x) for x in features),
                       informativeness, saliency, tuple(objects), tuple(faces))


def random_filtered(rng, M, D, event_id="ev"):
    """Kept-only event with random features and detector scores."""
    frames = []
    for i in range(M):
        frames.append(make_frame(
            f"{event_id}_{i:03d}", rng.normal(size=D), ts=100 + 30 * i, event_id=event_id,
            informativeness=float(rng.uniform(0.1, 1)), saliency=float(rng.uniform(0, 100)),
            objects=tuple(rng.uniform(0, 1, rng.integers(0, 4))),
            faces=tuple(rng.normal(0, 1, rng.integers(0, 3)))))
    return FilteredEvent(event_id, tuple(frames), (), 0.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_event():
    frames = [make_frame(f"ev_{i}", (float(i), 0.0), ts=10 * i, informativeness=s)
              for i, s in enumerate([0.9, 0.01, 0.5, 0.025, 0.3])]
    gt = GroundTruth({f.frame_id: f.informativeness >= 0.025 for f in frames},
                     {"ev_0": 0, "ev_2": 1, "ev_3": 1, "ev_4": 0}, ("ev_0", "ev_2"))
    return Event.build("ev", frames, gt)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, detail in RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}  ({detail})")
