"""Frame, event and ground-truth records, plus JSON Lines ingestion.

A dataset file holds one JSON object per line. Frame lines carry the
precomputed detector outputs for one image; ground-truth lines are tagged
with ``"gt": "ground_truth"`` and annotate a single event. An optional
``{"metadata": {...}}`` line carries free-form string metadata.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import IO, Iterable, Mapping, Sequence, Union

import numpy as np

GT_TAG = "ground_truth"

FRAME_KEYS = (
    "frame_id",
    "event_id",
    "timestamp",
    "features",
    "informativeness",
    "saliency",
    "object_scores",
    "face_scores",
)
GT_KEYS = ("gt", "event_id", "informative", "groups", "summary")


class DatasetError(ValueError):
    """Raised when input records cannot form a valid dataset."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class FrameRecord:
    frame_id: str
    event_id: str
    timestamp: int
    features: tuple[float, ...]
    informativeness: float
    saliency: float
    object_scores: tuple[float, ...] = ()
    face_scores: tuple[float, ...] = ()

    @property
    def vector(self) -> np.ndarray:
        return np.asarray(self.features, dtype=np.float64)

    @property
    def order_key(self) -> tuple[int, str]:
        return (self.timestamp, self.frame_id)


@dataclass(frozen=True)
class GroundTruth:
    """Expert annotations for one event.

    ``informative_labels`` is the level-1 annotation (one boolean per frame),
    ``group_ids`` the level-2 grouping of informative frames into visually
    similar clusters, and ``summary_ids`` the expert summary.
    """

    informative_labels: Mapping[str, bool]
    group_ids: Mapping[str, int]
    summary_ids: tuple[str, ...]

    @property
    def n_groups(self) -> int:
        return len(set(self.group_ids.values()))


@dataclass(frozen=True)
class Event:
    event_id: str
    frames: tuple[FrameRecord, ...]
    ground_truth: GroundTruth | None = None

    @classmethod
    def build(cls, event_id: str, frames: Iterable[FrameRecord],
              ground_truth: GroundTruth | None = None) -> "Event":
        """Create an event with frames put in (timestamp, frame_id) order."""
        ordered = tuple(sorted(frames, key=lambda f: f.order_key))
        return cls(event_id, ordered, ground_truth)

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def frame_ids(self) -> tuple[str, ...]:
        return tuple(f.frame_id for f in self.frames)

    def frame(self, frame_id: str) -> FrameRecord:
        for f in self.frames:
            if f.frame_id == frame_id:
                return f
        raise KeyError(frame_id)

    def require_ground_truth(self) -> GroundTruth:
        if self.ground_truth is None:
            raise DatasetError(f"event {self.event_id!r} has no ground truth")
        return self.ground_truth


@dataclass(frozen=True)
class Dataset:
    events: tuple[Event, ...]
    feature_dim: int
    metadata: Mapping[str, str] = field(default_factory=dict)

    def event(self, event_id: str) -> Event:
        for e in self.events:
            if e.event_id == event_id:
                return e
        raise KeyError(event_id)

    def subset(self, event_ids: Iterable[str]) -> "Dataset":
        wanted = list(event_ids)
        missing = set(wanted) - {e.event_id for e in self.events}
        if missing:
            raise DatasetError(f"unknown event ids: {sorted(missing)}")
        keep = set(wanted)
        return Dataset(tuple(e for e in self.events if e.event_id in keep),
                       self.feature_dim, self.metadata)

    @property
    def n_frames(self) -> int:
        return sum(len(e) for e in self.events)


@dataclass(frozen=True)
class Summary:
    """Frames chosen for an event, in selection order.

    ``scores`` holds ``(relevance, novelty)`` for each selected frame at the
    moment it was picked.
    """

    event_id: str
    selected: tuple[str, ...]
    scores: tuple[tuple[float, float], ...]
    presentation_order: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.selected)

    def truncate(self, T: int) -> "Summary":
        """First ``T`` selections, with presentation order recomputed."""
        keep = set(self.selected[:T])
        return Summary(self.event_id, self.selected[:T], self.scores[:T],
                       tuple(f for f in self.presentation_order if f in keep))


@dataclass(frozen=True)
class Violation:
    type_name: str
    field: str
    offending_id: str
    message: str

    def __str__(self) -> str:
        return f"{self.type_name}.{self.field} [{self.offending_id}]: {self.message}"


# ---------------------------------------------------------------------------
# validation


def _finite(values: Iterable[float]) -> bool:
    return all(isinstance(v, (int, float)) and math.isfinite(v) for v in values)


def _validate_frame(f: FrameRecord, dim: int) -> list[Violation]:
    out = []
    fid = f.frame_id
    if not (isinstance(f.informativeness, (int, float))
            and 0.0 <= f.informativeness <= 1.0):
        out.append(Violation("FrameRecord", "informativeness", fid,
                             f"{f.informativeness!r} not in [0, 1]"))
    if not (_finite([f.saliency]) and f.saliency >= 0):
        out.append(Violation("FrameRecord", "saliency", fid,
                             f"{f.saliency!r} is not a finite non-negative value"))
    if len(f.features) != dim:
        out.append(Violation("FrameRecord", "features", fid,
                             f"length {len(f.features)} != feature_dim {dim}"))
    if not _finite(f.features):
        out.append(Violation("FrameRecord", "features", fid, "non-finite value"))
    if not _finite(f.object_scores):
        out.append(Violation("FrameRecord", "object_scores", fid, "non-finite value"))
    if not _finite(f.face_scores):
        out.append(Violation("FrameRecord", "face_scores", fid, "non-finite value"))
    if not isinstance(f.timestamp, int) or isinstance(f.timestamp, bool):
        out.append(Violation("FrameRecord", "timestamp", fid,
                             f"{f.timestamp!r} is not an integer"))
    return out


def _validate_ground_truth(e: Event, gt: GroundTruth) -> list[Violation]:
    out = []
    ids = set(e.frame_ids)
    eid = e.event_id
    for fid in sorted(set(gt.informative_labels) - ids):
        out.append(Violation("GroundTruth", "informative_labels", fid,
                             f"unknown frame in event {eid!r}"))
    for fid in sorted(ids - set(gt.informative_labels)):
        out.append(Violation("GroundTruth", "informative_labels", fid,
                             f"frame of event {eid!r} has no label"))
    informative = {k for k, v in gt.informative_labels.items() if v}
    for fid in sorted(set(gt.group_ids) - informative):
        out.append(Violation("GroundTruth", "group_ids", fid,
                             "group id on a frame not labeled informative"))
    for fid in sorted(informative - set(gt.group_ids)):
        out.append(Violation("GroundTruth", "group_ids", fid,
                             "informative frame has no group id"))
    seen = set()
    for fid in gt.summary_ids:
        if fid not in ids:
            out.append(Violation("GroundTruth", "summary_ids", fid,
                                 f"unknown frame in event {eid!r}"))
        elif not gt.informative_labels.get(fid, False):
            out.append(Violation("GroundTruth", "summary_ids", fid,
                                 "summary frame not labeled informative"))
        if fid in seen:
            out.append(Violation("GroundTruth", "summary_ids", fid, "duplicate"))
        seen.add(fid)
    return out


def validate_dataset(d: Dataset) -> list[Violation]:
    """Check every type invariant; an empty list means the dataset is valid."""
    out: list[Violation] = []
    seen: set[str] = set()
    for e in d.events:
        if not e.frames:
            out.append(Violation("Event", "frames", e.event_id, "event has no frames"))
        keys = [f.order_key for f in e.frames]
        if keys != sorted(keys):
            out.append(Violation("Event", "frames", e.event_id,
                                 "frames not sorted by (timestamp, frame_id)"))
        for f in e.frames:
            if f.frame_id in seen:
                out.append(Violation("FrameRecord", "frame_id", f.frame_id,
                                     "duplicate frame id"))
            seen.add(f.frame_id)
            if f.event_id != e.event_id:
                out.append(Violation("FrameRecord", "event_id", f.frame_id,
                                     f"{f.event_id!r} != event {e.event_id!r}"))
            out.extend(_validate_frame(f, d.feature_dim))
        if e.ground_truth is not None:
            out.extend(_validate_ground_truth(e, e.ground_truth))
    return out


# ---------------------------------------------------------------------------
# parsing


def _number(value, what: str, line: int) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise DatasetError(f"{what} must be a number, got {value!r}", line)
    value = float(value)
    if not math.isfinite(value):
        raise DatasetError(f"{what} must be finite", line)
    return value


def _numbers(values, what: str, line: int) -> tuple[float, ...]:
    if not isinstance(values, list):
        raise DatasetError(f"{what} must be an array", line)
    return tuple(_number(v, what, line) for v in values)


def _frame_from_obj(obj: dict, line: int) -> FrameRecord:
    missing = [k for k in FRAME_KEYS if k not in obj]
    if missing:
        raise DatasetError(f"frame record missing keys {missing}", line)
    fid, eid, ts = obj["frame_id"], obj["event_id"], obj["timestamp"]
    if not isinstance(fid, str) or not fid:
        raise DatasetError("frame_id must be a non-empty string", line)
    if not isinstance(eid, str) or not eid:
        raise DatasetError("event_id must be a non-empty string", line)
    if isinstance(ts, bool) or not isinstance(ts, int):
        raise DatasetError(f"timestamp of {fid!r} must be an integer", line)
    return FrameRecord(
        frame_id=fid,
        event_id=eid,
        timestamp=ts,
        features=_numbers(obj["features"], f"features of {fid!r}", line),
        informativeness=_number(obj["informativeness"], "informativeness", line),
        saliency=_number(obj["saliency"], "saliency", line),
        object_scores=_numbers(obj["object_scores"], "object_scores", line),
        face_scores=_numbers(obj["face_scores"], "face_scores", line),
    )


def _check_ids(values, what: str, line: int) -> list[str]:
    if not isinstance(values, list) or not all(isinstance(v, str) for v in values):
        raise DatasetError(f"{what} must be an array of frame ids", line)
    return values


def parse_dataset(stream: Union[bytes, str, IO[bytes], IO[str], Iterable[str]]) -> Dataset:
    """Parse JSON Lines frame and ground-truth records into a validated dataset.

    Events appear in order of first occurrence; frames inside an event are
    sorted by ``(timestamp, frame_id)``. Raises :class:`DatasetError` on
    malformed lines, feature-dimension mismatches, duplicate frame ids,
    ground truth that references unknown frames, or any other invariant
    violation.
    """
    if isinstance(stream, bytes):
        lines: Iterable = stream.decode("utf-8").split("\n")
    elif isinstance(stream, str):
        lines = stream.split("\n")
    else:
        lines = stream

    frames: dict[str, list[FrameRecord]] = {}
    gt_raw: dict[str, tuple[dict, int]] = {}
    frame_line: dict[str, int] = {}
    metadata: dict[str, str] = {}
    dim: int | None = None

    for lineno, raw in enumerate(lines, start=1):
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
        raw = raw.rstrip("\n")
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise DatasetError(f"malformed JSON: {exc.msg}", lineno) from None
        if not isinstance(obj, dict):
            raise DatasetError("record is not a JSON object", lineno)

        if "gt" in obj:
            if obj["gt"] != GT_TAG:
                raise DatasetError(f"unknown gt tag {obj['gt']!r}", lineno)
            missing = [k for k in GT_KEYS if k not in obj]
            if missing:
                raise DatasetError(f"ground-truth record missing keys {missing}", lineno)
            eid = obj["event_id"]
            if eid in gt_raw:
                raise DatasetError(f"duplicate ground truth for event {eid!r}", lineno)
            gt_raw[eid] = (obj, lineno)
        elif "metadata" in obj:
            meta = obj["metadata"]
            if not isinstance(meta, dict) or not all(
                    isinstance(k, str) and isinstance(v, str) for k, v in meta.items()):
                raise DatasetError("metadata must map strings to strings", lineno)
            metadata.update(meta)
        else:
            f = _frame_from_obj(obj, lineno)
            if f.frame_id in frame_line:
                raise DatasetError(
                    f"duplicate frame_id {f.frame_id!r} (first seen on line "
                    f"{frame_line[f.frame_id]})", lineno)
            if dim is None:
                dim = len(f.features)
            elif len(f.features) != dim:
                raise DatasetError(
                    f"frame {f.frame_id!r} has feature dimension {len(f.features)}, "
                    f"expected {dim}", lineno)
            frame_line[f.frame_id] = lineno
            frames.setdefault(f.event_id, []).append(f)

    events = []
    for eid, fs in frames.items():
        gt = None
        if eid in gt_raw:
            gt = _ground_truth_from_obj(gt_raw[eid][0], fs, gt_raw[eid][1])
        events.append(Event.build(eid, fs, gt))
    for eid, (_, lineno) in gt_raw.items():
        if eid not in frames:
            raise DatasetError(f"ground truth for unknown event {eid!r}", lineno)

    d = Dataset(tuple(events), dim or 0, metadata)
    violations = validate_dataset(d)
    if violations:
        first = violations[0]
        line = frame_line.get(first.offending_id)
        raise DatasetError(str(first), line)
    return d


def _ground_truth_from_obj(obj: dict, frames: Sequence[FrameRecord], line: int) -> GroundTruth:
    ids = {f.frame_id for f in frames}
    eid = obj["event_id"]
    informative = _check_ids(obj["informative"], "informative", line)
    summary = _check_ids(obj["summary"], "summary", line)
    groups = obj["groups"]
    if not isinstance(groups, dict):
        raise DatasetError("groups must be an object", line)
    for fid, g in groups.items():
        if isinstance(g, bool) or not isinstance(g, int):
            raise DatasetError(f"group id of {fid!r} must be an integer", line)
    for what, refs in (("informative", informative), ("groups", list(groups)),
                       ("summary", summary)):
        unknown = [fid for fid in refs if fid not in ids]
        if unknown:
            raise DatasetError(
                f"ground truth {what} references unknown frame {unknown[0]!r} "
                f"in event {eid!r}", line)
    positive = set(informative)
    labels = {f.frame_id: f.frame_id in positive for f in frames}
    return GroundTruth(labels, dict(groups), tuple(summary))


def read_dataset(path) -> Dataset:
    with open(path, "rb") as fh:
        return parse_dataset(fh)


# ---------------------------------------------------------------------------
# serialization


def _dumps(obj) -> str:
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=False, allow_nan=False)


def frame_to_obj(f: FrameRecord) -> dict:
    return {
        "frame_id": f.frame_id,
        "event_id": f.event_id,
        "timestamp": f.timestamp,
        "features": list(f.features),
        "informativeness": f.informativeness,
        "saliency": f.saliency,
        "object_scores": list(f.object_scores),
        "face_scores": list(f.face_scores),
    }


def ground_truth_to_obj(event: Event) -> dict:
    gt = event.require_ground_truth()
    return {
        "gt": GT_TAG,
        "event_id": event.event_id,
        "informative": [fid for fid in event.frame_ids if gt.informative_labels.get(fid)],
        "groups": {fid: gt.group_ids[fid] for fid in event.frame_ids if fid in gt.group_ids},
        "summary": list(gt.summary_ids),
    }


def serialize_dataset(d: Dataset) -> bytes:
    """Canonical JSON Lines encoding; ``parse_dataset`` inverts it exactly."""
    lines = []
    if d.metadata:
        lines.append(_dumps({"metadata": {k: d.metadata[k] for k in sorted(d.metadata)}}))
    for e in d.events:
        lines.extend(_dumps(frame_to_obj(f)) for f in e.frames)
        if e.ground_truth is not None:
            lines.append(_dumps(ground_truth_to_obj(e)))
    return ("\n".join(lines) + "\n").encode("utf-8") if lines else b""


def write_dataset(d: Dataset, path) -> None:
    with open(path, "wb") as fh:
        fh.write(serialize_dataset(d))
