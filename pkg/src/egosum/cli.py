"""Command-line interface.

Exit status is 0 on success, 1 when the input data cannot be processed and
2 on usage errors (bad flags or configuration).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from typing import Optional, Sequence

from .informativeness import (BEST_F_THRESHOLD, DEFAULT_THRESHOLD, event_labels_and_scores,
                              filter_informative, sweep_to_csv, threshold_sweep)
from .model import DatasetError, parse_dataset, serialize_dataset, validate_dataset
from .msms import curves_to_csv
from .pipeline import (PipelineConfig, PipelineError, estimate_fusion_weights, parse_config_text,
                       parse_weights, prepare_event, report_to_json, run_pipeline)
from .relevance import CRITERIA, FUSED, FusionWeights, fuse_relevance, ranked_lists_to_csv
from .synth import SynthParams, synth_dataset

EXIT_OK, EXIT_DATA, EXIT_USAGE = 0, 1, 2


def _read_dataset(path: str, gt_path: Optional[str] = None):
    with open(path, "rb") as fh:
        data = fh.read()
    if gt_path:
        with open(gt_path, "rb") as fh:
            extra = fh.read()
        if data and not data.endswith(b"\n"):
            data += b"\n"
        data += extra
    return parse_dataset(data)


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _range(text: str) -> tuple[int, int]:
    lo, _, hi = text.partition(":")
    return int(lo), int(hi or lo)


def parse_thresholds(text: str) -> list[float]:
    """``start:stop:step`` (inclusive) or a comma-separated list."""
    if ":" in text:
        start, stop, step = (float(x) for x in text.split(":"))
        if step <= 0:
            raise ValueError("step must be positive")
        n = int(round((stop - start) / step)) + 1
        return [round(start + i * step, 12) for i in range(n)]
    return [float(x) for x in text.split(",") if x.strip()]


def _config(args: argparse.Namespace) -> PipelineConfig:
    values: dict = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            values.update(parse_config_text(fh.read()))
    if getattr(args, "threshold", None) is not None:
        values["informativeness_threshold"] = args.threshold
    if getattr(args, "fraction", None) is not None:
        values["summary_fraction"] = args.fraction
        values["summary_length"] = None
    if getattr(args, "length", None) is not None:
        values["summary_length"] = args.length
    if getattr(args, "weights", None) is not None:
        values["weights"] = parse_weights(args.weights)
    if getattr(args, "events", None):
        values["estimation_events"] = tuple(s for s in args.events.split(",") if s)
    if getattr(args, "no_novelty", False):
        values["use_novelty"] = False
    if getattr(args, "seed", None) is not None:
        values["random_seed"] = args.seed
    if getattr(args, "workers", None) is not None:
        values["workers"] = args.workers
    return PipelineConfig(**values)


# ---------------------------------------------------------------------------
# subcommands


def cmd_validate(args) -> int:
    d = _read_dataset(args.dataset)
    problems = validate_dataset(d)
    for v in problems:
        print(v)
    if not problems:
        print(f"ok: {len(d.events)} events, {d.n_frames} frames, feature_dim={d.feature_dim}")
    return EXIT_DATA if problems else EXIT_OK


def cmd_filter(args) -> int:
    cfg = _config(args)
    d = _read_dataset(args.dataset)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("event_id", "frame_id", "informativeness", "kept"))
    for e in d.events:
        fe = filter_informative(e, cfg.informativeness_threshold)
        kept = set(fe.kept_ids)
        for f in e.frames:
            w.writerow((e.event_id, f.frame_id, repr(f.informativeness), int(f.frame_id in kept)))
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    d = _read_dataset(args.dataset, args.gt)
    labels, scores = event_labels_and_scores([e for e in d.events if e.ground_truth])
    rows = threshold_sweep(labels, scores, parse_thresholds(args.thresholds))
    _emit(sweep_to_csv(rows), args.out)
    return EXIT_OK


def cmd_rank(args) -> int:
    cfg = _config(args)
    d = _read_dataset(args.dataset)
    prepared = [prepare_event(e, cfg.informativeness_threshold) for e in d.events]
    prepared = [p for p in prepared if p.M]
    if args.criterion == FUSED:
        if isinstance(cfg.weights, str):
            est = [p for p in prepared if p.event.ground_truth is not None]
            if cfg.estimation_events is not None:
                keep = set(cfg.estimation_events)
                est = [p for p in prepared if p.event.event_id in keep]
            weights = estimate_fusion_weights(est, cfg.grid_size).weights
        else:
            weights = FusionWeights.of(*cfg.weights)
        lists = [fuse_relevance([p.lists[k] for k in CRITERIA], weights) for p in prepared]
    else:
        lists = [p.lists[args.criterion] for p in prepared]
    _emit(ranked_lists_to_csv(lists), args.out)
    return EXIT_OK


def cmd_weights(args) -> int:
    cfg = _config(args)
    d = _read_dataset(args.dataset)
    if cfg.estimation_events is not None:
        d = d.subset(cfg.estimation_events)
    prepared = [prepare_event(e, cfg.informativeness_threshold) for e in d.events]
    est = estimate_fusion_weights([p for p in prepared if p.event.ground_truth is not None],
                                  cfg.grid_size, cfg.workers)
    out = {"events": list(est.events), "per_criterion_auc": dict(est.per_criterion_auc),
           "weights": dict(est.weights.w)}
    _emit(json.dumps(out, indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_summarize(args) -> int:
    cfg = _config(args)
    d = _read_dataset(args.dataset)
    result = run_pipeline(d, cfg, evaluate=False)
    _emit(result.report_json(), args.out)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    cfg = _config(args)
    d = _read_dataset(args.dataset, args.gt)
    result = run_pipeline(d, cfg, evaluate=True)
    r = result.report
    out = {"per_criterion_auc": r["per_criterion_auc"], "weights": r["weights"],
           "fused_auc": r["fused_auc"], "uniform_auc": r["uniform_auc"],
           "per_event": r["per_event"]}
    if args.curves:
        with open(args.curves, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(curves_to_csv(result.curves))
    _emit(report_to_json(out), args.out)
    return EXIT_OK


def cmd_synth(args) -> int:
    p = SynthParams(events=args.events, frames_per_event=_range(args.frames),
                    clusters_per_event=_range(args.clusters), feature_dim=args.dim,
                    noise_scale=args.noise, noninformative_rate=args.noninformative_rate,
                    seed=args.seed)
    data = serialize_dataset(synth_dataset(p))
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.buffer.write(data)
    return EXIT_OK


# ---------------------------------------------------------------------------


def _pipeline_flags(p: argparse.ArgumentParser, summary: bool = True) -> None:
    p.add_argument("--threshold", type=float, help=f"informativeness threshold "
                   f"(default {DEFAULT_THRESHOLD}; best reported F-measure at {BEST_F_THRESHOLD})")
    p.add_argument("--weights", help="'estimate' or three comma-separated weights")
    p.add_argument("--events", help="comma-separated event ids used to estimate weights")
    p.add_argument("--workers", type=int)
    if summary:
        g = p.add_mutually_exclusive_group()
        g.add_argument("--fraction", type=float, help="summary size as a fraction of kept frames")
        g.add_argument("--length", type=int, help="summary size in frames")
        p.add_argument("--no-novelty", action="store_true",
                       help="rank by relevance only, skipping novelty re-ranking")
        p.add_argument("--seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="egosum", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="key=value configuration file; flags override it")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a dataset against its invariants")
    p.add_argument("dataset")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("filter", help="mark frames kept by the informativeness filter")
    p.add_argument("dataset")
    p.add_argument("--threshold", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("sweep", help="precision/recall of the filter over thresholds")
    p.add_argument("dataset")
    p.add_argument("--thresholds", default="0:1:0.025",
                   help="start:stop:step or comma-separated list")
    p.add_argument("--gt", help="extra JSONL file with ground-truth records")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("rank", help="per-criterion or fused ranked lists as CSV")
    p.add_argument("dataset")
    p.add_argument("--criterion", choices=list(CRITERIA) + [FUSED], default=FUSED)
    _pipeline_flags(p, summary=False)
    p.add_argument("--out")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("weights", help="estimate fusion weights from stand-alone MSMS AUCs")
    p.add_argument("dataset")
    _pipeline_flags(p, summary=False)
    p.add_argument("--out")
    p.set_defaults(func=cmd_weights)

    p = sub.add_parser("summarize", help="build summaries for every event")
    p.add_argument("dataset")
    _pipeline_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("evaluate", help="MSMS evaluation against ground-truth summaries")
    p.add_argument("dataset")
    p.add_argument("--gt", help="extra JSONL file with ground-truth records")
    p.add_argument("--curves", help="write MSMS curves as long-format CSV")
    _pipeline_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("synth", help="generate a synthetic annotated dataset")
    p.add_argument("--events", type=int, default=10)
    p.add_argument("--frames", default="20:40", help="frames per event, lo:hi")
    p.add_argument("--clusters", default="4:6", help="clusters per event, lo:hi")
    p.add_argument("--dim", type=int, default=8)
    p.add_argument("--noise", type=float, default=0.25)
    p.add_argument("--noninformative-rate", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DatasetError, PipelineError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
