"""Command line interface: run, bench, eval, make-fixture."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import evaluation
from .errors import HarpipeError, exit_code_for
from .runtime import bench, load_config, run, write_events


def _cmd_run(args) -> int:
    cfg = load_config(args.config, real_time=True if args.real_time else None)
    events, metrics = run(cfg)
    write_events(events, args.out)
    print(f"{metrics.frames_in} frames in, {metrics.frames_out} processed, "
          f"{sum(1 for e in events if e['type'] == 'decision')} decisions, "
          f"{metrics.fps:.1f} FPS -> {args.out}")
    return 0


def _cmd_bench(args) -> int:
    cfg = load_config(args.config)
    report = bench(cfg)
    with open(args.report, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2)
    print(f"fps={report['fps']:.1f} drops={report['drops']} -> {args.report}")
    return 0


def _cmd_eval(args) -> int:
    if args.manifest == "fixture":
        manifest = evaluation.fixture_manifest()
    else:
        manifest = evaluation.DatasetManifest.from_json(args.manifest)
    if args.predictions:
        with open(args.predictions, encoding="utf-8") as fh:
            predictions = json.load(fh)
    else:
        # sanity mode: a planted oracle that predicts the ground-truth label
        predictions = manifest.labels()

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    splits = evaluation.make_splits(manifest, args.seed)
    report = {"splits": [], "mean_top1": None}
    scores = []
    for plan in splits:
        top1, cm = evaluation.evaluate(manifest, plan, predictions)
        scores.append(top1)
        cm.write_csv(out_dir / f"confusion_split{plan.split_index}.csv")
        report["splits"].append({
            "split": plan.split_index,
            "top1": top1,
            "test_size": len(plan.test_ids),
            "cm": cm.to_lists(),
        })
    report["mean_top1"] = evaluation.average_splits(scores)
    with open(out_dir / "report.json", "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2)
    print(f"mean top1 over 3 splits: {report['mean_top1']:.4f} -> {out_dir}/report.json")
    return 0


def _cmd_make_fixture(args) -> int:
    from .synth import make_stream
    frames = make_stream(args.out, duration_s=args.duration, fps=args.fps, seed=args.seed)
    print(f"wrote {frames} frames to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="harpipe")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="replay a stream through the pipeline")
    p.add_argument("--config", required=True)
    p.add_argument("--real-time", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("bench", help="measure per-stage latency and FPS")
    p.add_argument("--config", required=True)
    p.add_argument("--report", required=True)
    p.set_defaults(fn=_cmd_bench)

    p = sub.add_parser("eval", help="three-split offline evaluation")
    p.add_argument("--manifest", required=True,
                   help="manifest JSON path, or 'fixture' for the bundled manifest")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--predictions", help="JSON map video_id -> label (default: oracle)")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_eval)

    p = sub.add_parser("make-fixture", help="generate a synthetic stream directory")
    p.add_argument("--out", required=True)
    p.add_argument("--duration", type=float, default=10.0)
    p.add_argument("--fps", type=float, default=15.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=_cmd_make_fixture)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except HarpipeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exit_code_for(exc)


if __name__ == "__main__":
    sys.exit(main())
