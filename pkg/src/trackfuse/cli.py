"""Command-line interface.

Subcommands:
  simulate     synthesize a scenario's sensor streams and ground truth
  run          full pipeline over a scenario, writing a run directory
  eval         metric reports (JSON + table) and figures for a run directory
  reid-bench   re-identification accuracy grid (CSV + figure)
  oracle-check brute-force verification of the numerical kernels

Failures exit nonzero with a machine-readable JSON error on stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .bench import run_reid_benchmark
from .errors import TrackFuseError
from .evaluate import evaluate_run, format_report
from .oracles import run_all
from .pipeline import load_run, run_pipeline, write_run, write_simulation
from .sim import load_scenario, run_scenario
from .thermal import load_detections


def _cmd_simulate(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario, seed_override=args.seed)
    result = run_scenario(scenario)
    out = Path(args.out)
    write_simulation(out, result)
    print(f"wrote {scenario.n_frames} frames for {len(scenario.subjects)} subjects to {out}")
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario, seed_override=args.seed)
    detections = load_detections(args.detections) if args.detections else None
    result = run_pipeline(scenario, detections=detections)
    out = Path(args.out)
    write_run(out, result)
    print(
        f"run complete: {len(result.radar_tracks)} radar tracks, "
        f"{len(result.face_tracks)} face tracks, {len(result.fused)} fused -> {out}"
    )
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    data = load_run(args.run)
    report = evaluate_run(data)
    out = Path(args.out) if args.out else Path(args.run)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "metrics.json", "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    table = format_report(report)
    with open(out / "metrics.txt", "w", encoding="utf-8") as fh:
        fh.write(table)
    if not args.no_figures:
        from .figures import render_run_figures

        written = render_run_figures(data, report, out / "figures")
        print(f"figures: {', '.join(str(p) for p in written)}")
    print(table, end="")
    return 0


def _cmd_reid_bench(args: argparse.Namespace) -> int:
    rows = run_reid_benchmark(
        n_subjects=args.subjects,
        train_min=args.train_min,
        windows=tuple(args.window),
        n_seeds=args.seeds,
        seed=args.seed,
        test_s=args.test_s,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "reid_accuracy.csv"
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(
            fh, fieldnames=["method", "subjects", "train_min", "window_s", "seeds", "accuracy"]
        )
        writer.writeheader()
        writer.writerows(rows)
    if not args.no_figures:
        from .figures import plot_reid_accuracy

        plot_reid_accuracy(rows, out / "reid_accuracy.png")
    for row in rows:
        print(
            f"{row['method']:>5}  W={row['window_s']:>5.1f}s  "
            f"train={row['train_min']:.1f}min  accuracy={row['accuracy']:.3f}"
        )
    print(f"wrote {csv_path}")
    return 0


def _cmd_oracle_check(args: argparse.Namespace) -> int:
    results = run_all(seed=args.seed)
    failed = False
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"[{status}] {r.name}: {r.detail}")
        failed = failed or not r.passed
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trackfuse",
        description="Radar/thermal people tracking, fusion and re-identification toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="emit sensor streams + ground truth")
    p_sim.add_argument("--scenario", required=True, help="scenario JSON file")
    p_sim.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p_sim.add_argument("--out", required=True, help="output directory")
    p_sim.set_defaults(func=_cmd_simulate)

    p_run = sub.add_parser("run", help="full pipeline over a scenario")
    p_run.add_argument("--scenario", required=True)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--out", required=True)
    p_run.add_argument(
        "--detections",
        default=None,
        help="JSON-lines face detections replacing the synthesized stream",
    )
    p_run.set_defaults(func=_cmd_run)

    p_eval = sub.add_parser("eval", help="metric reports for a run directory")
    p_eval.add_argument("--run", required=True, help="run directory from `run`")
    p_eval.add_argument("--out", default=None, help="report directory (default: the run dir)")
    p_eval.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    p_eval.set_defaults(func=_cmd_eval)

    p_bench = sub.add_parser("reid-bench", help="re-identification accuracy grid")
    p_bench.add_argument("--subjects", type=int, default=6)
    p_bench.add_argument("--train-min", type=float, default=3.0, dest="train_min")
    p_bench.add_argument(
        "--window",
        type=float,
        nargs="+",
        default=[0.0, 10.0, 20.0],
        help="score window lengths in seconds",
    )
    p_bench.add_argument("--seeds", type=int, default=20, help="WELM initializations")
    p_bench.add_argument("--seed", type=int, default=0, help="base simulation seed")
    p_bench.add_argument(
        "--test-s", type=float, default=60.0, dest="test_s", help="test capture length per subject (s)"
    )
    p_bench.add_argument("--out", default="reid-bench")
    p_bench.add_argument("--no-figures", action="store_true")
    p_bench.set_defaults(func=_cmd_reid_bench)

    p_oracle = sub.add_parser("oracle-check", help="run the brute-force oracle suites")
    p_oracle.add_argument("--seed", type=int, default=0)
    p_oracle.set_defaults(func=_cmd_oracle_check)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TrackFuseError as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 2
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
