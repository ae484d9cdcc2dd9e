"""Command line entry points.

    gateflow run      --config FILE [--seed S] [--out DIR] [--frames K]
    gateflow validate --config FILE
    gateflow sweep    --config FILE --grid FILE [--seeds K] [--out DIR]
                      [--workers W]

Outputs land in the --out directory (default ./out, overridable with
the GATEFLOW_OUT environment variable): densities.csv, events.csv,
run_meta.toml, and frames/frame_XXXXXX.csv when frames are enabled;
sweep writes sweep.csv and best_plan.toml.  Exit codes: 0 ok, 1 config
error, 2 numeric abort.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import config
from .engine import NumericError, RunResult, run
from .model import ConfigError
from .probes import DENSITY_HEADER
from .sweep import best_plan_toml, load_grid, scores_csv, sweep

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERIC = 2

EVENTS_HEADER = "t,group_id,old,new,cause"
FRAME_HEADER = "id,group,status,x,y,is_leader"


def _out_dir(arg: str | None) -> Path:
    if arg:
        return Path(arg)
    return Path(os.environ.get("GATEFLOW_OUT", "out"))


def _events_csv(result: RunResult) -> str:
    lines = [EVENTS_HEADER]
    lines += [f"{e.t:.3f},{e.group_id},{e.old},{e.new},{e.cause}"
              for e in result.transitions]
    return "\n".join(lines) + "\n"


def _run_meta(result: RunResult) -> str:
    sc = result.scenario
    head = [
        "# resolved scenario (reloadable as a config file)",
        f"# wall clock: {result.wall_clock:.1f} s for {result.steps} steps",
        f"# groups: {result.pop.n_groups}, transitions: {len(result.transitions)},"
        f" removed: {result.removed_total},"
        f" active at end: {int(result.pop.active.sum())}",
        "",
    ]
    return "\n".join(head) + config.dumps(sc)


def write_outputs(result: RunResult, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "densities.csv").write_text(result.series.to_csv())
    (out / "events.csv").write_text(_events_csv(result))
    (out / "run_meta.toml").write_text(_run_meta(result))
    if result.frames:
        fdir = out / "frames"
        fdir.mkdir(exist_ok=True)
        for step, _t, rows in result.frames:
            lines = [FRAME_HEADER]
            lines += [f"{int(r[0])},{int(r[1])},{int(r[2])},"
                      f"{r[3]:.6f},{r[4]:.6f},{int(r[5])}" for r in rows]
            (fdir / f"frame_{step:06d}.csv").write_text("\n".join(lines) + "\n")


def _cmd_run(args: argparse.Namespace) -> int:
    sc = config.load(args.config)
    if args.seed is not None:
        sc.seed = args.seed
    if args.frames is not None:
        sc.frame_stride = args.frames
    sc.validate()
    try:
        result = run(sc)
    except NumericError as exc:
        print(f"numeric abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    write_outputs(result, _out_dir(args.out))
    last = result.series.times[-1] if len(result.series) else 0.0
    print(f"ok: {result.steps} steps to t={last:g} s, "
          f"{len(result.transitions)} transitions, "
          f"{result.removed_total} removed, wall {result.wall_clock:.1f} s")
    return EXIT_OK


def _cmd_validate(args: argparse.Namespace) -> int:
    sc = config.load(args.config)
    sc.validate()
    print(f"ok: n={sc.n}, corridor {sc.geometry.length:g} x "
          f"{sc.geometry.height:g} m, {len(sc.cips)} CIP(s)")
    return EXIT_OK


def _cmd_sweep(args: argparse.Namespace) -> int:
    base = config.load(args.config)
    seeds = list(range(base.seed, base.seed + args.seeds)) if args.seeds else None
    spec = load_grid(args.grid, base, seeds)
    scores = sweep(spec, workers=args.workers)
    out = _out_dir(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "sweep.csv").write_text(scores_csv(scores, spec))
    best = next((s for s in scores if s.ok), None)
    if best is None:
        print("no plan finished successfully", file=sys.stderr)
        return EXIT_NUMERIC
    (out / "best_plan.toml").write_text(best_plan_toml(best))
    print(f"best plan {best.label()}: mean peak {best.mean_peak:.3f} p/m2, "
          f"fluctuation {best.mean_fluctuation:.4f} "
          f"({len(scores)} plans, seeds {spec.seeds})")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="gateflow",
        description="Corridor crowd simulator with a closable gate")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate one scenario")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--frames", type=int, default=None, metavar="STRIDE",
                   help="dump a frame every STRIDE steps")
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("validate", help="check a scenario file")
    p.add_argument("--config", required=True)
    p.set_defaults(fn=_cmd_validate)

    p = sub.add_parser("sweep", help="brute-force CIP plan search")
    p.add_argument("--config", required=True)
    p.add_argument("--grid", required=True)
    p.add_argument("--seeds", type=int, default=None, metavar="K",
                   help="use K seeds starting at the config seed")
    p.add_argument("--out", default=None)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(fn=_cmd_sweep)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
