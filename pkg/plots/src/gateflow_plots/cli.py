"""Command line entry point: render figures from a run directory.

    plots densities --in out/run1 --out figs/densities.png
    plots frame     --in out/run1 --out figs/frame.png [--frame frame_003000.csv]
    plots sweep     --in out/sweep1 --out figs/sweep.png

``--in`` names the directory a simulation run (or sweep) wrote its CSVs
into; ``--out`` names the image file to create.  Everything the figures
need is read from the CSVs plus, when present, run_meta.toml for the
corridor geometry.  Bad or missing data exits 1 with a message on
stderr.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - python < 3.11
    import tomli as tomllib

from . import figures, io

EXIT_OK = 0
EXIT_DATA = 1


def _geometry(run_dir: Path, args: argparse.Namespace) -> tuple[float, float]:
    """Corridor size for the frame outline: flags beat run_meta.toml beats defaults."""
    length, height = 130.0, 10.0
    meta = run_dir / "run_meta.toml"
    if meta.is_file():
        try:
            doc = tomllib.loads(meta.read_text())
            length = float(doc.get("length", length))
            height = float(doc.get("height", height))
        except (tomllib.TOMLDecodeError, TypeError, ValueError):
            pass  # geometry falls back to defaults; the outline is cosmetic
    if args.length is not None:
        length = args.length
    if args.height is not None:
        height = args.height
    return length, height


def _pick_frame(run_dir: Path, name: str | None) -> Path:
    if name is not None:
        path = Path(name)
        if not path.is_file():
            path = run_dir / "frames" / name
        if not path.is_file():
            raise io.PlotDataError(f"frame {name!r} not found in {run_dir / 'frames'}")
        return path
    frames = sorted((run_dir / "frames").glob("frame_*.csv"))
    if not frames:
        raise io.PlotDataError(f"no frames/frame_*.csv under {run_dir}")
    return frames[-1]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plots", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser):
        p.add_argument("--in", dest="in_dir", required=True, help="run directory with the CSVs")
        p.add_argument("--out", dest="out_file", required=True, help="image file to write")

    p_dens = sub.add_parser("densities", help="four-curve region density figure")
    common(p_dens)
    p_dens.add_argument("--smooth", type=int, default=1, help="moving-average width in samples")

    p_frame = sub.add_parser("frame", help="corridor snapshot colored by status")
    common(p_frame)
    p_frame.add_argument("--frame", help="frame file name (default: latest in frames/)")
    p_frame.add_argument("--length", type=float, help="corridor length for the outline")
    p_frame.add_argument("--height", type=float, help="corridor height for the outline")

    p_sweep = sub.add_parser("sweep", help="heatmap of single-intervention scores")
    common(p_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    run_dir = Path(args.in_dir)
    out = Path(args.out_file)
    try:
        if args.command == "densities":
            data = io.load_densities(run_dir / "densities.csv")
            figures.plot_densities(data, out, smooth_width=args.smooth, title=run_dir.name)
        elif args.command == "frame":
            frame_path = _pick_frame(run_dir, args.frame)
            data = io.load_frame(frame_path)
            length, height = _geometry(run_dir, args)
            figures.plot_frame(data, out, length=length, height=height, title=frame_path.stem)
        elif args.command == "sweep":
            rows = io.load_sweep(run_dir / "sweep.csv")
            figures.plot_sweep(rows, out, title=run_dir.name)
    except io.PlotDataError as exc:
        print(f"plots error: {exc}", file=sys.stderr)
        return EXIT_DATA
    print(f"wrote {out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
