"""CSV readers for simulation outputs.

Each loader validates the header before touching any rows and raises
:class:`PlotDataError` with the missing column names, so a truncated or
foreign file fails with a message instead of a cryptic numpy error.
The readers depend only on the file layout, never on the simulation
package.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

DENSITY_COLUMNS = (
    "t",
    "rho1",
    "rho2",
    "rho3",
    "rho4",
    "n_active",
    "n_s1",
    "n_s2",
    "n_s3",
    "n_s4",
)
FRAME_COLUMNS = ("id", "group", "status", "x", "y")
SWEEP_COLUMNS = ("rank", "plan", "objective", "mean_peak", "mean_fluctuation", "status")


class PlotDataError(ValueError):
    """Raised when a CSV is missing, empty, or lacks required columns."""


def _read_table(path: str | Path, required: tuple[str, ...]) -> tuple[list[str], list[list[str]]]:
    path = Path(path)
    if not path.is_file():
        raise PlotDataError(f"{path}: file not found")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise PlotDataError(f"{path}: file is empty") from None
        header = [h.strip() for h in header]
        missing = [c for c in required if c not in header]
        if missing:
            raise PlotDataError(f"{path}: missing columns {', '.join(missing)}")
        rows = [row for row in reader if row]
    if not rows:
        raise PlotDataError(f"{path}: no data rows")
    bad = [i for i, row in enumerate(rows, start=2) if len(row) != len(header)]
    if bad:
        raise PlotDataError(f"{path}: line {bad[0]} has {len(rows[bad[0] - 2])} cells, expected {len(header)}")
    return header, rows


def _column(header: list[str], rows: list[list[str]], name: str) -> list[str]:
    idx = header.index(name)
    return [row[idx] for row in rows]


def _floats(path: Path | str, header: list[str], rows: list[list[str]], name: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in _column(header, rows, name)])
    except ValueError as exc:
        raise PlotDataError(f"{path}: column {name} is not numeric ({exc})") from None


def load_densities(path: str | Path) -> dict[str, np.ndarray]:
    """Read a densities.csv into arrays.

    Returns a dict with ``t`` (T,), ``rho`` (T, 4), ``n_active`` (T,) and
    ``n_status`` (T, 4).
    """
    header, rows = _read_table(path, DENSITY_COLUMNS)
    out = {
        "t": _floats(path, header, rows, "t"),
        "rho": np.column_stack([_floats(path, header, rows, f"rho{i}") for i in range(1, 5)]),
        "n_active": _floats(path, header, rows, "n_active").astype(int),
        "n_status": np.column_stack(
            [_floats(path, header, rows, f"n_s{i}") for i in range(1, 5)]
        ).astype(int),
    }
    return out


def load_frame(path: str | Path) -> dict[str, np.ndarray]:
    """Read one frames/frame_*.csv into arrays.

    Returns a dict with ``id``, ``group``, ``status``, ``is_leader`` (int
    arrays) and ``x``, ``y`` (float arrays).  ``is_leader`` defaults to
    zeros when the column is absent.
    """
    header, rows = _read_table(path, FRAME_COLUMNS)
    out = {
        "id": _floats(path, header, rows, "id").astype(int),
        "group": _floats(path, header, rows, "group").astype(int),
        "status": _floats(path, header, rows, "status").astype(int),
        "x": _floats(path, header, rows, "x"),
        "y": _floats(path, header, rows, "y"),
    }
    if "is_leader" in header:
        out["is_leader"] = _floats(path, header, rows, "is_leader").astype(int)
    else:
        out["is_leader"] = np.zeros(len(out["id"]), dtype=int)
    bad = out["status"][(out["status"] < 1) | (out["status"] > 4)]
    if bad.size:
        raise PlotDataError(f"{path}: status {bad[0]} outside 1..4")
    return out


def parse_plan(label: str) -> list[tuple[float, float]]:
    """Decode a plan label like ``"26@20+78@20"`` into (position, time) pairs.

    The empty plan is written as ``"none"`` and decodes to ``[]``.
    """
    label = label.strip()
    if label == "none":
        return []
    pairs = []
    for part in label.split("+"):
        try:
            x_str, t_str = part.split("@")
            pairs.append((float(x_str), float(t_str)))
        except ValueError:
            raise PlotDataError(f"plan label {label!r}: bad segment {part!r}") from None
    return pairs


def load_sweep(path: str | Path) -> list[dict]:
    """Read a sweep.csv into a list of row dicts.

    Each dict carries ``rank`` (int), ``plan`` (str), ``cips`` (decoded
    (position, time) pairs), ``objective``/``mean_peak``/
    ``mean_fluctuation`` (floats, NaN for failed plans) and ``status``.
    """
    header, rows = _read_table(path, SWEEP_COLUMNS)

    def num(value: str) -> float:
        try:
            return float(value)
        except ValueError:
            return float("nan")

    out = []
    for row in rows:
        rec = dict(zip(header, row))
        out.append(
            {
                "rank": int(rec["rank"]),
                "plan": rec["plan"],
                "cips": parse_plan(rec["plan"]),
                "objective": num(rec["objective"]),
                "mean_peak": num(rec["mean_peak"]),
                "mean_fluctuation": num(rec["mean_fluctuation"]),
                "status": rec["status"],
            }
        )
    return out
