"""Scenario file I/O.

Flat TOML: one key per parameter, arrays for vectors, the 4x4 gain
matrix, and the CIP list.  Unknown keys are an error — typos must not
silently fall back to defaults.  Floats are written with repr() so a
saved scenario reloads bit-exactly.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .model import Cip, ConfigError, Scenario


def _as_float(key: str, v: object) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{key} must be a number, got {v!r}")
    return float(v)


def _as_int(key: str, v: object) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{key} must be an integer, got {v!r}")
    return v


def _as_bool(key: str, v: object) -> bool:
    if not isinstance(v, bool):
        raise ConfigError(f"{key} must be true or false, got {v!r}")
    return v


def _as_vec2(key: str, v: object) -> np.ndarray:
    if not isinstance(v, list) or len(v) != 2:
        raise ConfigError(f"{key} must be a 2-element array")
    return np.array([_as_float(key, c) for c in v], dtype=np.float64)


def _as_matrix4(key: str, v: object) -> np.ndarray:
    if not isinstance(v, list) or len(v) != 4:
        raise ConfigError(f"{key} must be a 4x4 array")
    rows = []
    for row in v:
        if not isinstance(row, list) or len(row) != 4:
            raise ConfigError(f"{key} must be a 4x4 array")
        rows.append([_as_float(key, c) for c in row])
    return np.array(rows, dtype=np.float64)


def _as_cips(key: str, v: object) -> list[Cip]:
    if not isinstance(v, list):
        raise ConfigError(f"{key} must be an array of [x_pos, activation_time] pairs")
    out = []
    for pair in v:
        if not isinstance(pair, list) or len(pair) != 2:
            raise ConfigError(f"{key} entries must be [x_pos, activation_time] pairs")
        out.append(Cip(_as_float(key, pair[0]), _as_float(key, pair[1])))
    return out


def _set_scalar(attr, conv):
    def handler(sc: Scenario, key: str, v: object) -> None:
        setattr(sc, attr, conv(key, v))
    return handler


def _set_geometry(attr, conv):
    def handler(sc: Scenario, key: str, v: object) -> None:
        setattr(sc.geometry, attr, conv(key, v))
    return handler


def _set_params(attr, conv):
    def handler(sc: Scenario, key: str, v: object) -> None:
        setattr(sc.params, attr, conv(key, v))
    return handler


def _set_v_desired(row: int):
    def handler(sc: Scenario, key: str, v: object) -> None:
        sc.params.v_desired[row] = _as_vec2(key, v)
    return handler


def _set_cips(sc: Scenario, key: str, v: object) -> None:
    sc.cips = _as_cips(key, v)


_HANDLERS = {
    "n": _set_scalar("n", _as_int),
    "seed": _set_scalar("seed", _as_int),
    "t_end": _set_scalar("t_end", _as_float),
    "corridor_length": _set_geometry("length", _as_float),
    "corridor_height": _set_geometry("height", _as_float),
    "x_min": _set_geometry("x_min", _as_float),
    "gate_closed": _set_geometry("gate_closed", _as_bool),
    "dt": _set_params("dt", _as_float),
    "stall_window": _set_params("stall_window", _as_float),
    "stall_distance": _set_params("stall_distance", _as_float),
    "doubt_duration": _set_params("doubt_duration", _as_float),
    "p_go_back": _set_params("p_go_back", _as_float),
    "v_desired_1": _set_v_desired(0),
    "v_desired_2": _set_v_desired(1),
    "v_desired_3": _set_v_desired(2),
    "v_desired_4": _set_v_desired(3),
    "repulsion_in": _set_params("repulsion_in", _as_float),
    "attraction": _set_params("attraction", _as_float),
    "repulsion_matrix": _set_params("repulsion_matrix", _as_matrix4),
    "wall_gain": _set_params("wall_gain", _as_float),
    "d_min": _set_params("d_min", _as_float),
    "d_wall": _set_params("d_wall", _as_float),
    "cips": _set_cips,
    "cip_sweep": _set_scalar("cip_sweep", _as_bool),
    "cell_size": _set_scalar("cell_size", _as_float),
    "history_stride": _set_scalar("history_stride", _as_float),
    "initial_density": _set_scalar("initial_density", _as_float),
    "front_offset": _set_scalar("front_offset", _as_float),
    "region_side": _set_scalar("region_side", _as_float),
    "sample_stride": _set_scalar("sample_stride", _as_float),
    "smooth_width": _set_scalar("smooth_width", _as_int),
    "stop_speed": _set_scalar("stop_speed", _as_float),
    "stop_hold": _set_scalar("stop_hold", _as_float),
    "frame_stride": _set_scalar("frame_stride", _as_int),
}


def loads(text: str) -> Scenario:
    """Parse a scenario file; missing keys keep reference defaults."""
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error: {exc}") from None
    sc = Scenario()
    for key, value in raw.items():
        handler = _HANDLERS.get(key)
        if handler is None:
            raise ConfigError(f"unknown config key {key!r}")
        handler(sc, key, value)
    sc.validate()
    return sc


def load(path: str | Path) -> Scenario:
    return loads(Path(path).read_text())


def _fmt(v: object) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _fmt_vec(v) -> str:
    return "[" + ", ".join(_fmt(float(c)) for c in v) + "]"


def dumps(sc: Scenario) -> str:
    """Serialize every parameter (including defaults) to flat TOML."""
    g, p = sc.geometry, sc.params
    lines = [
        "# population and horizon",
        f"n = {_fmt(sc.n)}",
        f"seed = {_fmt(sc.seed)}",
        f"t_end = {_fmt(sc.t_end)}",
        "",
        "# corridor",
        f"corridor_length = {_fmt(g.length)}",
        f"corridor_height = {_fmt(g.height)}",
        f"gate_closed = {_fmt(g.gate_closed)}",
    ]
    if g.x_min is not None:
        lines.append(f"x_min = {_fmt(g.x_min)}")
    lines += [
        "",
        "# movement model",
        f"dt = {_fmt(p.dt)}",
        f"v_desired_1 = {_fmt_vec(p.v_desired[0])}",
        f"v_desired_2 = {_fmt_vec(p.v_desired[1])}",
        f"v_desired_3 = {_fmt_vec(p.v_desired[2])}",
        f"v_desired_4 = {_fmt_vec(p.v_desired[3])}",
        "repulsion_matrix = ["
        + ", ".join(_fmt_vec(row) for row in p.repulsion_matrix)
        + "]",
        "",
        "# interaction gains (calibrated, not from paper)",
        f"repulsion_in = {_fmt(p.repulsion_in)}",
        f"attraction = {_fmt(p.attraction)}",
        f"wall_gain = {_fmt(p.wall_gain)}",
        f"d_min = {_fmt(p.d_min)}",
        f"d_wall = {_fmt(p.d_wall)}",
        "",
        "# decision rules",
        f"stall_window = {_fmt(p.stall_window)}",
        f"stall_distance = {_fmt(p.stall_distance)}",
        f"doubt_duration = {_fmt(p.doubt_duration)}",
        f"p_go_back = {_fmt(p.p_go_back)}",
        "",
        "# control & information points: [x_pos, activation_time] pairs",
        "cips = [" + ", ".join(f"[{_fmt(c.x_pos)}, {_fmt(c.activation_time)}]"
                               for c in sc.cips) + "]",
        f"cip_sweep = {_fmt(sc.cip_sweep)}",
        "",
        "# sampling and termination (calibrated, not from paper)",
        f"cell_size = {_fmt(sc.cell_size)}",
        f"history_stride = {_fmt(sc.history_stride)}",
        f"initial_density = {_fmt(sc.initial_density)}",
        f"front_offset = {_fmt(sc.front_offset)}",
        f"region_side = {_fmt(sc.region_side)}",
        f"sample_stride = {_fmt(sc.sample_stride)}",
        f"smooth_width = {_fmt(sc.smooth_width)}",
        f"stop_speed = {_fmt(sc.stop_speed)}",
        f"stop_hold = {_fmt(sc.stop_hold)}",
        f"frame_stride = {_fmt(sc.frame_stride)}",
        "",
    ]
    return "\n".join(lines)


def save(sc: Scenario, path: str | Path) -> None:
    Path(path).write_text(dumps(sc))
