"""Brute-force search over control-point placements and activation times.

Every plan on the grid is simulated once per seed; plans are ranked by
the mean over seeds of the global smoothed density peak (optionally
plus the fluctuation score), ascending.  Failed runs mark their plan
invalid — reported, never ranked.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .engine import NumericError, run
from .model import Cip, ConfigError, Scenario
from .probes import fluctuation_score, series_stats

OBJECTIVES = ("peak_density", "peak_plus_fluctuation")


@dataclass
class SweepSpec:
    base: Scenario
    positions: list[float]
    times: list[float]
    seeds: list[int]
    cips_per_plan: int = 1
    objective: str = "peak_density"

    def validate(self) -> None:
        if not self.positions or not self.times:
            raise ConfigError("sweep grid needs at least one position and one time")
        if self.cips_per_plan not in (1, 2):
            raise ConfigError("cips_per_plan must be 1 or 2")
        if self.cips_per_plan == 2 and len(self.positions) < 2:
            raise ConfigError("two-CIP sweep needs at least two candidate positions")
        if self.objective not in OBJECTIVES:
            raise ConfigError(f"objective must be one of {OBJECTIVES}")
        if not self.seeds:
            raise ConfigError("sweep needs at least one seed")
        for x in self.positions:
            if not 0.0 <= x <= self.base.geometry.length:
                raise ConfigError(f"candidate position {x} outside [0, L]")
        for t in self.times:
            if t < 0:
                raise ConfigError(f"candidate activation time {t} < 0")


@dataclass
class PlanScore:
    plan: list[Cip]
    mean_peak: float = np.nan
    mean_fluctuation: float = np.nan
    per_seed_peak: list[float] = field(default_factory=list)
    per_seed_fluctuation: list[float] = field(default_factory=list)
    ok: bool = True
    error: str = ""

    def objective_value(self, objective: str) -> float:
        if objective == "peak_plus_fluctuation":
            return self.mean_peak + self.mean_fluctuation
        return self.mean_peak

    def label(self) -> str:
        if not self.plan:
            return "none"
        return "+".join(f"{c.x_pos:g}@{c.activation_time:g}" for c in self.plan)


def global_peak(series, smooth_width: int) -> float:
    """Max over regions and time of the smoothed density."""
    return max(s["peak"] for s in series_stats(series, smooth_width))


def evaluate_plan(base: Scenario, plan: list[Cip],
                  seeds: list[int]) -> PlanScore:
    """Run the base scenario with the plan's CIPs once per seed."""
    score = PlanScore(plan=[Cip(c.x_pos, c.activation_time) for c in plan])
    for seed in seeds:
        sc = base.clone()
        sc.cips = [Cip(c.x_pos, c.activation_time) for c in plan]
        sc.seed = seed
        try:
            res = run(sc)
        except (ConfigError, NumericError) as exc:
            score.ok = False
            score.error = f"seed {seed}: {exc}"
            return score
        score.per_seed_peak.append(global_peak(res.series, sc.smooth_width))
        score.per_seed_fluctuation.append(
            fluctuation_score(res.series, sc.smooth_width))
    score.mean_peak = float(np.mean(score.per_seed_peak))
    score.mean_fluctuation = float(np.mean(score.per_seed_fluctuation))
    return score


def plan_grid(spec: SweepSpec) -> list[list[Cip]]:
    """Cartesian candidate grid: positions x times for one CIP per plan,
    unordered position pairs sharing one activation time for two."""
    plans = []
    if spec.cips_per_plan == 1:
        for x in spec.positions:
            for t in spec.times:
                plans.append([Cip(x, t)])
    else:
        for xa, xb in combinations(spec.positions, 2):
            for t in spec.times:
                plans.append([Cip(xa, t), Cip(xb, t)])
    return plans


def _plan_key(score: PlanScore, objective: str):
    return (score.objective_value(objective), score.mean_fluctuation,
            tuple((c.x_pos, c.activation_time) for c in score.plan))


def sweep(spec: SweepSpec, workers: int = 1) -> list[PlanScore]:
    """Evaluate the whole grid; valid plans ranked ascending by the
    objective (ties: fluctuation, then plan order), failed plans last."""
    spec.validate()
    plans = plan_grid(spec)
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            scores = list(pool.map(_eval_star,
                                   [(spec.base, p, spec.seeds) for p in plans]))
    else:
        scores = [evaluate_plan(spec.base, p, spec.seeds) for p in plans]
    good = sorted((s for s in scores if s.ok),
                  key=lambda s: _plan_key(s, spec.objective))
    bad = [s for s in scores if not s.ok]
    return good + bad


def _eval_star(args) -> PlanScore:
    return evaluate_plan(*args)


def scores_csv(scores: list[PlanScore], spec: SweepSpec) -> str:
    buf = io.StringIO()
    head = ["rank", "plan", "objective", "mean_peak", "mean_fluctuation"]
    head += [f"peak_s{s}" for s in spec.seeds]
    head += [f"fluct_s{s}" for s in spec.seeds]
    head.append("status")
    buf.write(",".join(head) + "\n")
    for rank, s in enumerate(scores, 1):
        if s.ok:
            row = [str(rank), s.label(),
                   f"{s.objective_value(spec.objective):.6f}",
                   f"{s.mean_peak:.6f}", f"{s.mean_fluctuation:.6f}"]
            row += [f"{p:.6f}" for p in s.per_seed_peak]
            row += [f"{p:.6f}" for p in s.per_seed_fluctuation]
            row.append("ok")
        else:
            row = [str(rank), s.label(), "", "", ""]
            row += [""] * (2 * len(spec.seeds))
            row.append(f"failed: {s.error}")
        buf.write(",".join(row) + "\n")
    return buf.getvalue()


def best_plan_toml(score: PlanScore) -> str:
    pairs = ", ".join(f"[{repr(float(c.x_pos))}, {repr(float(c.activation_time))}]"
                      for c in score.plan)
    return (
        "# best control-point plan found by the sweep\n"
        f"# mean peak {score.mean_peak:.4f} p/m2, "
        f"fluctuation {score.mean_fluctuation:.4f}\n"
        f"cips = [{pairs}]\n"
    )


def load_grid(path: str | Path, base: Scenario,
              seeds: list[int] | None = None) -> SweepSpec:
    """Grid file keys: positions, times (arrays), cips_per_plan,
    objective, seeds (overridden by the seeds argument when given)."""
    try:
        raw = tomllib.loads(Path(path).read_text())
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"grid parse error: {exc}") from None
    known = {"positions", "times", "cips_per_plan", "objective", "seeds"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown grid key(s): {sorted(unknown)}")
    if "positions" not in raw or "times" not in raw:
        raise ConfigError("grid file must define positions and times")
    file_seeds = [int(s) for s in raw.get("seeds", [])]
    spec = SweepSpec(
        base=base,
        positions=[float(x) for x in raw["positions"]],
        times=[float(t) for t in raw["times"]],
        seeds=seeds if seeds is not None else file_seeds,
        cips_per_plan=int(raw.get("cips_per_plan", 1)),
        objective=str(raw.get("objective", "peak_density")),
    )
    spec.validate()
    return spec
