"""Run metrics, benchmark grading, and the two evaluation experiments.

Metrics per run:
  A1  first step at which any agent enters an incentivised route
  A2  simulation density: agents / pedestrian edge count
  A3  (input) time-mean of on-route agents / pedestrian edge count
  A4  time-mean percentage of active agents that are on-route

Benchmarks: A1 all within 2 standard deviations of the mean; A2 mean
density > 0.001; A3 Pearson correlation of incentivised density against
simulation density > 0.2; A4 mean ratio > 10%.
"""
from __future__ import annotations

import csv
import json
import random
import statistics
from dataclasses import dataclass, replace
from pathlib import Path

from .engine import SimConfig, SimResult, run
from .network import RoadNetwork, pedestrian_edges

A2_DENSITY_THRESHOLD = 0.001
A3_CORRELATION_THRESHOLD = 0.2
A4_RATIO_THRESHOLD_PCT = 10.0


class DegenerateSeriesError(ValueError):
    """Pearson correlation is undefined for constant series."""


def pearson(xs, ys) -> float:
    """Sample Pearson correlation coefficient."""
    if len(xs) != len(ys) or len(xs) < 2:
        raise ValueError("series must have equal length >= 2")
    try:
        return statistics.correlation(xs, ys)
    except (statistics.StatisticsError, ZeroDivisionError) as exc:
        # constant input, or variance underflowing to zero
        raise DegenerateSeriesError(str(exc)) from exc


@dataclass(frozen=True)
class RunMetrics:
    time_to_first_incentivised: int | None
    sim_density: float
    incentivised_density: float
    incentivised_ratio: float


@dataclass
class BenchmarkReport:
    runs: list[RunMetrics]
    a1_mean: float | None
    a1_std: float | None
    a1_outliers: int
    a1_none_count: int
    a1_pass: bool
    a2_mean: float
    a2_pass: bool
    correlation_a3: float
    a3_pass: bool
    a4_mean: float
    a4_pass: bool

    def to_dict(self) -> dict:
        return {
            "cycles": len(self.runs),
            "a1": {"mean": self.a1_mean, "std": self.a1_std,
                   "outliers_beyond_2_std": self.a1_outliers,
                   "never_reached_count": self.a1_none_count,
                   "pass": self.a1_pass},
            "a2": {"mean_density": self.a2_mean, "pass": self.a2_pass},
            "a3": {"pearson_r": self.correlation_a3, "pass": self.a3_pass},
            "a4": {"mean_ratio_pct": self.a4_mean, "pass": self.a4_pass},
        }


def compute_metrics(result: SimResult, net: RoadNetwork) -> RunMetrics:
    n_edges = len(pedestrian_edges(net))
    first = None
    for step, _agent, kind, _data in result.events:
        if kind == "enter_incentivised":
            first = step
            break
    inc_density = 0.0
    if result.series:
        inc_density = statistics.fmean(r.agents_on for r in result.series) / n_edges
    active_steps = [r for r in result.series if r.active >= 1]
    ratio = 0.0
    if active_steps:
        ratio = statistics.fmean(100.0 * r.agents_on / r.active for r in active_steps)
    return RunMetrics(
        time_to_first_incentivised=first,
        sim_density=result.n_agents / n_edges,
        incentivised_density=inc_density,
        incentivised_ratio=ratio)


def grade_benchmarks(runs: list[RunMetrics]) -> BenchmarkReport:
    a1_values = [m.time_to_first_incentivised for m in runs
                 if m.time_to_first_incentivised is not None]
    a1_mean = a1_std = None
    a1_outliers = 0
    if a1_values:
        a1_mean = statistics.fmean(a1_values)
        a1_std = statistics.pstdev(a1_values)
        a1_outliers = sum(1 for v in a1_values if abs(v - a1_mean) > 2 * a1_std)
    a2_mean = statistics.fmean(m.sim_density for m in runs)
    r = pearson([m.incentivised_density for m in runs],
                [m.sim_density for m in runs])
    a4_mean = statistics.fmean(m.incentivised_ratio for m in runs)
    return BenchmarkReport(
        runs=runs,
        a1_mean=a1_mean, a1_std=a1_std, a1_outliers=a1_outliers,
        a1_none_count=sum(1 for m in runs if m.time_to_first_incentivised is None),
        a1_pass=bool(a1_values) and a1_outliers == 0,
        a2_mean=a2_mean, a2_pass=a2_mean > A2_DENSITY_THRESHOLD,
        correlation_a3=r, a3_pass=r > A3_CORRELATION_THRESHOLD,
        a4_mean=a4_mean, a4_pass=a4_mean > A4_RATIO_THRESHOLD_PCT)


def run_metrics_experiment(base_config: SimConfig, cycles: int = 125,
                           out_dir: str | Path | None = None,
                           n_steps: int = 1000) -> BenchmarkReport:
    """125-cycle evaluation: 30-50 agents per cycle, 1000 steps each."""
    if cycles < 2:
        raise ValueError("cycles must be >= 2")
    rng = random.Random(base_config.seed)
    rows = []
    runs = []
    for _ in range(cycles):
        n_agents = rng.randint(30, 50)
        seed = rng.randrange(2 ** 63)
        cfg = replace(base_config, n_agents=n_agents, n_steps=n_steps, seed=seed)
        metrics = compute_metrics(run(cfg), cfg.network)
        runs.append(metrics)
        rows.append((seed, n_agents, metrics))
    report = grade_benchmarks(runs)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "runs.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["seed", "n_agents", "a1_first_on_step",
                             "a2_sim_density", "a3_incentivised_density",
                             "a4_ratio_pct"])
            for seed, n_agents, m in rows:
                writer.writerow([seed, n_agents,
                                 "" if m.time_to_first_incentivised is None
                                 else m.time_to_first_incentivised,
                                 repr(m.sim_density),
                                 repr(m.incentivised_density),
                                 repr(m.incentivised_ratio)])
        with open(out / "report.json", "w") as fh:
            json.dump(report.to_dict(), fh, indent=2)
            fh.write("\n")
    return report


def run_controller_experiment(base_config: SimConfig, runs: int = 10,
                              out_dir: str | Path | None = None) -> dict:
    """Repeated closed-loop runs; per-step cross-run mean/std series."""
    results = []
    for i in range(runs):
        cfg = replace(base_config, seed=base_config.seed + i)
        results.append(run(cfg).series)
    n_steps = min(len(series) for series in results)
    out = {"step": list(range(n_steps))}
    for name, attr in (("pi", "price"), ("e", "error"), ("on", "agents_on")):
        means, stds = [], []
        for k in range(n_steps):
            vals = [getattr(series[k], attr) for series in results]
            means.append(statistics.fmean(vals))
            stds.append(statistics.pstdev(vals))
        out[f"mean_{name}"] = means
        out[f"std_{name}"] = stds
    if out_dir is not None:
        path = Path(out_dir)
        path.mkdir(parents=True, exist_ok=True)
        with open(path / "controller_series.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["step", "mean_pi", "std_pi", "mean_e", "std_e",
                             "mean_on", "std_on"])
            for k in range(n_steps):
                writer.writerow([k, out["mean_pi"][k], out["std_pi"][k],
                                 out["mean_e"][k], out["std_e"][k],
                                 out["mean_on"][k], out["std_on"][k]])
    return out
