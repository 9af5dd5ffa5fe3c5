"""Seeded batch execution and the run artifact layout.

One experiment run writes, inside `output_dir`:
  curve_s<seed>.csv    learning curve, one row per eval point
  bundle_s<seed>.json  the trained policy bundle
  summary.csv          per-seed finals plus mean and sample-std rows
  timings.txt          wall-clock times (kept out of the CSVs so reruns
                       stay byte-identical)
Workers only touch their own per-seed files; the coordinator writes the
shared ones.  `ICP_SIM_THREADS` caps process fan-out.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from multiprocessing import Pool
from pathlib import Path

from ..channel import ChannelMode, map_new
from ..learn import (TrainResult, cluster_information_sets, fine_tune,
                     pretrain_direct, save_bundle, train_baseline,
                     train_full_obs, train_icp_rm)
from .config import ExperimentConfig, build_env, validate_pipeline

CURVE_HEADER = "train_step, mean_return, mean_ep_len, epsilon, seed"


@dataclass(frozen=True)
class SeedRow:
    seed: int
    final_return: float
    final_ep_len: float
    wall_time: float


@dataclass
class RunSummary:
    rows: tuple[SeedRow, ...]

    def _stats(self, values: list[float]) -> tuple[float, float]:
        mean = sum(values) / len(values)
        if len(values) < 2:
            return mean, 0.0
        var = sum((v - mean) ** 2 for v in values) / (len(values) - 1)
        return mean, math.sqrt(var)

    @property
    def return_stats(self) -> tuple[float, float]:
        return self._stats([r.final_return for r in self.rows])

    @property
    def ep_len_stats(self) -> tuple[float, float]:
        return self._stats([r.final_ep_len for r in self.rows])


# ---------------------------------------------------------------------------
# single-seed pipeline dispatch


def run_pipeline_seed(config: ExperimentConfig, seed: int) -> TrainResult:
    """Train one seed of the configured pipeline and return its result."""
    validate_pipeline(config)
    env = build_env(config)
    learner = config.learner
    if config.pipeline == "none":
        return train_baseline(env, learner, seed)
    if config.pipeline == "rm":
        imap = map_new(env.action_space.k, config.map_seed)
        return train_icp_rm(env, imap, learner, seed)
    if config.pipeline == "cheat":
        return pretrain_direct(env, learner, seed).train
    # delayed_map: pre-train with full observability, cluster the hidden
    # contexts into a frozen strategy, then fine-tune the action head
    full = train_full_obs(env, learner, seed)
    imap = map_new(env.action_space.k, config.map_seed)
    k = config.cluster_k if config.cluster_k is not None else imap.k
    clusters = cluster_information_sets(full, k=k, seed=seed,
                                        default_q=learner.default_q)
    return fine_tune(build_env(config), imap, clusters.strategy,
                     ChannelMode(config.channel_mode), learner, seed)


# ---------------------------------------------------------------------------
# artifact writers


def write_curve(path, curve) -> None:
    lines = [CURVE_HEADER]
    for p in curve:
        lines.append(f"{p.train_step}, {p.mean_return!r}, {p.mean_ep_len!r}, "
                     f"{p.epsilon!r}, {p.seed}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_summary(path, summary: RunSummary) -> None:
    lines = ["seed, final_return, final_ep_len"]
    for row in summary.rows:
        lines.append(f"{row.seed}, {row.final_return!r}, {row.final_ep_len!r}")
    mean_r, std_r = summary.return_stats
    mean_l, std_l = summary.ep_len_stats
    lines.append(f"mean, {mean_r!r}, {mean_l!r}")
    lines.append(f"std, {std_r!r}, {std_l!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_summary(path) -> tuple[tuple[SeedRow, ...], dict[str, tuple[float, float]]]:
    """Per-seed rows (wall times zeroed) and the recorded aggregate lines."""
    rows, aggregates = [], {}
    lines = Path(path).read_text().splitlines()
    for line in lines[1:]:
        label, ret, length = (p.strip() for p in line.split(","))
        if label in ("mean", "std"):
            aggregates[label] = (float(ret), float(length))
        else:
            rows.append(SeedRow(seed=int(label), final_return=float(ret),
                                final_ep_len=float(length), wall_time=0.0))
    return tuple(rows), aggregates


def _seed_job(config: ExperimentConfig, seed: int) -> SeedRow:
    result = run_pipeline_seed(config, seed)
    out = Path(config.output_dir)
    write_curve(out / f"curve_s{seed}.csv", result.curve)
    save_bundle(result.bundle, out / f"bundle_s{seed}.json")
    return SeedRow(seed=seed, final_return=result.final_return,
                   final_ep_len=result.final_ep_len,
                   wall_time=result.wall_time)


def worker_cap() -> int:
    raw = os.environ.get("ICP_SIM_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def run_experiment(config: ExperimentConfig,
                   workers: int | None = None) -> RunSummary:
    if config.output_dir is None:
        raise ValueError("the experiment config must set output_dir")
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    workers = worker_cap() if workers is None else max(1, workers)
    jobs = [(config, seed) for seed in config.seeds]
    if workers > 1 and len(jobs) > 1:
        with Pool(processes=min(workers, len(jobs))) as pool:
            rows = pool.starmap(_seed_job, jobs)
    else:
        rows = [_seed_job(*job) for job in jobs]
    summary = RunSummary(rows=tuple(rows))
    write_summary(out / "summary.csv", summary)
    timing_lines = [f"seed {row.seed}: {row.wall_time:.3f} s" for row in rows]
    timing_lines.append(f"total: {sum(r.wall_time for r in rows):.3f} s")
    (out / "timings.txt").write_text("\n".join(timing_lines) + "\n")
    return summary
