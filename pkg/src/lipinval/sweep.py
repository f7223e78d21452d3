"""Experiment sweep: invalidate test trajectories over data sizes and downsamplers."""

from __future__ import annotations

import csv
import json
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .abstraction import build_abstraction
from .dataset import TrajectoryDataset, build_regressor_dataset
from .downsampling import from_options
from .invalidation import InconclusiveError, InvalidationProblem, invalidate
from .lipschitz import estimate_lipschitz

RESULT_FIELDS = ["dataset_size", "downsampler", "param", "traj_id", "verdict", "wall_ms", "constraints", "binaries"]
AGGREGATE_FIELDS = ["dataset_size", "downsampler", "param", "invalidated_of_20", "mean_wall_ms"]


def parse_downsampler(text: str) -> tuple[str, int | None]:
    """``"none"``, ``"knn:16"``, ``"grid:2"`` or ``"kmeans:4"``."""
    kind, _, param = text.partition(":")
    kind = kind.strip().lower()
    if kind == "none":
        return "none", None
    if kind not in ("grid", "kmeans", "knn") or not param:
        raise ValueError(f"bad downsampler spec {text!r}; expected none, grid:N, kmeans:K or knn:K")
    return kind, int(param)


@dataclass
class SweepSpec:
    sizes: list
    downsamplers: list = field(default_factory=lambda: [("none", None)])
    lip: list | None = None
    lip_scale: float = 1.0
    timing_repeats: int = 1
    audit: bool = False
    jobs: int = 1
    seed: int = 0


@dataclass
class SweepRow:
    dataset_size: int
    downsampler: str
    param: int | None
    traj_id: int
    verdict: str
    wall_ms: float
    constraints: int
    binaries: int
    by: str | None = None
    prescreen_fired: bool = False
    audit_status: str | None = None

    def csv_row(self) -> list:
        return [self.dataset_size, self.downsampler, "" if self.param is None else self.param, self.traj_id,
                self.verdict, f"{self.wall_ms:.4f}", self.constraints, self.binaries]


def sweep_lipschitz(train: TrajectoryDataset, spec: SweepSpec) -> np.ndarray:
    """Lipschitz vector shared by every size: supplied, or estimated on all pairs and scaled."""
    if spec.lip is not None:
        return np.asarray(spec.lip, dtype=float) * spec.lip_scale
    return estimate_lipschitz(build_regressor_dataset(train)) * spec.lip_scale


def _run_cell(args):
    reg, lip, size, kind, param, tests, spec = args
    abst = build_abstraction(reg.subset(np.arange(size)), lip)
    ds = from_options(kind, param, seed=spec.seed)
    state = None if ds is None else ds.prepare(abst.data)
    rows = []
    for tid, obs in enumerate(tests):
        prob = InvalidationProblem(abst, obs, downsampler=state)
        times = []
        verdict = None
        for _ in range(max(1, spec.timing_repeats)):
            try:
                verdict = invalidate(prob, audit=spec.audit)
            except InconclusiveError:
                verdict = None
                break
            solved = verdict.by != "prescreen" or verdict.audit_status is not None
            times.append(verdict.stats.milp_time if solved else verdict.stats.wall_time)
        if verdict is None:
            rows.append(SweepRow(size, kind, param, tid, "inconclusive", float("nan"), 0, 0))
            continue
        rows.append(SweepRow(
            size, kind, param, tid, verdict.outcome.value, 1000.0 * statistics.median(times),
            verdict.stats.constraints, verdict.stats.binaries, verdict.by,
            verdict.prescreen_hit is not None,
            None if verdict.audit_status is None else verdict.audit_status.value))
    return rows


def sweep_rows(train: TrajectoryDataset, tests, spec: SweepSpec) -> list[SweepRow]:
    """Every (size, downsampler, trajectory) verdict, in a fixed order."""
    reg = build_regressor_dataset(train)
    for size in spec.sizes:
        if not 0 < size <= len(reg):
            raise ValueError(f"dataset size {size} outside 1..{len(reg)} available pairs")
    lip = sweep_lipschitz(train, spec)
    tests = [np.asarray(getattr(t, "samples", t), dtype=float) for t in tests]
    cells = [(reg, lip, size, kind, param, tests, spec)
             for size in spec.sizes for kind, param in spec.downsamplers]
    if spec.jobs > 1:
        with ProcessPoolExecutor(spec.jobs) as pool:
            chunks = list(pool.map(_run_cell, cells))
    else:
        chunks = [_run_cell(c) for c in cells]
    rows = [r for chunk in chunks for r in chunk]
    rows.sort(key=lambda r: (r.dataset_size, r.downsampler, -1 if r.param is None else r.param, r.traj_id))
    return rows


def aggregate(rows: list[SweepRow]) -> list[list]:
    groups: dict[tuple, list] = {}
    for r in rows:
        groups.setdefault((r.dataset_size, r.downsampler, r.param), []).append(r)
    out = []
    for (size, kind, param), members in groups.items():
        count = sum(r.verdict == "invalidated" for r in members)
        times = [r.wall_ms for r in members if r.verdict != "inconclusive"]
        mean = statistics.fmean(times) if times else float("nan")
        out.append([size, kind, "" if param is None else param, count, f"{mean:.4f}"])
    return out


def write_results(rows, path, config: dict) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# config {json.dumps(config, sort_keys=True)}\n")
        writer = csv.writer(fh)
        writer.writerow(RESULT_FIELDS)
        for r in rows:
            writer.writerow(r.csv_row())


def write_aggregate(rows, path, config: dict) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# config {json.dumps(config, sort_keys=True)}\n")
        writer = csv.writer(fh)
        writer.writerow(AGGREGATE_FIELDS)
        writer.writerows(aggregate(rows))


def run_sweep(train: TrajectoryDataset, tests, spec: SweepSpec, results_path=None,
              aggregate_path=None, extra_config: dict | None = None) -> list[SweepRow]:
    rows = sweep_rows(train, tests, spec)
    config = {**asdict(spec), **(extra_config or {})}
    config["lip_used"] = [float(v) for v in sweep_lipschitz(train, spec)]
    if results_path is not None:
        write_results(rows, Path(results_path), config)
    if aggregate_path is not None:
        write_aggregate(rows, Path(aggregate_path), config)
    return rows
