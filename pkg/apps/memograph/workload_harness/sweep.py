"""
Policy sweeps: one memoized experiment per (grid point, seed), each on its own scratch store.
"""
import logging
import math
import tempfile
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional

import pandas as pd

from memograph.constants import SWEEP_COLUMNS, RunMode
from memograph.repository import Repository
from memograph.workload_harness.config import RunConfig, SweepGrid
from memograph.workload_harness.experiment import aggregate, run_experiment
from memograph.workload_harness.family import generate_family

logger = logging.getLogger(__name__)

EXTRA_COLUMNS = ["top_k", "mean_walltime_ms"]


def run_point(config: RunConfig, mode: RunMode = RunMode.MEMOIZED) -> dict[str, float]:
    """
    Aggregates of one run of ``config`` for every seed in ``config.seeds``, averaged.
    """
    per_seed = []
    for seed in config.seeds:
        seeded = config.with_seed(seed)
        tasks, planner = generate_family(seeded.family, seeded.embedding)
        with tempfile.TemporaryDirectory(prefix="memograph-sweep-") as scratch:
            store = Repository.init(Path(scratch), seeded.embedding)
            reports = run_experiment(
                tasks,
                planner,
                store,
                seeded.policy,
                seeded.cost,
                mode,
                cfg=seeded.similarity,
                profile=seeded.executor,
                seed=seed,
            )
        per_seed.append(aggregate(reports))
    return {name: math.fsum(row[name] for row in per_seed) / len(per_seed) for name in per_seed[0]}


def _point_config(grid: SweepGrid, point: dict[str, float]) -> RunConfig:
    base = grid.base.model_copy(update={"seeds": grid.seed_list})
    return base.with_policy(
        **{
            "lambda": point["lambda"],
            "tau_margin": point["tau_margin"],
            "beam_width": point["beam"],
            "max_candidates_per_node": point["top_k"],
        }
    )


def _row(grid: SweepGrid, point: dict[str, float]) -> dict[str, float]:
    means = run_point(_point_config(grid, point))
    logger.info(
        f"Sweep point lambda={point['lambda']} tau_margin={point['tau_margin']} "
        f"beam={point['beam']} top_k={point['top_k']}: mean_L={means['mean_L']:.6g}"
    )
    return {
        "lambda": point["lambda"],
        "tau_margin": point["tau_margin"],
        "beam": point["beam"],
        "mean_cost": means["mean_cost"],
        "mean_inconsistency": means["mean_inconsistency"],
        "mean_rho": means["mean_rho"],
        "mean_L": means["mean_L"],
        "top_k": point["top_k"],
        "mean_walltime_ms": means["mean_walltime_ms"],
    }


def sweep(grid: SweepGrid, workers: Optional[int] = None) -> pd.DataFrame:
    """
    One row per grid point, in grid order. Points run in separate processes when more than
    one worker is available; the tasks of a point always run in sequence.
    :param grid: SweepGrid
    :param workers: process count, ``grid.base.workers`` by default
    :return: DataFrame with the sweep columns followed by top_k and mean_walltime_ms
    """
    points = grid.points()
    workers = workers or grid.base.workers
    logger.info(f"Sweeping {len(points)} points over seeds {grid.seed_list} with {workers} workers")
    if workers > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_row, [grid] * len(points), points))
    else:
        rows = [_row(grid, point) for point in points]
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS + EXTRA_COLUMNS)
