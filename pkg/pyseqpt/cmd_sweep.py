"""Empirical error of repeated estimates against the Hoeffding radius"""
import argparse
import copy
import os
from math import sqrt
from time import perf_counter
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from loguru import logger

from pyseqpt.cmd_estimate import add_target_arguments
from pyseqpt.config import RunConfig, parse_int_list
from pyseqpt.dao.channel import load_channel
from pyseqpt.dao.results import write_records
from pyseqpt.model.estimator import SeqptEstimator
from pyseqpt.model.structures import PARTS, KrausChannel
from pyseqpt.util import mkdir_if_not_exists

QUANTILES = (0.5, 0.9, 0.95)


def add_arguments(parser: argparse.ArgumentParser) -> None:
    """Arguments of the sweep subcommand"""
    add_target_arguments(parser)
    parser.add_argument(
        "--shot-list", dest="shot_list", type=str, help="Shot counts as '500,2000,8000'"
    )
    parser.add_argument(
        "-r", "--repetitions", type=int, default=1, help="Repetitions per shot count"
    )
    parser.add_argument(
        "--summary-out", dest="summary_out", type=str, help="CSV file for the quantile summary"
    )


def main(config: RunConfig) -> int:
    """Write one row per (i, j, shots, repetition) and log the quantile summary"""
    logger.debug("Dimension      : {}", config.dim)
    logger.debug("Scheme         : {}", config.scheme)
    logger.debug("Channel        : {}", config.channel)
    logger.debug("Shot list      : {}", config.shot_list)
    logger.debug("Repetitions    : {}", config.repetitions)

    channel = load_channel(config.channel, config.dim)
    shot_list = [0] if config.mode == "exact" else parse_int_list(config.shot_list)
    rows = run_sweep(
        channel,
        config.scheme,
        config.targets,
        shot_list,
        config.repetitions,
        confidence=config.confidence,
        seed=config.seed,
        mode=config.mode,
        big_dim=config.big_dim,
        n_jobs=config.n_jobs,
    )
    write_records(rows, config.out, config.fmt)

    summary = summarize_sweep(rows)
    logger.info("Sweep summary:\n{}", summary.to_string(index=False))
    if config.summary_out:
        mkdir_if_not_exists(os.path.dirname(config.summary_out))
        summary.to_csv(config.summary_out, index=False)
    return 0


def repetition_seed(seed: int, shots: int, repetition: int) -> int:
    """Independent seed for one repetition, a function of (seed, shots, repetition) only"""
    sequence = np.random.SeedSequence(seed, spawn_key=(shots, repetition))
    return int(sequence.generate_state(1)[0])


def _sweep_task(
    estimator: SeqptEstimator,
    exact: complex,
    i: int,
    j: int,
    shots: int,
    repetition: int,
    confidence: float,
    mode: str,
) -> dict:
    worker = copy.copy(estimator)
    worker.seed = repetition_seed(estimator.seed, shots, repetition)
    worker.n_jobs = 1
    if mode == "exact":
        result = worker.run(i, j, mode="exact")
        bound = 0.0
    else:
        result = worker.run(i, j, shots=shots, confidence=confidence)
        # each part within eps puts the complex error within sqrt(2) eps
        bound = result.epsilon_bound * (1.0 if i == j else sqrt(2))
    return {
        "i": i,
        "j": j,
        "shots": shots,
        "repetition": repetition,
        "seed": worker.seed,
        "estimate": result.estimate,
        "exact": exact,
        "error": abs(result.estimate - exact),
        "bound": bound,
        "confidence": confidence,
    }


def run_sweep(
    channel: KrausChannel,
    scheme: str,
    targets: List[Tuple[int, int]],
    shot_list: List[int],
    repetitions: int,
    confidence: float = 0.95,
    seed: int = 0,
    mode: str = "montecarlo",
    big_dim: Optional[int] = None,
    n_jobs: Optional[int] = None,
) -> List[dict]:
    """
    Repeated seeded estimates for every (target, shot count).

    Rows are sorted by (i, j, shots, repetition) whatever the completion order.
    """
    estimator = SeqptEstimator(channel, scheme, big_dim=big_dim, seed=seed, n_jobs=n_jobs)
    exact = {}
    for i, j in targets:
        exact[(i, j)] = estimator.exact(i, j)
        if mode != "exact":
            for part in PARTS:
                estimator.distribution(i, j, part)

    s = perf_counter()
    rows = Parallel(n_jobs=estimator.n_jobs, prefer="threads")(
        delayed(_sweep_task)(estimator, exact[(i, j)], i, j, shots, rep, confidence, mode)
        for i, j in targets
        for shots in shot_list
        for rep in range(repetitions)
    )
    rows = sorted(rows, key=lambda r: (r["i"], r["j"], r["shots"], r["repetition"]))
    logger.info("Swept {} estimates in {:.3f}s", len(rows), perf_counter() - s)
    return rows


def summarize_sweep(rows: List[dict]) -> pd.DataFrame:
    """Per (i, j, shots) quantiles of the error next to the bound"""
    frame = pd.DataFrame(rows)
    grouped = frame.groupby(["i", "j", "shots"])
    summary = grouped["error"].quantile(list(QUANTILES)).unstack()
    summary.columns = [f"error_q{int(q * 100)}" for q in QUANTILES]
    summary["bound"] = grouped["bound"].max()
    summary["repetitions"] = grouped["repetition"].count()
    return summary.reset_index()
