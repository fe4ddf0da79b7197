"""Estimate selected chi matrix elements of a channel"""
import argparse
from time import perf_counter
from typing import List, Optional, Tuple

from loguru import logger

from pyseqpt.config import MODES, RunConfig
from pyseqpt.dao.channel import load_channel
from pyseqpt.dao.results import write_records
from pyseqpt.model.estimator import SeqptEstimator, plan_shots
from pyseqpt.model.structures import SCHEMES, EstimateResult, KrausChannel


def add_target_arguments(parser: argparse.ArgumentParser) -> None:
    """Dimension, scheme, channel and target arguments shared with sweep"""
    parser.add_argument("-d", "--dim", type=int, help="Dimension d of the system")
    parser.add_argument("-s", "--scheme", type=str, choices=SCHEMES, help="Estimation scheme")
    parser.add_argument(
        "-D", "--big-dim", dest="big_dim", type=int, help="Embedding dimension (projected scheme)"
    )
    parser.add_argument(
        "-c", "--channel", type=str, help="Channel as name[:param[,param]] or a channel file"
    )
    parser.add_argument("--i", type=int, help="Row index of the chi element")
    parser.add_argument("--j", type=int, help="Column index of the chi element")
    parser.add_argument("--pairs", type=str, help="Index pairs as 'i,j;i,j'")
    parser.add_argument(
        "--all", dest="all_pairs", action="store_true", help="Estimate every chi element"
    )
    parser.add_argument(
        "--conf", dest="confidence", type=float, default=0.95, help="Confidence 1 - p"
    )
    parser.add_argument("--mode", type=str, choices=MODES, default="montecarlo", help="Run mode")


def add_arguments(parser: argparse.ArgumentParser) -> None:
    """Arguments of the estimate subcommand"""
    add_target_arguments(parser)
    parser.add_argument("--shots", type=int, help="Total number of shots per element")
    parser.add_argument(
        "--eps",
        dest="epsilon",
        type=float,
        help="Target error per part, shots from the planning formula",
    )


def main(config: RunConfig) -> int:
    """Write one estimate per target"""
    logger.debug("Dimension      : {}", config.dim)
    logger.debug("Scheme         : {}", config.scheme)
    logger.debug("Channel        : {}", config.channel)
    logger.debug("Targets        : {}", len(config.targets))
    logger.debug("Mode           : {}", config.mode)
    logger.debug("Seed           : {}", config.seed)

    channel = load_channel(config.channel, config.dim)
    results = run_estimate(
        channel,
        config.scheme,
        config.targets,
        shots=config.shots,
        epsilon=config.epsilon,
        confidence=config.confidence,
        seed=config.seed,
        mode=config.mode,
        big_dim=config.big_dim,
        n_jobs=config.n_jobs,
    )
    write_records(
        [r.to_record() for r in results],
        config.out,
        config.fmt,
        document=[r.to_dict() for r in results],
    )
    return 0


def run_estimate(
    channel: KrausChannel,
    scheme: str,
    targets: List[Tuple[int, int]],
    shots: Optional[int] = None,
    epsilon: Optional[float] = None,
    confidence: float = 0.95,
    seed: int = 0,
    mode: str = "montecarlo",
    big_dim: Optional[int] = None,
    n_jobs: Optional[int] = None,
) -> List[EstimateResult]:
    """
    Run the estimator for every target element.

    :param targets: (i, j) index pairs in the product Weyl basis
    """
    estimator = SeqptEstimator(channel, scheme, big_dim=big_dim, seed=seed, n_jobs=n_jobs)
    if epsilon is not None:
        planned = plan_shots(epsilon, 1 - confidence, scheme, estimator.factor_dims)
        logger.info("Planned {} shots per part for eps={} at {}", planned, epsilon, confidence)

    s = perf_counter()
    results = []
    for i, j in targets:
        result = estimator.run(
            i, j, shots=shots, epsilon=epsilon, confidence=confidence, mode=mode
        )
        logger.info(
            "chi[{}, {}] = {:.6f} ({} shots, eps {:.4g})",
            i,
            j,
            result.estimate,
            result.shots,
            result.epsilon_bound,
        )
        results.append(result)
    logger.info("Estimated {} elements in {:.3f}s", len(results), perf_counter() - s)
    return results
