"""Shots needed for a target accuracy"""
import argparse
from typing import List, Optional

from loguru import logger

from pyseqpt.config import RunConfig
from pyseqpt.dao.results import write_records
from pyseqpt.model.estimator import BOUNDS, plan_shots
from pyseqpt.model.structures import SCHEMES
from pyseqpt.util import prime_power_factors


FORMULAS = {
    "primepower": "ln(2/p) / (2 eps^2)",
    "projected": "ln(2/p) / (2 eps^2)",
    "tensor-2": "2 (1 - 1/d)^2 ln(2/p) / eps^2",
    "tensor": "2 4^N ln(2/p) / eps^2",
    "loglog": "2 (ln d)^4 ln(2/p) / eps^2",
}


def add_arguments(parser: argparse.ArgumentParser) -> None:
    """Arguments of the plan subcommand"""
    parser.add_argument("-s", "--scheme", type=str, choices=SCHEMES, help="Estimation scheme")
    parser.add_argument("-d", "--dim", type=int, help="Dimension d (required for tensor)")
    parser.add_argument("--eps", dest="epsilon", type=float, help="Error radius per part")
    parser.add_argument(
        "--conf", dest="confidence", type=float, default=0.95, help="Confidence 1 - p"
    )
    parser.add_argument(
        "--bound", type=str, choices=BOUNDS, default="hoeffding", help="Shot bound to report"
    )


def main(config: RunConfig) -> int:
    """Print the number of shots per part"""
    logger.debug("Scheme         : {}", config.scheme)
    logger.debug("Dimension      : {}", config.dim)
    logger.debug("Epsilon        : {}", config.epsilon)
    logger.debug("Confidence     : {}", config.confidence)

    records = run_plan(config.scheme, config.dim, config.epsilon, config.confidence, config.bound)
    write_records(records, config.out, config.fmt)
    return 0


def formula(scheme: str, dims: Optional[List[int]], bound: str) -> str:
    if bound == "loglog":
        return FORMULAS["loglog"]
    if scheme == "tensor" and dims is not None and len(dims) == 2:
        return FORMULAS["tensor-2"]
    return FORMULAS[scheme]


def run_plan(
    scheme: str,
    d: Optional[int],
    epsilon: float,
    confidence: float,
    bound: str = "hoeffding",
) -> List[dict]:
    """
    One record per bound: the requested one, plus the loglog estimate next to the tensor bound.
    """
    dims = prime_power_factors(d) if d is not None else None
    bounds = [bound]
    if bound == "hoeffding" and scheme == "tensor" and d is not None:
        bounds.append("loglog")

    records = []
    for name in bounds:
        shots = plan_shots(epsilon, 1 - confidence, scheme, dims, bound=name)
        logger.info("{} shots per part ({}: {})", shots, name, formula(scheme, dims, name))
        records.append(
            {
                "scheme": scheme,
                "d": d,
                "epsilon": epsilon,
                "confidence": confidence,
                "bound": name,
                "formula": formula(scheme, dims, name),
                "shots": shots,
            }
        )
    return records
