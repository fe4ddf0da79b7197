"""Build the input design of a scheme and write it to file"""
import argparse

import numpy as np
from loguru import logger

from pyseqpt.config import RunConfig
from pyseqpt.dao.design import write_design
from pyseqpt.model.designs import design_for_scheme
from pyseqpt.model.structures import SCHEMES, WeightedDesign


def add_arguments(parser: argparse.ArgumentParser) -> None:
    """Arguments of the design subcommand"""
    parser.add_argument("-d", "--dim", type=int, help="Dimension d of the system")
    parser.add_argument("-s", "--scheme", type=str, choices=SCHEMES, help="Estimation scheme")
    parser.add_argument(
        "-D", "--big-dim", dest="big_dim", type=int, help="Embedding dimension (projected scheme)"
    )


def main(config: RunConfig) -> int:
    """Write the design for (dim, scheme[, big_dim])"""
    logger.debug("Dimension      : {}", config.dim)
    logger.debug("Scheme         : {}", config.scheme)
    logger.debug("Big dimension  : {}", config.big_dim)
    logger.debug("Output         : {}", config.out or "stdout")

    design = run_design(config.dim, config.scheme, config.big_dim)
    write_design(config.out, design)
    return 0


def run_design(d: int, scheme: str, big_dim=None) -> WeightedDesign:
    """
    Construct the design and log its size and weights.

    :param d: dimension
    :param scheme: primepower, tensor or projected
    :param big_dim: embedding dimension of the projected scheme
    """
    design = design_for_scheme(scheme, d, big_dim)
    weights = np.unique(np.round(design.probabilities, 15))
    logger.info(
        "{} design in dimension {}: {} states, {} distinct weights in [{:.6g}, {:.6g}]",
        design.scheme,
        d,
        len(design),
        len(weights),
        weights.min(),
        weights.max(),
    )
    design.counts()
    return design
