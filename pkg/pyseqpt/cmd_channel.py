"""Write standard channels, and optionally their chi matrix, to file"""
import argparse

from loguru import logger

from pyseqpt.config import RunConfig
from pyseqpt.dao.channel import load_channel, write_channel, write_chi
from pyseqpt.model.channels import chi_basis
from pyseqpt.model.oracle import exact_chi
from pyseqpt.model.structures import KrausChannel


def add_arguments(parser: argparse.ArgumentParser) -> None:
    """Arguments of the channel subcommand"""
    parser.add_argument("-d", "--dim", type=int, help="Dimension d of the system")
    parser.add_argument(
        "-c",
        "--channel",
        type=str,
        help="Channel as name[:param[,param]] (identity, depolarizing, weyl, random_unitary, "
        "random_cptp) or a channel file",
    )
    parser.add_argument(
        "--chi-out", dest="chi_out", type=str, help="Also write the exact chi matrix to this file"
    )


def main(config: RunConfig) -> int:
    """Write the channel file"""
    logger.debug("Dimension      : {}", config.dim)
    logger.debug("Channel        : {}", config.channel)
    logger.debug("Output         : {}", config.out or "stdout")

    channel = run_channel(config.channel, config.dim)
    write_channel(config.out, channel)
    if config.chi_out:
        logger.info("Write chi matrix to {}", config.chi_out)
        write_chi(config.chi_out, exact_chi(channel, chi_basis(config.dim)))
    return 0


def run_channel(source: str, d: int) -> KrausChannel:
    channel = load_channel(source, d)
    logger.info("Channel {} in dimension {} with {} Kraus operators", source, d, channel.rank)
    return channel
