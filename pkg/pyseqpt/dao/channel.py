"""Data access object for channels"""
import os
from typing import List, Optional

from loguru import logger

from pyseqpt.dao.serialize import complex_to_list, list_to_complex, load_json, to_json, write_text
from pyseqpt.exceptions import ChannelInvariantError, ConfigError
from pyseqpt.model.channels import CHANNEL_NAMES, standard_channels
from pyseqpt.model.structures import ChiMatrix, KrausChannel


def write_channel(path: Optional[str], channel: KrausChannel) -> str:
    """{dim, kraus} with complex entries as [re, im]"""
    return write_text(to_json({"dim": channel.D, "kraus": complex_to_list(channel.kraus)}), path)


def read_channel(path: str) -> KrausChannel:
    """
    Read and validate a channel file.

    Raises ChannelInvariantError naming the violated invariant.
    """
    data = load_json(path)
    if "dim" not in data or "kraus" not in data:
        raise ChannelInvariantError(f"channel file '{path}' needs 'dim' and 'kraus'")
    try:
        kraus = list_to_complex(data["kraus"])
    except ConfigError as err:
        raise ChannelInvariantError(f"invalid kraus entries: {err}") from err
    try:
        dim = int(data["dim"])
    except (TypeError, ValueError) as err:
        raise ChannelInvariantError(
            f"channel dimension must be an integer, got {data['dim']!r}"
        ) from err
    channel = KrausChannel(dim, kraus)
    logger.debug("Read channel with {} Kraus operators from {}", channel.rank, path)
    return channel


def _parse_params(text: str) -> List[str]:
    return [p.strip() for p in text.split(",") if p.strip()]


def load_channel(source: str, D: int) -> KrausChannel:
    """
    Channel from the shorthand name[:param[,param]] or from a channel file.

    identity, depolarizing:lam, weyl:k, random_unitary:seed, random_cptp:rank,seed
    """
    name, _, params = source.partition(":")
    if name in CHANNEL_NAMES and name != "unitary":
        try:
            values = [float(p) if name == "depolarizing" else int(p) for p in _parse_params(params)]
        except ValueError as err:
            raise ConfigError(f"bad parameters in channel '{source}'") from err
        return standard_channels(name, D, values)
    if os.path.exists(source):
        channel = read_channel(source)
        if channel.D != D:
            raise ConfigError(f"channel file is in dimension {channel.D}, expected {D}")
        return channel
    raise ConfigError(f"'{source}' is neither a channel name nor a readable file")


def write_chi(path: Optional[str], chi: ChiMatrix) -> str:
    """{factor_dims, chi, basis: "weyl"}"""
    data = {
        "factor_dims": list(chi.basis.dims),
        "chi": complex_to_list(chi.chi),
        "basis": "weyl",
    }
    return write_text(to_json(data), path)
