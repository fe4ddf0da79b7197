"""Utility functions to build channels and states for unit tests"""
from typing import Dict, List

import numpy as np
from loguru import logger

from pyseqpt.model.channels import standard_channels
from pyseqpt.model.structures import KrausChannel
from pyseqpt.util import block_rng


def channel_panel(d: int) -> Dict[str, KrausChannel]:
    """identity, depolarizing(0.3), a random unitary and a rank-2 random channel"""
    panel = {
        "identity": standard_channels("identity", d),
        "depolarizing": standard_channels("depolarizing", d, [0.3]),
        "random_unitary": standard_channels("random_unitary", d, [3]),
        "random_cptp": standard_channels("random_cptp", d, [2, 7]),
    }
    logger.debug("Channel panel in dimension {}: {}", d, list(panel))
    return panel


def random_density_matrices(d: int, n: int, seed: int = 0) -> np.ndarray:
    """n random full-rank density matrices, shape (n, d, d)"""
    rng = block_rng(seed)
    g = rng.normal(size=(n, d, d)) + 1j * rng.normal(size=(n, d, d))
    rho = g @ g.conj().transpose(0, 2, 1)
    return rho / np.trace(rho, axis1=1, axis2=2)[:, None, None]


def sample_pairs(d: int, n: int, seed: int = 0) -> List[tuple]:
    """(0, 0), the last diagonal element and n random index pairs"""
    rng = block_rng(seed)
    size = d * d
    pairs = [(0, 0), (size - 1, size - 1)]
    pairs += [tuple(int(v) for v in row) for row in rng.integers(0, size, (n, 2))]
    return pairs


def ket(d: int, k: int) -> np.ndarray:
    out = np.zeros(d, dtype=complex)
    out[k] = 1
    return out
