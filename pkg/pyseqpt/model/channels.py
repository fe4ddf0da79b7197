"""Operator bases, Kraus channels and chi matrices"""
from __future__ import annotations

from functools import lru_cache
from typing import Iterable, List, Optional, Sequence, Union

import numpy as np
from loguru import logger

from pyseqpt.exceptions import ChannelInvariantError, ConfigError, DimensionTooSmall
from pyseqpt.model.structures import (
    ChiMatrix,
    KrausChannel,
    OperatorBasis,
    ProductOperatorBasis,
)
from pyseqpt.util import block_rng, prime_power_factors


Basis = Union[OperatorBasis, ProductOperatorBasis]

CHANNEL_NAMES = ("identity", "depolarizing", "unitary", "weyl", "random_unitary", "random_cptp")


@lru_cache(maxsize=None)
def weyl_basis(D: int) -> OperatorBasis:
    """X^a Z^b at index m = a*D + b, X|k> = |k+1>, Z|k> = w^k |k>"""
    if D < 2:
        raise DimensionTooSmall(f"dimension {D} is smaller than 2")
    shift = np.roll(np.eye(D, dtype=complex), 1, axis=0)
    clock = np.diag(np.exp(2j * np.pi * np.arange(D) / D))
    elements = np.empty((D * D, D, D), dtype=complex)
    labels = []
    for a in range(D):
        for b in range(D):
            elements[a * D + b] = np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(
                clock, b
            )
            labels.append((a, b))
    elements.setflags(write=False)
    return OperatorBasis(D, elements, labels)


def product_basis(dims: Sequence[int]) -> ProductOperatorBasis:
    """Product Weyl basis over the given factor dimensions"""
    return _product_basis(tuple(int(D) for D in dims))


@lru_cache(maxsize=None)
def _product_basis(dims) -> ProductOperatorBasis:
    return ProductOperatorBasis([weyl_basis(D) for D in dims])


def chi_basis(d: int) -> ProductOperatorBasis:
    """Product Weyl basis over the prime-power factorization of d"""
    return product_basis(tuple(prime_power_factors(d)))


def _check_dim(ch: KrausChannel, rho: np.ndarray) -> None:
    if rho.shape[-2:] != (ch.D, ch.D):
        raise ConfigError(f"operator of shape {rho.shape} for a channel in dimension {ch.D}")


def apply_channel(ch: KrausChannel, rho: np.ndarray) -> np.ndarray:
    """
    sum_k A_k rho A_k^dag

    :param rho: d x d matrix or a stack of them, shape (..., d, d)
    """
    _check_dim(ch, rho)
    return sum(a @ rho @ a.conj().T for a in ch.kraus)


def modified_apply(ch: KrausChannel, basis: Basis, i: int, j: int, rho: np.ndarray) -> np.ndarray:
    """E(E_i^dag rho E_j), stacks allowed"""
    _check_dim(ch, rho)
    e_i = basis.element(i)
    e_j = basis.element(j)
    return apply_channel(ch, e_i.conj().T @ rho @ e_j)


def kraus_to_chi(ch: KrausChannel, basis: Basis) -> ChiMatrix:
    """chi_mn = sum_k a_km a*_kn with a_km = Tr(E_m^dag A_k) / d"""
    d = basis.D
    if ch.D != d:
        raise ConfigError(f"channel in dimension {ch.D} and basis in dimension {d}")
    E = basis.elements
    coeffs = ch.kraus.reshape(ch.rank, -1) @ E.reshape(len(E), -1).conj().T / d
    return ChiMatrix(basis, coeffs.T @ coeffs.conj())


def choi_matrix(ch: KrausChannel) -> np.ndarray:
    """J[(x, a), (y, b)] = E(|a><b|)[x, y]"""
    d = ch.D
    units = np.eye(d * d, dtype=complex).reshape(d * d, d, d)
    out = apply_channel(ch, units).reshape(d, d, d, d)
    return out.transpose(2, 0, 3, 1).reshape(d * d, d * d)


def chi_apply(chi: ChiMatrix, rho: np.ndarray) -> np.ndarray:
    """sum_mn chi_mn E_m rho E_n^dag"""
    E = chi.basis.elements
    left = np.einsum("mab,...bc->m...ac", E, rho)
    return np.einsum("mn,m...ac,ndc->...ad", chi.chi, left, E.conj())


def partial_trace(op: np.ndarray, dims: Sequence[int], traced: Iterable[int]) -> np.ndarray:
    """
    Trace out the subsystems listed in `traced`.

    :param op: operator on the product of `dims`, factor 1 most significant
    :return: operator on the remaining subsystems, in their original order
    """
    dims = list(dims)
    n = len(dims)
    traced = sorted(set(traced), reverse=True)
    if any(not 0 <= a < n for a in traced):
        raise ConfigError(f"cannot trace subsystems {traced} of {dims}")
    tensor = op.reshape(dims + dims)
    remaining = n
    for a in traced:
        tensor = np.trace(tensor, axis1=a, axis2=a + remaining)
        remaining -= 1
    kept = int(np.prod([D for a, D in enumerate(dims) if a not in traced]))
    return tensor.reshape(kept, kept)


def _haar_unitary(D: int, rng: np.random.Generator) -> np.ndarray:
    ginibre = (rng.normal(size=(D, D)) + 1j * rng.normal(size=(D, D))) / np.sqrt(2)
    q, r = np.linalg.qr(ginibre)
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def _random_isometry(D: int, rank: int, rng: np.random.Generator) -> np.ndarray:
    ginibre = rng.normal(size=(D * rank, D)) + 1j * rng.normal(size=(D * rank, D))
    q, _ = np.linalg.qr(ginibre)
    return q


def standard_channels(name: str, D: int, params: Optional[List] = None) -> KrausChannel:
    """
    Named channel in dimension D.

    identity; depolarizing [lam]; unitary [U]; weyl [k] (element k of the product Weyl basis);
    random_unitary [seed]; random_cptp [rank, seed]
    """
    params = list(params or [])
    if D < 2:
        raise DimensionTooSmall(f"dimension {D} is smaller than 2")

    if name == "identity":
        kraus = [np.eye(D)]
    elif name == "depolarizing":
        lam = float(params[0]) if params else 1.0
        upper = D * D / (D * D - 1)
        if not 0 <= lam <= upper:
            raise ConfigError(f"depolarizing strength {lam} outside [0, {upper:.6g}]")
        E = weyl_basis(D).elements
        kraus = [np.sqrt(1 - lam + lam / D ** 2) * E[0]]
        kraus += [np.sqrt(lam) / D * e for e in E[1:]]
    elif name == "unitary":
        if not params:
            raise ConfigError("unitary channel needs a matrix")
        kraus = [np.asarray(params[0], dtype=complex)]
    elif name == "weyl":
        k = int(params[0]) if params else 0
        kraus = [chi_basis(D).element(k)]
    elif name == "random_unitary":
        seed = int(params[0]) if params else 0
        kraus = [_haar_unitary(D, block_rng(seed))]
    elif name == "random_cptp":
        rank = int(params[0]) if params else 2
        seed = int(params[1]) if len(params) > 1 else 0
        if not 1 <= rank <= D * D:
            raise ConfigError(f"Kraus rank {rank} outside [1, {D * D}]")
        kraus = _random_isometry(D, rank, block_rng(seed)).reshape(rank, D, D)
    else:
        raise ConfigError(f"unknown channel '{name}', expected one of {', '.join(CHANNEL_NAMES)}")

    try:
        channel = KrausChannel(D, np.asarray(kraus, dtype=complex))
    except ChannelInvariantError as err:
        raise ChannelInvariantError(f"{name}: {err}") from err
    logger.debug("Channel {} with {} Kraus operators in dimension {}", name, channel.rank, D)
    return channel
