"""Utility functions"""
import os
from math import isqrt
from typing import Dict, List, Tuple

import numpy as np

from pyseqpt.exceptions import ConfigError, DimensionTooSmall, NotPrimePower


STRUCTURE_TOL = 1e-10  # unitarity / unbiasedness of constructed objects
IDENTITY_TOL = 1e-9  # integral identities and channel invariants
PROBABILITY_TOL = 1e-12  # normalization of design weights
SHOT_BLOCK = 256  # shots drawn from one RNG stream
THREADS_ENV = "SEQPT_THREADS"


def mkdir_if_not_exists(name: str) -> None:
    """Create directory if not exists"""
    if name and not os.path.exists(name):
        os.makedirs(name)


def is_prime(n: int) -> bool:
    """Trial division primality test, fine for desk-scale integers"""
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    for k in range(3, isqrt(n) + 1, 2):
        if n % k == 0:
            return False
    return True


def factorize(n: int) -> Dict[int, int]:
    """
    Prime factorization of n as {prime: exponent}, primes in increasing order.

    :param n: integer >= 2
    """
    if n < 2:
        raise DimensionTooSmall(f"cannot factorize {n}")
    factors: Dict[int, int] = {}
    rest = n
    k = 2
    while k * k <= rest:
        while rest % k == 0:
            factors[k] = factors.get(k, 0) + 1
            rest //= k
        k += 1
    if rest > 1:
        factors[rest] = factors.get(rest, 0) + 1
    return factors


def prime_power(n: int) -> Tuple[int, int]:
    """Return (p, k) with n = p**k, or raise NotPrimePower"""
    if n < 2:
        raise DimensionTooSmall(f"dimension {n} is smaller than 2")
    factors = factorize(n)
    if len(factors) != 1:
        raise NotPrimePower(f"{n} is not a prime power")
    ((p, k),) = factors.items()
    return p, k


def is_prime_power(n: int) -> bool:
    """n = p**k for a prime p and k >= 1"""
    return n >= 2 and len(factorize(n)) == 1


def prime_power_factors(d: int) -> List[int]:
    """Subsystem dimensions D_a = p_a**n_a, in increasing order of p_a"""
    return [p ** k for p, k in factorize(d).items()]


def omega(d: int) -> int:
    """Number of distinct prime divisors of d"""
    if d < 2:
        raise DimensionTooSmall(f"omega is undefined for {d}")
    return len(factorize(d))


def smallest_prime_power_above(d: int) -> int:
    """Least D > d with D a prime power"""
    if d < 2:
        raise DimensionTooSmall(f"dimension {d} is smaller than 2")
    candidate = d + 1
    while not is_prime_power(candidate):
        candidate += 1
    return candidate


def n_jobs_from_env() -> int:
    """joblib n_jobs from SEQPT_THREADS (0 or unset = all cores)"""
    raw = os.environ.get(THREADS_ENV, "0").strip() or "0"
    try:
        threads = int(raw)
    except ValueError as err:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got '{raw}'") from err
    if threads < 0:
        raise ConfigError(f"{THREADS_ENV} must be >= 0, got {threads}")
    return -1 if threads == 0 else threads


def block_rng(seed: int, *key: int) -> np.random.Generator:
    """
    Independent generator for a (seed, key...) address.

    :param seed: root seed of the run
    :param key: spawn key, e.g. (part, block) or (trial,)
    """
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(seed, spawn_key=tuple(key)))
    )


def random_hermitian(d: int, rng: np.random.Generator) -> np.ndarray:
    """Entrywise complex Gaussian matrix, Hermitized"""
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (g + g.conj().T) / 2


def kron_all(operators) -> np.ndarray:
    """Kronecker product of a sequence, first factor most significant"""
    out = np.ones((1, 1), dtype=complex)
    for op in operators:
        out = np.kron(out, op)
    return out
