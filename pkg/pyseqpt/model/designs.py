"""State 2-designs: maximal MUB designs, tensor products of them and projected designs"""
from __future__ import annotations

from functools import lru_cache
from itertools import product
from typing import List, Optional

import numpy as np
from loguru import logger

from pyseqpt.exceptions import (
    ConfigError,
    DimensionOrder,
    DimensionTooSmall,
    MUBConstructionError,
)
from pyseqpt.model.finite_field import FieldSpec, GaloisRing4, ff_mul, ff_trace
from pyseqpt.model.structures import DesignSample, IdentityReport, MUBSet, WeightedDesign
from pyseqpt.util import (
    IDENTITY_TOL,
    STRUCTURE_TOL,
    block_rng,
    prime_power,
    prime_power_factors,
    random_hermitian,
    smallest_prime_power_above,
)


__all__ = [
    "build_mub",
    "mub_to_design",
    "tensor_design",
    "projected_design",
    "smallest_prime_power_above",
    "verify_design",
    "design_for_scheme",
    "factor_designs",
    "design_average",
    "haar_quadratic_average",
    "sample_input",
]


def _field_tables(field: FieldSpec):
    """Multiplication table (as element indices) and absolute traces"""
    elements = field.elements()
    mul = np.array([[int(ff_mul(x, y)) for y in elements] for x in elements], dtype=np.int64)
    trace = np.array([ff_trace(x) for x in elements], dtype=np.int64)
    return elements, mul, trace


def _odd_char_bases(field: FieldSpec) -> np.ndarray:
    """Non-computational bases omega_p^{tr(a x^2 + b x)} / sqrt(q), a, b, x in GF(q)"""
    q = field.size
    _, mul, trace = _field_tables(field)
    squares = mul[np.arange(q), np.arange(q)]
    # exponent[a, b, x] = tr(a x^2) + tr(b x)
    exponent = trace[mul[:, squares]][:, None, :] + trace[mul][None, :, :]
    return np.exp(2j * np.pi * (exponent % field.p) / field.p) / np.sqrt(q)


def _even_char_bases(field: FieldSpec) -> np.ndarray:
    """Non-computational bases i^{Tr((a + 2b) x)} / sqrt(q) over Teichmuller a, b, x in GR(4, n)"""
    q = field.size
    ring = GaloisRing4(field)
    elements, mul, trace = _field_tables(field)
    teich = [ring.teichmuller(u) for u in elements]
    ring_trace = np.array(
        [[ring.trace(ring.mul(ta, tx)) for tx in teich] for ta in teich], dtype=np.int64
    )
    # Tr(2 b x) = 2 tr(b x) mod 4
    exponent = ring_trace[:, None, :] + 2 * trace[mul][None, :, :]
    return np.array([1, 1j, -1, -1j])[exponent % 4] / np.sqrt(q)


@lru_cache(maxsize=None)
def build_mub(D: int) -> MUBSet:
    """
    Maximal set of D+1 mutually unbiased bases in prime-power dimension D.

    Basis 0 is computational; basis a+1 is labeled by the field element with integer
    encoding a, and its state b by the element with encoding b. Components are ordered by
    the integer encoding of the field elements.

    :param D: prime power p^n
    """
    p, n = prime_power(D)
    field = FieldSpec.of(p, n)
    if p == 2:
        phases = _even_char_bases(field)
    else:
        phases = _odd_char_bases(field)

    bases = np.empty((D + 1, D, D), dtype=complex)
    bases[0] = np.eye(D)
    bases[1:] = phases
    phase_table = np.zeros((D + 1, D, D))
    phase_table[1:] = np.angle(phases).transpose(0, 2, 1)

    mub = MUBSet(D, bases, phase_table)
    ortho, unbiased = mub.max_deviation()
    if ortho > STRUCTURE_TOL or unbiased > STRUCTURE_TOL:
        raise MUBConstructionError(
            f"bases in dimension {D} fail validation "
            f"(orthonormality {ortho:.2e}, unbiasedness {unbiased:.2e})"
        )
    bases.setflags(write=False)
    phase_table.setflags(write=False)
    logger.debug("Built {} mutually unbiased bases in dimension {}", D + 1, D)
    return mub


def mub_to_design(mub: MUBSet) -> WeightedDesign:
    """Uniform design over all D(D+1) basis states, basis-major"""
    D = mub.D
    states = np.array(mub.bases).reshape(-1, D)
    n = len(states)
    return WeightedDesign(
        d=D,
        states=states,
        probabilities=np.full(n, 1 / n),
        survival_meta=[((M, k),) for M in range(D + 1) for k in range(D)],
        factor_dims=[D],
        scheme="uniform-MUB",
        factor_states=[states],
        factor_index=np.arange(n)[:, None],
    )


def tensor_design(factors: List[WeightedDesign]) -> WeightedDesign:
    """
    All tensor products of factor states, factor 1 most significant.

    :param factors: single-factor designs
    """
    if not factors:
        raise ConfigError("tensor design needs at least one factor")
    for f in factors:
        if f.n_factors != 1:
            raise ConfigError("tensor design factors must be single-factor designs")
    if len(factors) == 1:
        return factors[0]

    states = factors[0].states
    probabilities = factors[0].probabilities
    for f in factors[1:]:
        states = np.einsum("ia,kb->ikab", states, f.states).reshape(
            len(states) * len(f), -1
        )
        probabilities = np.outer(probabilities, f.probabilities).ravel()
    index = np.array(list(product(*[range(len(f)) for f in factors])), dtype=np.int64)
    meta = [
        tuple(f.survival_meta[k][0] for f, k in zip(factors, row)) for row in index
    ]
    return WeightedDesign(
        d=int(np.prod([f.d for f in factors])),
        states=states,
        probabilities=probabilities,
        survival_meta=meta,
        factor_dims=[f.d for f in factors],
        scheme="tensor",
        factor_states=[f.states for f in factors],
        factor_index=index,
    )


def projected_design(d: int, D: int) -> WeightedDesign:
    """
    Non-uniform 2-design in dimension d from the maximal MUB set of a prime power D > d.

    The d computational states carry weight 1/Z, the D^2 truncated and renormalized states of
    bases 1..D carry weight d^2/(Z D^2), Z = d(d+1).
    """
    if d < 2:
        raise DimensionTooSmall(f"dimension {d} is smaller than 2")
    prime_power(D)
    if D <= d:
        raise DimensionOrder(f"embedding dimension {D} must exceed {d}")
    mub = build_mub(D)
    Z = d * (d + 1)

    projected = np.array(mub.bases[1:, :, :d]).reshape(D * D, d) * np.sqrt(D / d)
    states = np.vstack([np.eye(d, dtype=complex), projected])
    probabilities = np.concatenate([np.full(d, 1 / Z), np.full(D * D, d * d / (Z * D * D))])
    meta = [((0, j),) for j in range(d)]
    meta += [((M, j),) for M in range(1, D + 1) for j in range(D)]
    return WeightedDesign(
        d=d,
        states=states,
        probabilities=probabilities,
        survival_meta=meta,
        factor_dims=[d],
        scheme="projected",
        factor_states=[states],
        factor_index=np.arange(len(states))[:, None],
    )


def factor_designs(d: int) -> List[WeightedDesign]:
    """Uniform MUB designs of the prime-power factors of d"""
    return [mub_to_design(build_mub(D)) for D in prime_power_factors(d)]


def design_for_scheme(scheme: str, d: int, big_dim: Optional[int] = None) -> WeightedDesign:
    """Input design of an estimation scheme in dimension d"""
    if big_dim is not None and scheme != "projected":
        raise ConfigError("an embedding dimension only applies to the projected scheme")
    if scheme == "primepower":
        prime_power(d)
        return mub_to_design(build_mub(d))
    if scheme == "tensor":
        return tensor_design(factor_designs(d))
    if scheme == "projected":
        return projected_design(d, big_dim or smallest_prime_power_above(d))
    raise ConfigError(f"unknown scheme '{scheme}'")


def design_average(design: WeightedDesign, A: np.ndarray, B: np.ndarray) -> complex:
    """sum_phi p_phi <phi|A|phi> <phi|B|phi>"""
    states = design.states
    exp_a = np.einsum("ni,ij,nj->n", states.conj(), A, states)
    exp_b = np.einsum("ni,ij,nj->n", states.conj(), B, states)
    return complex(np.sum(design.probabilities * exp_a * exp_b))


def haar_quadratic_average(A: np.ndarray, B: np.ndarray, d: int) -> complex:
    """(Tr A Tr B + Tr AB) / (d(d+1))"""
    if A.shape != (d, d) or B.shape != (d, d):
        raise ConfigError(f"operators of shape {A.shape}, {B.shape} in dimension {d}")
    return complex((np.trace(A) * np.trace(B) + np.trace(A @ B)) / (d * (d + 1)))


def verify_design(design: WeightedDesign, trials: int = 100, seed: int = 0) -> IdentityReport:
    """
    Worst deviation of the design average from the Haar average over random Hermitian pairs.

    Tensor designs are not 2-designs; their report is marked exempt.
    """
    d = design.d
    deviation = 0.0
    for trial in range(trials):
        rng = block_rng(seed, trial)
        A = random_hermitian(d, rng)
        B = random_hermitian(d, rng)
        deviation = max(
            deviation, abs(design_average(design, A, B) - haar_quadratic_average(A, B, d))
        )
    return IdentityReport(
        name=f"{design.scheme}-design",
        dims=tuple(design.factor_dims),
        trials=trials,
        max_deviation=float(deviation),
        tolerance=IDENTITY_TOL,
        exempt=design.scheme == "tensor",
    )


def sample_input(design: WeightedDesign, rng: np.random.Generator) -> DesignSample:
    """Draw one design state with probability p_phi"""
    index = int(draw_indices(design, rng.random(1))[0])
    return design_sample(design, index)


def draw_indices(design: WeightedDesign, uniforms: np.ndarray) -> np.ndarray:
    """Inverse-CDF lookup of design indices for uniforms in [0, 1)"""
    cumulative = np.cumsum(design.probabilities)
    return np.minimum(np.searchsorted(cumulative, uniforms, side="right"), len(design) - 1)


def design_sample(design: WeightedDesign, index: int) -> DesignSample:
    return DesignSample(
        index=index,
        state=design.states[index],
        survival_meta=tuple(design.survival_meta[index]),
        factor_states=tuple(
            design.factor_states[a][design.factor_index[index, a]]
            for a in range(design.n_factors)
        ),
    )
