"""
Monte Carlo simulation of the selective tomography circuits.

One circuit run prepares (|0> E_i^dag|psi> + |1> E_j^dag|psi>)/sqrt(2), sends the system through
the channel, reads the ancilla in the X basis (real part) or the -Y basis (imaginary part) and
checks per subsystem whether the input state survived. Counts of (sign, survival pattern) are
combined linearly into an estimate of chi_ij.
"""
from __future__ import annotations

from functools import reduce
from math import ceil, log, sqrt
from time import perf_counter
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from loguru import logger

from pyseqpt.exceptions import ConfigError
from pyseqpt.model.channels import Basis, apply_channel, chi_basis
from pyseqpt.model.designs import design_for_scheme, draw_indices, factor_designs, sample_input
from pyseqpt.model.oracle import all_fidelities, chi_from_fidelities, exact_mean_fidelity
from pyseqpt.model.structures import (
    PARTS,
    SCHEMES,
    CountTable,
    DesignSample,
    EstimateResult,
    KrausChannel,
    ShotOutcome,
    WeightedDesign,
    survival_patterns,
)
from pyseqpt.util import SHOT_BLOCK, block_rng, n_jobs_from_env, omega


__all__ = [
    "sample_input",
    "outcome_distribution",
    "simulate_shot",
    "coefficient_C",
    "combine_counts",
    "invert_mean_fidelity",
    "plan_shots",
    "epsilon_for_shots",
    "outcome_range",
    "estimate_radius",
    "omega",
    "SeqptEstimator",
    "estimate_chi_element",
]

BOUNDS = ("hoeffding", "loglog")
CHUNK = 256


def _rowwise_kron(stacks: Sequence[np.ndarray]) -> np.ndarray:
    """out[n] = stacks[0][n] x stacks[1][n] x ..."""
    out = stacks[0]
    for stack in stacks[1:]:
        n, r0, _ = out.shape
        r1 = stack.shape[1]
        out = np.einsum("nab,ncd->nacbd", out, stack).reshape(n, r0 * r1, r0 * r1)
    return out


def _distribution(
    ch: KrausChannel,
    basis: Basis,
    i: int,
    j: int,
    factor_vectors: Sequence[np.ndarray],
    part: str,
) -> np.ndarray:
    """
    Joint outcome probabilities for a stack of product inputs.

    :param factor_vectors: per factor, the (n, D_a) input vectors
    :return: array (n, 2, 2^N) indexed [input, sign (0: +1, 1: -1), survival pattern]
    """
    if part not in PARTS:
        raise ConfigError(f"unknown part '{part}', expected one of {PARTS}")
    factor_proj = [np.einsum("ni,nj->nij", v, v.conj()) for v in factor_vectors]
    proj = _rowwise_kron(factor_proj)
    if proj.shape[1] != ch.D:
        raise ConfigError(f"inputs in dimension {proj.shape[1]} for a channel in dimension {ch.D}")

    e_i = basis.element(i)
    e_j = basis.element(j)
    w00 = apply_channel(ch, e_i.conj().T @ proj @ e_i)
    w11 = apply_channel(ch, e_j.conj().T @ proj @ e_j)
    w01 = apply_channel(ch, e_i.conj().T @ proj @ e_j)

    n = len(proj)
    patterns = survival_patterns(len(factor_vectors))
    dist = np.empty((n, 2, len(patterns)))
    for r_idx, pattern in enumerate(patterns):
        q = _rowwise_kron(
            [p if r else np.eye(p.shape[1]) - p for p, r in zip(factor_proj, pattern)]
        )
        g00 = np.einsum("nab,nba->n", q, w00).real
        g11 = np.einsum("nab,nba->n", q, w11).real
        g01 = np.einsum("nab,nba->n", q, w01)
        interference = g01.real if part == "re" else g01.imag
        dist[:, 0, r_idx] = (g00 + g11) / 4 + interference / 2
        dist[:, 1, r_idx] = (g00 + g11) / 4 - interference / 2

    lowest = dist.min()
    if lowest < -1e-9:
        logger.warning("Clipping outcome probability {:.3e}", lowest)
    dist = np.clip(dist, 0, None)
    return dist / dist.sum(axis=(1, 2), keepdims=True)


def _design_vectors(design: WeightedDesign, indices: np.ndarray) -> List[np.ndarray]:
    return [
        design.factor_states[a][design.factor_index[indices, a]]
        for a in range(design.n_factors)
    ]


def outcome_distribution(
    ch: KrausChannel,
    basis: Basis,
    i: int,
    j: int,
    design: WeightedDesign,
    part: str = "re",
) -> np.ndarray:
    """Outcome probabilities (n_states, 2, 2^N) for every input of a design"""
    chunks = [
        _distribution(ch, basis, i, j, _design_vectors(design, idx), part)
        for idx in np.array_split(np.arange(len(design)), max(1, -(-len(design) // CHUNK)))
    ]
    return np.concatenate(chunks)


def simulate_shot(
    ch: KrausChannel,
    basis: Basis,
    i: int,
    j: int,
    sample: DesignSample,
    part: str,
    rng: np.random.Generator,
) -> ShotOutcome:
    """One circuit run on a sampled input"""
    vectors = [np.asarray(v)[None] for v in sample.factor_states]
    dist = _distribution(ch, basis, i, j, vectors, part)[0]
    n_patterns = dist.shape[1]
    cdf = np.cumsum(dist.ravel())
    flat = min(int(np.searchsorted(cdf, rng.random(), side="right")), dist.size - 1)
    sign_idx, r_idx = divmod(flat, n_patterns)
    return ShotOutcome(
        ancilla=1 if sign_idx == 0 else -1,
        survival=survival_patterns(len(vectors))[r_idx],
    )


def coefficient_C(survival: Sequence[int], factor_dims: Sequence[int]) -> float:
    """
    Weight of the survival pattern r in the count estimator.

    C_r = [(-1)^(N-|R|) prod_{a in R} D_a - (-1)^N] / d with R the surviving subsystems,
    and C_0 = 0.
    """
    survival = [int(r) for r in survival]
    if len(survival) != len(factor_dims):
        raise ConfigError(f"survival pattern {survival} for factor dims {list(factor_dims)}")
    if not any(survival):
        return 0.0
    N = len(factor_dims)
    d = int(np.prod(factor_dims))
    kept = int(np.prod([D for D, r in zip(factor_dims, survival) if r]))
    return ((-1) ** (N - sum(survival)) * kept - (-1) ** N) / d


def combine_counts(table: CountTable, factor_dims: Sequence[int], delta: int = 0) -> float:
    """
    (1/M) sum_r C_r (M_{+r} - M_{-r}) + (-1)^N delta / d

    :param delta: Kronecker delta of the target indices; pass it for the real part only
    """
    if table.n_factors != len(factor_dims):
        raise ConfigError("count table and factor dims disagree on N")
    if table.shots == 0:
        raise ConfigError("cannot combine an empty count table")
    N = len(factor_dims)
    d = int(np.prod(factor_dims))
    weights = np.array([coefficient_C(r, factor_dims) for r in survival_patterns(N)])
    difference = table.counts[0] - table.counts[1]
    return float(weights @ difference) / table.shots + (-1) ** N * delta / d


def invert_mean_fidelity(fidelity: complex, d: int, delta: int) -> complex:
    """chi_ij from a 2-design survival average, ((d+1) F - delta) / d"""
    return ((d + 1) * fidelity - delta) / d


def _bound_constant(scheme: str, dims: Optional[Sequence[int]], bound: str) -> float:
    if scheme not in SCHEMES:
        raise ConfigError(f"unknown scheme '{scheme}'")
    if bound not in BOUNDS:
        raise ConfigError(f"unknown bound '{bound}', expected one of {BOUNDS}")
    if bound == "loglog":
        if not dims:
            raise ConfigError("the loglog bound needs the dimension")
        return 2 * log(int(np.prod(dims))) ** 4
    if scheme in ("primepower", "projected"):
        return 0.5
    if not dims:
        raise ConfigError("the tensor bound needs the factor dimensions")
    N = len(dims)
    if N == 2:
        return 2 * (1 - 1 / int(np.prod(dims))) ** 2
    return 2 * 4 ** N


def _check_probability(p: float) -> None:
    if not 0 < p < 1:
        raise ConfigError(f"failure probability must lie in (0, 1), got {p}")


def plan_shots(
    epsilon: float,
    p: float,
    scheme: str,
    dims: Optional[Sequence[int]] = None,
    bound: str = "hoeffding",
) -> int:
    """
    Shots per estimated real part for error epsilon with failure probability p.

    primepower / projected: ln(2/p) / (2 eps^2); tensor with two factors:
    2 (1 - 1/d)^2 ln(2/p) / eps^2; tensor otherwise: 2 4^N ln(2/p) / eps^2;
    bound="loglog": 2 ln(2/p) (ln d)^4 / eps^2.
    """
    if not epsilon > 0:
        raise ConfigError(f"epsilon must be positive, got {epsilon}")
    _check_probability(p)
    return ceil(_bound_constant(scheme, dims, bound) * log(2 / p) / epsilon ** 2)


def epsilon_for_shots(
    shots: int,
    p: float,
    scheme: str,
    dims: Optional[Sequence[int]] = None,
    bound: str = "hoeffding",
) -> float:
    """Error radius guaranteed by `shots` per part at failure probability p"""
    if shots < 1:
        raise ConfigError("shots must be positive")
    _check_probability(p)
    return sqrt(_bound_constant(scheme, dims, bound) * log(2 / p) / shots)


def outcome_range(factor_dims: Sequence[int]) -> float:
    """Width 2 max_r |C_r| of the per-shot value C_r * sign"""
    return 2 * max(
        abs(coefficient_C(r, factor_dims)) for r in survival_patterns(len(factor_dims))
    )


def estimate_radius(shots: int, p: float, scheme: str, factor_dims: Sequence[int]) -> float:
    """
    Hoeffding radius of one estimated part after `shots` shots.

    The wider of the planning radius and the radius of the per-shot value range.
    """
    planned = epsilon_for_shots(shots, p, scheme, factor_dims)
    return max(planned, outcome_range(factor_dims) * sqrt(log(2 / p) / (2 * shots)))


def _count_block(
    design: WeightedDesign, outcome_cdf: np.ndarray, key: Tuple[int, ...], n_shots: int
) -> CountTable:
    """Counts of one block of shots; draw k of the block belongs to shot k"""
    uniforms = block_rng(*key).random((SHOT_BLOCK, 2))[:n_shots]
    cdf = outcome_cdf[draw_indices(design, uniforms[:, 0])]
    outcomes = np.minimum((uniforms[:, 1:2] >= cdf).sum(axis=1), cdf.shape[1] - 1)
    flat = np.bincount(outcomes, minlength=cdf.shape[1])
    return CountTable(design.n_factors, flat.reshape(2, -1))


class SeqptEstimator:
    """
    Simulated selective tomography of one channel with one input design.

    Outcome distributions are computed once per (i, j, part) for every design state; shots
    then only cost two uniform draws each.
    """

    def __init__(
        self,
        channel: KrausChannel,
        scheme: str,
        big_dim: Optional[int] = None,
        seed: int = 0,
        n_jobs: Optional[int] = None,
    ):
        if scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme '{scheme}', expected one of {SCHEMES}")
        self.channel = channel
        self.scheme = scheme
        self.d = channel.D
        self.design = design_for_scheme(scheme, self.d, big_dim)
        self.basis = chi_basis(self.d)
        self.seed = seed
        self.n_jobs = n_jobs_from_env() if n_jobs is None else n_jobs
        self._distributions: Dict[Tuple[int, int, str], np.ndarray] = {}

    def __repr__(self):
        return f"SeqptEstimator(scheme={self.scheme}, d={self.d}, seed={self.seed})"

    @property
    def factor_dims(self) -> List[int]:
        return list(self.design.factor_dims)

    def _check_indices(self, i: int, j: int) -> None:
        size = len(self.basis)
        if not (0 <= i < size and 0 <= j < size):
            raise ConfigError(f"indices ({i}, {j}) out of range [0, {size})")

    def distribution(self, i: int, j: int, part: str) -> np.ndarray:
        key = (i, j, part)
        if key not in self._distributions:
            self._distributions[key] = outcome_distribution(
                self.channel, self.basis, i, j, self.design, part
            )
        return self._distributions[key]

    def count(self, i: int, j: int, part: str, shots: int) -> CountTable:
        """
        Simulate `shots` runs of the circuit for one part.

        Shot k uses draw k % SHOT_BLOCK of the generator keyed (seed, i, j, part, k // SHOT_BLOCK).
        """
        self._check_indices(i, j)
        outcome_cdf = np.cumsum(self.distribution(i, j, part).reshape(len(self.design), -1), axis=1)
        part_code = PARTS.index(part)
        blocks = [
            (block, min(SHOT_BLOCK, shots - block * SHOT_BLOCK))
            for block in range(-(-shots // SHOT_BLOCK))
        ]
        n_jobs = self.n_jobs if len(blocks) > 1 else 1
        tables = Parallel(n_jobs=n_jobs, prefer="threads")(
            delayed(_count_block)(
                self.design, outcome_cdf, (self.seed, i, j, part_code, block), n_shots
            )
            for block, n_shots in blocks
        )
        return reduce(CountTable.merge, tables, CountTable(self.design.n_factors))

    def exact(self, i: int, j: int) -> complex:
        """Noiseless value from exhaustive design sums"""
        self._check_indices(i, j)
        delta = int(i == j)
        if self.scheme == "tensor":
            fidelities = all_fidelities(self.channel, self.basis, i, j, factor_designs(self.d))
        else:
            fidelities = {
                (1,): exact_mean_fidelity(self.channel, self.basis, i, j, self.design)
            }
        return complex(chi_from_fidelities(fidelities, self.factor_dims, delta))

    def run(
        self,
        i: int,
        j: int,
        shots: Optional[int] = None,
        epsilon: Optional[float] = None,
        confidence: float = 0.95,
        mode: str = "montecarlo",
    ) -> EstimateResult:
        """
        Estimate chi_ij.

        Monte Carlo runs take either a total shot count (split evenly between the real and
        imaginary parts, all real for i == j) or a target (epsilon, confidence), in which case
        every part gets plan_shots(epsilon, 1 - confidence) shots.
        """
        self._check_indices(i, j)
        if mode == "exact":
            if shots is not None or epsilon is not None:
                raise ConfigError("exact mode takes neither shots nor epsilon")
            return self._result(i, j, self.exact(i, j), 0, 0.0, confidence, mode, {})
        if mode != "montecarlo":
            raise ConfigError(f"unknown mode '{mode}'")
        if (shots is None) == (epsilon is None):
            raise ConfigError("give exactly one of shots or epsilon")
        p = 1 - confidence
        if not 0 < p < 1:
            raise ConfigError(f"confidence must lie in (0, 1), got {confidence}")

        diagonal = i == j
        if epsilon is not None:
            per_part = plan_shots(epsilon, p, self.scheme, self.factor_dims)
            budget = {"re": per_part, "im": 0 if diagonal else per_part}
        else:
            if shots < 1:
                raise ConfigError("shots must be positive")
            if diagonal:
                budget = {"re": shots, "im": 0}
            else:
                if shots < 2:
                    raise ConfigError("an off-diagonal element needs at least two shots")
                budget = {"re": shots - shots // 2, "im": shots // 2}

        s = perf_counter()
        tables = {part: self.count(i, j, part, n) for part, n in budget.items() if n}
        real = combine_counts(tables["re"], self.factor_dims, int(diagonal))
        imag = combine_counts(tables["im"], self.factor_dims) if "im" in tables else 0.0
        logger.debug("Simulated {} shots in {:.3f}s", sum(budget.values()), perf_counter() - s)

        bound = estimate_radius(
            min(n for n in budget.values() if n), p, self.scheme, self.factor_dims
        )
        counts = {part: table.to_dict() for part, table in tables.items()}
        return self._result(
            i, j, complex(real, imag), sum(budget.values()), bound, confidence, mode, counts
        )

    def _result(self, i, j, estimate, shots, bound, confidence, mode, counts) -> EstimateResult:
        return EstimateResult(
            scheme=self.scheme,
            d=self.d,
            factor_dims=self.factor_dims,
            i=i,
            j=j,
            estimate=estimate,
            shots=shots,
            epsilon_bound=bound,
            confidence=confidence,
            seed=self.seed,
            mode=mode,
            counts=counts,
        )


def estimate_chi_element(
    channel: KrausChannel,
    scheme: str,
    i: int,
    j: int,
    shots: Optional[int] = None,
    confidence: float = 0.95,
    seed: int = 0,
    mode: str = "montecarlo",
    epsilon: Optional[float] = None,
    big_dim: Optional[int] = None,
    n_jobs: Optional[int] = None,
) -> EstimateResult:
    """One-off estimate of chi_ij, see SeqptEstimator.run"""
    estimator = SeqptEstimator(channel, scheme, big_dim=big_dim, seed=seed, n_jobs=n_jobs)
    return estimator.run(
        i, j, shots=shots, epsilon=epsilon, confidence=confidence, mode=mode
    )
