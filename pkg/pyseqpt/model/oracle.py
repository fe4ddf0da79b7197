"""
Brute-force ground truth.

Exact design averages, mean and reduced survival fidelities by exhaustive summation, chi
matrices reconstructed from the channel's action on matrix units, and numeric checks of the
integral identities the estimators rely on.
"""
from __future__ import annotations

from itertools import product
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from loguru import logger

from pyseqpt.exceptions import ConfigError, InvariantError, UnknownIdentity
from pyseqpt.model.channels import (
    Basis,
    apply_channel,
    chi_basis,
    choi_matrix,
    partial_trace,
    standard_channels,
)
from pyseqpt.model.designs import (
    build_mub,
    design_average,
    factor_designs,
    haar_quadratic_average,
    mub_to_design,
    projected_design,
    tensor_design,
)
from pyseqpt.model.structures import (
    ChiMatrix,
    IdentityReport,
    KrausChannel,
    WeightedDesign,
    batched_kron,
)
from pyseqpt.util import (
    IDENTITY_TOL,
    block_rng,
    is_prime_power,
    n_jobs_from_env,
    prime_power,
    prime_power_factors,
    random_hermitian,
    smallest_prime_power_above,
)


CHUNK = 256

Mask = Tuple[int, ...]


def tensor_average(A: np.ndarray, B: np.ndarray, dims: Sequence[int]) -> complex:
    """sum_X Tr[Tr_X A Tr_X B] / (d prod(D_a + 1)) over all subsystem subsets X"""
    dims = list(dims)
    d = int(np.prod(dims))
    total = 0j
    for traced in product((0, 1), repeat=len(dims)):
        X = [a for a, t in enumerate(traced) if t]
        total += np.trace(partial_trace(A, dims, X) @ partial_trace(B, dims, X))
    return complex(total / (d * np.prod([D + 1 for D in dims])))


def _survival_weighted(
    ch: KrausChannel, basis: Basis, i: int, j: int, rho: np.ndarray, measure: np.ndarray
) -> np.ndarray:
    """Tr[measure E(E_i^dag rho E_j)] for stacks of inputs"""
    e_i = basis.element(i)
    e_j = basis.element(j)
    out = apply_channel(ch, e_i.conj().T @ rho @ e_j)
    return np.einsum("nab,nba->n", measure, out)


def exact_mean_fidelity(
    ch: KrausChannel, basis: Basis, i: int, j: int, design: WeightedDesign
) -> complex:
    """sum_phi p_phi Tr[P_phi E(E_i^dag P_phi E_j)]"""
    if design.d != ch.D:
        raise ConfigError(f"design in dimension {design.d} for a channel in dimension {ch.D}")
    total = 0j
    for start in range(0, len(design), CHUNK):
        states = design.states[start : start + CHUNK]
        proj = np.einsum("ni,nj->nij", states, states.conj())
        values = _survival_weighted(ch, basis, i, j, proj, proj)
        total += np.sum(design.probabilities[start : start + CHUNK] * values)
    return complex(total)


def exact_reduced_fidelity(
    ch: KrausChannel,
    basis: Basis,
    i: int,
    j: int,
    mask: Sequence[int],
    designs: List[WeightedDesign],
) -> complex:
    """
    Reduced mean survival fidelity over the subsystems flagged 1 in `mask`.

    Flagged subsystems are prepared in design states and read out; the others are fed the
    maximally mixed state and ignored:
    sum_psi p_psi Tr[(P_psi x 1) E_ij(P_psi x 1 / D_rest)].

    :param designs: one single-factor design per subsystem
    """
    mask = tuple(int(m) for m in mask)
    if len(mask) != len(designs):
        raise ConfigError(f"mask {mask} for {len(designs)} subsystems")
    if not any(mask):
        raise ConfigError("the reduced fidelity needs at least one flagged subsystem")
    if all(mask):
        return exact_mean_fidelity(ch, basis, i, j, tensor_design(designs))

    stacks = []
    weights = np.ones(1)
    rest = 1
    for flagged, design in zip(mask, designs):
        if flagged:
            stacks.append(design.projectors())
            weights = np.outer(weights, design.probabilities).ravel()
        else:
            stacks.append(np.eye(design.d, dtype=complex)[None])
            rest *= design.d
    measure = batched_kron(stacks)
    if measure.shape[1] != ch.D:
        raise ConfigError(f"subsystem designs do not compose dimension {ch.D}")
    values = _survival_weighted(ch, basis, i, j, measure / rest, measure)
    return complex(np.sum(weights * values))


def fidelity_from_chi(chi: ChiMatrix, i: int, j: int, mask: Sequence[int]) -> complex:
    """
    Closed form of the (reduced) mean survival fidelity in terms of chi.

    Flagged factor a contributes (D_a^2 d(m_a, i_a) d(n_a, j_a) + t_a) / (D_a (D_a + 1)),
    an unflagged one t_a / D_a, with t_a[m, n] = Tr(E_m E_{i_a}^dag E_{j_a} E_n^dag).
    """
    basis = chi.basis
    factors = getattr(basis, "factors", [basis])
    mask = tuple(int(m) for m in mask)
    if len(mask) != len(factors):
        raise ConfigError(f"mask {mask} for {len(factors)} subsystems")
    i_multi = basis.unflatten(i) if hasattr(basis, "unflatten") else (i,)
    j_multi = basis.unflatten(j) if hasattr(basis, "unflatten") else (j,)

    weight = np.ones((1, 1), dtype=complex)
    for flagged, factor, ia, ja in zip(mask, factors, i_multi, j_multi):
        D = factor.D
        E = factor.elements
        middle = E[ia].conj().T @ E[ja]
        t = np.einsum("mab,bc,nac->mn", E, middle, E.conj())
        if flagged:
            t = t.copy()
            t[ia, ja] += D * D
            t /= D * (D + 1)
        else:
            t = t / D
        weight = np.kron(weight, t)
    return complex(np.sum(chi.chi * weight))


def exact_chi(ch: KrausChannel, basis: Basis) -> ChiMatrix:
    """
    chi from the channel's action on the d^2 matrix units.

    The Choi matrix satisfies J = V chi V^dag with V = [vec E_0, ..., vec E_{d^2-1}].
    """
    if ch.D != basis.D:
        raise ConfigError(f"channel in dimension {ch.D} and basis in dimension {basis.D}")
    J = choi_matrix(ch)
    V = basis.elements.reshape(len(basis), -1).T
    try:
        left = np.linalg.solve(V, J)
        chi = np.linalg.solve(V, left.conj().T).conj().T
    except np.linalg.LinAlgError as err:
        raise InvariantError("operator basis is singular") from err
    return ChiMatrix(basis, chi)


def chi_from_fidelities(
    fidelities: Mapping[Mask, complex], dims: Sequence[int], delta: int
) -> complex:
    """
    chi_ij = (1/d) sum_U (-1)^(N-|U|) prod_{a in U}(D_a + 1) G(U)

    :param fidelities: G(U) keyed by the binary mask of U, for every nonempty U
    :param delta: Kronecker delta of (i, j), the value of G for the empty set
    """
    dims = list(dims)
    N = len(dims)
    d = int(np.prod(dims))
    total = complex((-1) ** N * delta)
    for mask in product((0, 1), repeat=N):
        if not any(mask):
            continue
        if mask not in fidelities:
            raise ConfigError(f"missing fidelity for subsystem mask {mask}")
        factor = np.prod([D + 1 for D, m in zip(dims, mask) if m])
        total += (-1) ** (N - sum(mask)) * factor * fidelities[mask]
    return total / d


def all_fidelities(
    ch: KrausChannel, basis: Basis, i: int, j: int, designs: List[WeightedDesign]
) -> Dict[Mask, complex]:
    """G(U) for every nonempty subsystem set U"""
    return {
        mask: exact_reduced_fidelity(ch, basis, i, j, mask, designs)
        for mask in product((0, 1), repeat=len(designs))
        if any(mask)
    }


def two_design(d: int, big_dim: Optional[int] = None) -> WeightedDesign:
    """Uniform MUB design when d is a prime power, projected design otherwise"""
    if big_dim is None and is_prime_power(d):
        return mub_to_design(build_mub(d))
    return projected_design(d, big_dim or smallest_prime_power_above(d))


def _operators(seed: int, trial: int, d: int):
    rng = block_rng(seed, trial)
    return random_hermitian(d, rng), random_hermitian(d, rng)


def _channel_and_pairs(seed: int, trial: int, d: int, pairs: int):
    rng = block_rng(seed, trial)
    channel = standard_channels("random_cptp", d, [2, int(rng.integers(2 ** 31))])
    targets = [(0, 0)] + [tuple(int(x) for x in row) for row in rng.integers(0, d * d, (pairs, 2))]
    return channel, targets


def _design_average_trial(d, dims, seed, trial, big_dim, pairs):
    A, B = _operators(seed, trial, d)
    design = mub_to_design(build_mub(d))
    return abs(design_average(design, A, B) - haar_quadratic_average(A, B, d))


def _bipartite_traces(A, B, dims):
    D1, D2 = dims
    t1 = np.trace(A @ np.kron(np.eye(D1), partial_trace(B, dims, [0])))
    t2 = np.trace(A @ np.kron(partial_trace(B, dims, [1]), np.eye(D2)))
    return t1, t2


def _tensor_bipartite_trial(d, dims, seed, trial, big_dim, pairs):
    A, B = _operators(seed, trial, d)
    D1, D2 = dims
    t1, t2 = _bipartite_traces(A, B, dims)
    closed = (np.trace(A) * np.trace(B) + np.trace(A @ B) + t1 + t2) / (d * (D1 + 1) * (D2 + 1))
    return abs(design_average(tensor_design(factor_designs(d)), A, B) - closed)


def _haar_from_tensor_trial(d, dims, seed, trial, big_dim, pairs):
    A, B = _operators(seed, trial, d)
    D1, D2 = dims
    t1, t2 = _bipartite_traces(A, B, dims)
    tensor = design_average(tensor_design(factor_designs(d)), A, B)
    corrected = (D1 + 1) * (D2 + 1) / (d + 1) * tensor - (t1 + t2) / (d * (d + 1))
    return abs(haar_quadratic_average(A, B, d) - corrected)


def _tensor_general_trial(d, dims, seed, trial, big_dim, pairs):
    A, B = _operators(seed, trial, d)
    design = tensor_design(factor_designs(d))
    return abs(design_average(design, A, B) - tensor_average(A, B, dims))


def _projected_design_trial(d, dims, seed, trial, big_dim, pairs):
    A, B = _operators(seed, trial, d)
    design = projected_design(d, big_dim or smallest_prime_power_above(d))
    return abs(design_average(design, A, B) - haar_quadratic_average(A, B, d))


def _mean_fidelity_trial(d, dims, seed, trial, big_dim, pairs):
    channel, targets = _channel_and_pairs(seed, trial, d, pairs)
    basis = chi_basis(d)
    chi = exact_chi(channel, basis)
    design = two_design(d, big_dim)
    deviation = 0.0
    for i, j in targets:
        expected = (d * chi[i, j] + (i == j)) / (d + 1)
        deviation = max(deviation, abs(exact_mean_fidelity(channel, basis, i, j, design) - expected))
    return deviation


def _chi_bipartite_trial(d, dims, seed, trial, big_dim, pairs):
    channel, targets = _channel_and_pairs(seed, trial, d, pairs)
    basis = chi_basis(d)
    chi = exact_chi(channel, basis)
    designs = factor_designs(d)
    D1, D2 = dims
    deviation = 0.0
    for i, j in targets:
        g = all_fidelities(channel, basis, i, j, designs)
        combined = (
            g[(1, 1)] * (1 + D1) * (1 + D2) / d
            + (i == j) / d
            - g[(1, 0)] * (1 + D1) / d
            - g[(0, 1)] * (1 + D2) / d
        )
        deviation = max(deviation, abs(combined - chi[i, j]))
    return deviation


def _chi_general_trial(d, dims, seed, trial, big_dim, pairs):
    channel, targets = _channel_and_pairs(seed, trial, d, pairs)
    basis = chi_basis(d)
    chi = exact_chi(channel, basis)
    designs = factor_designs(d)
    deviation = 0.0
    for i, j in targets:
        combined = chi_from_fidelities(all_fidelities(channel, basis, i, j, designs), dims, i == j)
        deviation = max(deviation, abs(combined - chi[i, j]))
    return deviation


def _reduced_fidelity_trial(d, dims, seed, trial, big_dim, pairs):
    channel, targets = _channel_and_pairs(seed, trial, d, pairs)
    basis = chi_basis(d)
    chi = exact_chi(channel, basis)
    designs = factor_designs(d)
    deviation = 0.0
    for i, j in targets:
        for mask in product((0, 1), repeat=len(dims)):
            if all(mask) or not any(mask):
                continue
            exact = exact_reduced_fidelity(channel, basis, i, j, mask, designs)
            deviation = max(deviation, abs(exact - fidelity_from_chi(chi, i, j, mask)))
    return deviation


def _tensor_fidelity_trial(d, dims, seed, trial, big_dim, pairs):
    channel, targets = _channel_and_pairs(seed, trial, d, pairs)
    basis = chi_basis(d)
    chi = exact_chi(channel, basis)
    design = tensor_design(factor_designs(d))
    deviation = 0.0
    for i, j in targets:
        exact = exact_mean_fidelity(channel, basis, i, j, design)
        deviation = max(deviation, abs(exact - fidelity_from_chi(chi, i, j, (1,) * len(dims))))
    return deviation


def _haar_correction_trial(d, dims, seed, trial, big_dim, pairs):
    channel, targets = _channel_and_pairs(seed, trial, d, pairs)
    basis = chi_basis(d)
    designs = factor_designs(d)
    design = two_design(d, big_dim)
    D1, D2 = dims
    deviation = 0.0
    for i, j in targets:
        g = all_fidelities(channel, basis, i, j, designs)
        corrected = (
            g[(1, 1)] * (D1 + 1) * (D2 + 1) / (d + 1)
            + 2 * (i == j) / (d + 1)
            - g[(1, 0)] * (D1 + 1) / (d + 1)
            - g[(0, 1)] * (D2 + 1) / (d + 1)
        )
        exact = exact_mean_fidelity(channel, basis, i, j, design)
        deviation = max(deviation, abs(exact - corrected))
    return deviation


IDENTITIES: Dict[str, Callable] = {
    "eq3": _design_average_trial,
    "eq8": _tensor_bipartite_trial,
    "eq9": _haar_from_tensor_trial,
    "eq10": _tensor_general_trial,
    "eq12": _mean_fidelity_trial,
    "eq13": _chi_bipartite_trial,
    "chifidN": _chi_general_trial,
    "nonuniform2design": _projected_design_trial,
    "appendixA-F1": _reduced_fidelity_trial,
    "tensor-fidelity": _tensor_fidelity_trial,
    "haar-correction": _haar_correction_trial,
}

BIPARTITE = ("eq8", "eq9", "eq13", "haar-correction")

# descriptive spellings accepted on input
ALIASES: Dict[str, str] = {
    "design-average": "eq3",
    "tensor-bipartite": "eq8",
    "haar-from-tensor": "eq9",
    "tensor-general": "eq10",
    "mean-fidelity": "eq12",
    "chi-bipartite": "eq13",
    "chi-general": "chifidN",
    "projected-design": "nonuniform2design",
    "reduced-fidelity": "appendixA-F1",
}


def identity_name(name: str) -> str:
    """Canonical identity name for a name or alias"""
    name = ALIASES.get(name, name)
    if name not in IDENTITIES:
        raise UnknownIdentity(f"unknown identity '{name}', expected one of {', '.join(IDENTITIES)}")
    return name


def check_identity(
    name: str,
    d: int,
    trials: int = 10,
    seed: int = 0,
    big_dim: Optional[int] = None,
    pairs: int = 3,
    n_jobs: Optional[int] = None,
) -> IdentityReport:
    """
    Evaluate both sides of a named identity on `trials` random operator pairs or channels.

    Channel identities draw one random channel per trial and check (0, 0) plus `pairs` random
    index pairs.
    """
    name = identity_name(name)
    if trials < 1:
        raise ConfigError("at least one trial is required")
    dims = prime_power_factors(d)
    if name == "eq3":
        prime_power(d)
    if name in BIPARTITE and len(dims) != 2:
        raise ConfigError(f"{name} requires a dimension with two prime-power factors, got {d}")
    if name == "appendixA-F1" and len(dims) < 2:
        raise ConfigError(f"{name} requires a composite dimension, got {d}")
    if big_dim is not None and name not in ("nonuniform2design", "eq12", "haar-correction"):
        raise ConfigError(f"{name} does not use an embedding dimension")
    if big_dim is not None:
        projected_design(d, big_dim)

    logger.debug("Identity   : {}", name)
    logger.debug("Dimensions : {}", dims)
    logger.debug("Trials     : {}", trials)

    check = IDENTITIES[name]
    n_jobs = n_jobs_from_env() if n_jobs is None else n_jobs
    deviations = Parallel(n_jobs=n_jobs)(
        delayed(check)(d, dims, seed, trial, big_dim, pairs) for trial in range(trials)
    )
    report = IdentityReport(
        name=name,
        dims=tuple(dims) if big_dim is None else (d, big_dim),
        trials=trials,
        max_deviation=float(max(deviations)),
        tolerance=IDENTITY_TOL,
    )
    logger.info(
        "{} in dimension {}: max deviation {:.3e} over {} trials",
        name,
        d,
        report.max_deviation,
        trials,
    )
    return report
