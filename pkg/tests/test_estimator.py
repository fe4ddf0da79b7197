"""Test the Monte Carlo estimator"""
from functools import reduce
from itertools import product

import numpy as np
import pytest

from pyseqpt.exceptions import ConfigError
from pyseqpt.model.channels import chi_basis, standard_channels, weyl_basis
from pyseqpt.model.designs import design_sample
from pyseqpt.model.estimator import (
    SeqptEstimator,
    coefficient_C,
    combine_counts,
    epsilon_for_shots,
    estimate_chi_element,
    estimate_radius,
    invert_mean_fidelity,
    outcome_distribution,
    outcome_range,
    plan_shots,
    simulate_shot,
)
from pyseqpt.model.oracle import exact_chi
from pyseqpt.model.structures import CountTable, ShotOutcome, survival_patterns
from pyseqpt.util import block_rng
from tests.utils import channel_panel, sample_pairs

SHOTS_ONE_BLOCK = 256


def test_coefficient_C():
    """Survival weights of the bipartite estimator"""
    assert coefficient_C((0, 0), [2, 3]) == 0
    assert coefficient_C((1, 1), [2, 3]) == pytest.approx(5 / 6)
    assert coefficient_C((1, 0), [2, 3]) == pytest.approx(-1 / 2)
    assert coefficient_C((0, 1), [2, 3]) == pytest.approx(-2 / 3)
    assert coefficient_C((1,), [5]) == pytest.approx(6 / 5)
    with pytest.raises(ConfigError):
        coefficient_C((1,), [2, 3])


def test_coefficient_C_three_factors():
    """N = 3 signs alternate with the number of surviving subsystems"""
    dims = [2, 3, 5]
    assert coefficient_C((1, 1, 1), dims) == pytest.approx(31 / 30)
    assert coefficient_C((1, 1, 0), dims) == pytest.approx(-5 / 30)
    assert coefficient_C((1, 0, 0), dims) == pytest.approx(3 / 30)
    assert coefficient_C((0, 0, 1), dims) == pytest.approx(6 / 30)
    assert coefficient_C((0, 0, 0), dims) == 0


def test_coefficient_C_bounded():
    """|C_r| <= 1 + 1/d < 4^N for up to four factors of dimension at most 9"""
    prime_powers = (2, 3, 4, 5, 7, 8, 9)
    for N in range(1, 5):
        for dims in product(prime_powers, repeat=N):
            d = int(np.prod(dims))
            for r in survival_patterns(N):
                C = abs(coefficient_C(r, dims))
                assert C <= 1 + 1 / d + 1e-12 and C < 4 ** N, f"{dims} {r}: {C}"


def test_combine_counts():
    """Linear combination of the count table"""
    table = CountTable(2)
    for _ in range(100):
        table.add(ShotOutcome(1, (1, 1)))
    assert combine_counts(table, [2, 3]) == pytest.approx(5 / 6)

    balanced = CountTable(2, np.array([[7, 3, 5, 9], [7, 3, 5, 9]]))
    assert combine_counts(balanced, [2, 3]) == pytest.approx(0)

    with pytest.raises(ConfigError):
        combine_counts(CountTable(2), [2, 3])


def test_count_table_merge():
    """Merging is associative and commutative"""
    rng = block_rng(21)
    tables = [CountTable(2, rng.integers(0, 50, (2, 4))) for _ in range(4)]
    forward = reduce(CountTable.merge, tables)
    backward = reduce(CountTable.merge, tables[::-1])
    nested = tables[0].merge(tables[1].merge(tables[2].merge(tables[3])))
    assert forward == backward == nested
    assert forward.shots == sum(t.shots for t in tables)
    with pytest.raises(ConfigError):
        tables[0].merge(CountTable(1))


def test_combine_counts_prime_power():
    """N = 1 reduces to ((d+1) F - delta) / d with F = (M+ - M-) / M"""
    table = CountTable(1, np.array([[60, 10], [25, 5]]))
    survival = (10 - 5) / 100
    for delta in (0, 1):
        expected = invert_mean_fidelity(survival, 3, delta)
        assert combine_counts(table, [3], delta) == pytest.approx(expected)


@pytest.mark.parametrize(
    "epsilon, scheme, dims, expected",
    [
        (0.05, "primepower", None, 738),
        (0.1, "tensor", [2, 3], 513),
        (0.1, "tensor", [2, 3, 5], 47218),
    ],
)
def test_plan_shots(epsilon, scheme, dims, expected):
    """Ceilings of the Hoeffding shot bounds at p = 0.05"""
    assert plan_shots(epsilon, 0.05, scheme, dims) == expected


def test_plan_shots_loglog():
    """Dimension-only estimate 2 (ln d)^4 ln(2/p) / eps^2"""
    expected = int(np.ceil(2 * np.log(30) ** 4 * np.log(40) / 0.01))
    assert plan_shots(0.1, 0.05, "tensor", [2, 3, 5], bound="loglog") == expected


def test_plan_shots_errors():
    """Out-of-range epsilon, probability and missing dims"""
    with pytest.raises(ConfigError):
        plan_shots(0, 0.05, "primepower")
    with pytest.raises(ConfigError):
        plan_shots(0.1, 1.0, "primepower")
    with pytest.raises(ConfigError):
        plan_shots(0.1, 0.05, "tensor")
    with pytest.raises(ConfigError):
        plan_shots(0.1, 0.05, "haar")


def test_epsilon_for_shots():
    """Radius at the planned shot count is at most the target"""
    shots = plan_shots(0.05, 0.05, "tensor", [2, 3])
    assert epsilon_for_shots(shots, 0.05, "tensor", [2, 3]) <= 0.05
    assert epsilon_for_shots(shots - 1, 0.05, "tensor", [2, 3]) > 0.05


def test_outcome_distribution_normalized(tensor_design_6, panel_6, basis_6):
    """Probabilities are nonnegative and sum to one per input"""
    for part in ("re", "im"):
        dist = outcome_distribution(panel_6["random_cptp"], basis_6, 4, 17, tensor_design_6, part)
        assert dist.shape == (72, 2, 4)
        assert dist.min() >= 0
        assert np.allclose(dist.sum(axis=(1, 2)), 1)


def test_simulate_shot_identity(mub_design_3):
    """Identity channel at (0, 0): always (+1, survived)"""
    channel = standard_channels("identity", 3)
    rng = block_rng(1)
    for index in (0, 4, 11):
        sample = design_sample(mub_design_3, index)
        for part in ("re", "im"):
            outcome = simulate_shot(channel, chi_basis(3), 0, 0, sample, part, rng)
            assert outcome.key == "+1"


def test_simulate_shot_distribution(mub_design_2):
    """Z flips |+>; completely depolarized |0> survives half the time"""
    basis = weyl_basis(2)
    identity = standard_channels("identity", 2)
    plus = mub_design_2.states[2]
    dist = outcome_distribution(identity, basis, 1, 1, mub_design_2)
    assert dist[2, :, 1].sum() == pytest.approx(0), "Z|+> is orthogonal to |+>"

    depolarizing = standard_channels("depolarizing", 2, [1.0])
    dist = outcome_distribution(depolarizing, basis, 0, 0, mub_design_2)
    assert dist[0, :, 1].sum() == pytest.approx(0.5)
    assert np.allclose(plus, np.array([1, 1]) / np.sqrt(2))


@pytest.mark.parametrize(
    "scheme, d",
    [
        ("primepower", 2),
        ("primepower", 3),
        ("tensor", 2),
        ("tensor", 6),
        ("projected", 2),
        ("projected", 3),
        ("projected", 6),
    ],
)
def test_exact_mode_matches_oracle(scheme, d):
    """Noiseless estimates equal the reconstructed chi entries"""
    basis = chi_basis(d)
    pairs = sample_pairs(d, 12, seed=d)
    for name, channel in channel_panel(d).items():
        chi = exact_chi(channel, basis).chi
        estimator = SeqptEstimator(channel, scheme, seed=0, n_jobs=1)
        for i, j in pairs:
            deviation = abs(estimator.exact(i, j) - chi[i, j])
            assert deviation <= 1e-9, f"{scheme} {name} ({i}, {j}): {deviation}"


def test_exact_mode_result(panel_6):
    """Identity channel at (0, 0) is 1, with zero shots and radius"""
    result = estimate_chi_element(panel_6["identity"], "tensor", 0, 0, mode="exact", n_jobs=1)
    assert result.estimate == pytest.approx(1)
    assert result.shots == 0
    assert result.epsilon_bound == 0.0
    assert result.counts == {}


def test_montecarlo_close_to_exact(panel_3):
    """Off-diagonal element of a random channel within a generous radius"""
    channel = panel_3["random_cptp"]
    result = estimate_chi_element(channel, "primepower", 1, 4, shots=40000, seed=3, n_jobs=1)
    exact = exact_chi(channel, chi_basis(3)).chi[1, 4]
    assert result.shots == 40000
    assert set(result.counts) == {"re", "im"}
    assert abs(result.estimate.real - exact.real) <= 0.05
    assert abs(result.estimate.imag - exact.imag) <= 0.05


def test_reproducible_counts(panel_6):
    """Counts depend on the seed only, not on the number of workers"""
    channel = panel_6["depolarizing"]
    serial = SeqptEstimator(channel, "tensor", seed=9, n_jobs=1).count(3, 3, "re", 1000)
    threaded = SeqptEstimator(channel, "tensor", seed=9, n_jobs=2).count(3, 3, "re", 1000)
    other = SeqptEstimator(channel, "tensor", seed=10, n_jobs=1).count(3, 3, "re", 1000)
    assert serial == threaded
    assert serial.shots == 1000
    assert serial != other


def test_shot_prefix_stability(panel_2):
    """The first shots of a longer run are the shots of a shorter run"""
    estimator = SeqptEstimator(panel_2["random_cptp"], "primepower", seed=4, n_jobs=1)
    short = estimator.count(0, 0, "re", SHOTS_ONE_BLOCK)
    longer = estimator.count(0, 0, "re", SHOTS_ONE_BLOCK + 1)
    assert longer.shots == short.shots + 1
    assert (longer.counts - short.counts).sum() == 1
    assert (longer.counts >= short.counts).all()


def test_shot_budget(panel_3):
    """Even split off the diagonal, all real on it, eps plans per part"""
    estimator = SeqptEstimator(panel_3["depolarizing"], "primepower", seed=1, n_jobs=1)
    off = estimator.run(1, 2, shots=1001)
    assert sum(off.counts["re"].values()) == 501
    assert sum(off.counts["im"].values()) == 500
    diagonal = estimator.run(2, 2, shots=1001)
    assert set(diagonal.counts) == {"re"}
    planned = estimator.run(1, 2, epsilon=0.1)
    per_part = plan_shots(0.1, 0.05, "primepower")
    assert planned.shots == 2 * per_part
    assert planned.epsilon_bound == pytest.approx(estimate_radius(per_part, 0.05, "primepower", [3]))
    assert planned.epsilon_bound > 0.1, "per-shot values span 2 (d+1)/d, wider than the plan assumes"


def test_run_errors(panel_3):
    """Budget and index validation"""
    estimator = SeqptEstimator(panel_3["identity"], "primepower", n_jobs=1)
    with pytest.raises(ConfigError):
        estimator.run(0, 0)
    with pytest.raises(ConfigError):
        estimator.run(0, 0, shots=10, epsilon=0.1)
    with pytest.raises(ConfigError):
        estimator.run(0, 0, shots=10, mode="exact")
    with pytest.raises(ConfigError):
        estimator.run(0, 1, shots=1)
    with pytest.raises(ConfigError):
        estimator.run(0, 9, shots=10)
    with pytest.raises(ConfigError):
        SeqptEstimator(panel_3["identity"], "haar")


def test_coverage(panel_6):
    """|estimate - exact| <= eps in at least 95 % of repetitions"""
    channel = panel_6["depolarizing"]
    estimator = SeqptEstimator(channel, "tensor", n_jobs=1)
    exact = estimator.exact(0, 0)
    hits = 0
    repetitions = 200
    for seed in range(repetitions):
        estimator.seed = seed
        result = estimator.run(0, 0, epsilon=0.05, confidence=0.95)
        hits += abs(result.estimate - exact) <= 0.05
    assert hits >= 0.95 * repetitions, f"coverage {hits / repetitions}"


def test_outcome_range():
    """Twice the largest survival weight"""
    assert outcome_range([2]) == pytest.approx(3)
    assert outcome_range([2, 3]) == pytest.approx(5 / 3)
    assert outcome_range([2, 3, 5]) == pytest.approx(31 / 15)


def test_estimate_radius():
    """The tensor radius matches the planner, the prime-power radius follows the outcome range"""
    shots = plan_shots(0.05, 0.05, "tensor", [2, 3])
    assert estimate_radius(shots, 0.05, "tensor", [2, 3]) == pytest.approx(
        epsilon_for_shots(shots, 0.05, "tensor", [2, 3])
    )
    shots = plan_shots(0.05, 0.05, "primepower")
    assert estimate_radius(shots, 0.05, "primepower", [2]) == pytest.approx(
        3 * epsilon_for_shots(shots, 0.05, "primepower")
    )
    with pytest.raises(ConfigError):
        estimate_radius(0, 0.05, "tensor", [2, 3])


def test_radius_coverage_primepower(panel_2):
    """The reported radius holds for the prime-power scheme on an off-diagonal element"""
    estimator = SeqptEstimator(panel_2["identity"], "primepower", n_jobs=1)
    exact = estimator.exact(0, 3)
    misses = 0
    repetitions = 200
    for seed in range(repetitions):
        estimator.seed = seed
        result = estimator.run(0, 3, epsilon=0.05, confidence=0.95)
        misses += abs(result.estimate.real - exact.real) > result.epsilon_bound
    assert misses <= 0.05 * repetitions, f"{misses} misses in {repetitions}"


def test_unbiased(panel_3):
    """Mean estimate over many seeds within 4 sigma of exact chi"""
    channel = panel_3["random_cptp"]
    estimator = SeqptEstimator(channel, "primepower", n_jobs=1)
    exact = exact_chi(channel, chi_basis(3)).chi[1, 4]
    estimates = []
    for seed in range(300):
        estimator.seed = seed
        estimates.append(estimator.run(1, 4, shots=400).estimate)
    estimates = np.array(estimates)
    for part in (np.real, np.imag):
        values = part(estimates)
        sigma = values.std(ddof=1) / np.sqrt(len(values))
        assert abs(values.mean() - part(exact)) <= 4 * sigma, f"{values.mean()} vs {part(exact)}"


def test_counts_independent_of_workers(panel_6):
    """Several blocks aggregate to the same table for any number of workers"""
    channel = panel_6["random_cptp"]
    shots = 5 * SHOTS_ONE_BLOCK + 17
    tables = [
        SeqptEstimator(channel, "tensor", seed=13, n_jobs=n_jobs).count(4, 9, "im", shots)
        for n_jobs in (1, 2, 3)
    ]
    assert tables[0] == tables[1] == tables[2]
    assert tables[0].shots == shots


def test_exact_mode_all_pairs_d6(panel_6, basis_6):
    """Every chi element of a random channel in d = 6"""
    channel = panel_6["random_cptp"]
    chi = exact_chi(channel, basis_6).chi
    estimator = SeqptEstimator(channel, "tensor", n_jobs=1)
    deviation = max(
        abs(estimator.exact(i, j) - chi[i, j]) for i, j in product(range(36), repeat=2)
    )
    assert deviation <= 1e-9, deviation


def test_exact_mode_d12():
    """Fifty sampled elements in d = 12"""
    channel = standard_channels("random_cptp", 12, [2, 5])
    chi = exact_chi(channel, chi_basis(12)).chi
    estimator = SeqptEstimator(channel, "tensor", n_jobs=1)
    for i, j in sample_pairs(12, 48, seed=12):
        deviation = abs(estimator.exact(i, j) - chi[i, j])
        assert deviation <= 1e-9, f"({i}, {j}): {deviation}"
