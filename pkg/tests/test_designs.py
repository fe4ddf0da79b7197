"""Test MUB construction and weighted designs"""
import numpy as np
import pytest

from pyseqpt.exceptions import ConfigError, DimensionOrder, NotPrimePower
from pyseqpt.model.designs import (
    build_mub,
    design_average,
    design_for_scheme,
    draw_indices,
    haar_quadratic_average,
    mub_to_design,
    projected_design,
    sample_input,
    tensor_design,
    verify_design,
)
from pyseqpt.model.structures import WeightedDesign
from pyseqpt.util import block_rng
from tests.utils import ket


@pytest.mark.parametrize("D", [2, 3, 4, 5, 7, 8, 9, 11, 13, 16])
def test_build_mub(D):
    """D+1 orthonormal and mutually unbiased bases"""
    mub = build_mub(D)
    assert len(mub) == D + 1
    ortho, unbiased = mub.max_deviation()
    assert ortho <= 1e-10, f"orthonormality off by {ortho}"
    assert unbiased <= 1e-10, f"unbiasedness off by {unbiased}"
    assert np.allclose(mub.bases[0], np.eye(D)), "basis 0 is computational"


def test_build_mub_qubit():
    """Computational, X and Y eigenbases"""
    mub = build_mub(2)
    expected = [
        [ket(2, 0), ket(2, 1)],
        [np.array([1, 1]) / np.sqrt(2), np.array([1, -1]) / np.sqrt(2)],
        [np.array([1, 1j]) / np.sqrt(2), np.array([1, -1j]) / np.sqrt(2)],
    ]
    for M, basis in enumerate(expected):
        for k, state in enumerate(basis):
            overlap = abs(np.vdot(state, mub.bases[M, k]))
            assert overlap == pytest.approx(1), f"state {k} of basis {M}"


@pytest.mark.parametrize("D", [3, 4])
def test_phase_table(D):
    """Components of the non-computational bases are e^{i alpha} / sqrt(D)"""
    mub = build_mub(D)
    for M in range(1, D + 1):
        expected = np.exp(1j * mub.phase_table[M]).T / np.sqrt(D)
        assert np.allclose(mub.bases[M], expected)


def test_build_mub_is_read_only():
    """Cached bases cannot be modified"""
    with pytest.raises(ValueError):
        build_mub(3).bases[0, 0, 0] = 2


def test_build_mub_not_prime_power():
    """No construction for d = 6"""
    with pytest.raises(NotPrimePower):
        build_mub(6)


@pytest.mark.parametrize("D, size", [(2, 6), (3, 12), (4, 20)])
def test_mub_to_design(D, size):
    """Uniform weights over D(D+1) states"""
    design = mub_to_design(build_mub(D))
    assert len(design) == size
    assert np.allclose(design.probabilities, 1 / size)
    assert design.scheme == "uniform-MUB"
    assert design.survival_meta[D] == ((1, 0),), "basis-major ordering"


def test_design_average_qubit(mub_design_2):
    """A = B = |0><0| gives 1/3 on both sides"""
    P0 = np.diag([1.0, 0.0]).astype(complex)
    assert design_average(mub_design_2, P0, P0) == pytest.approx(1 / 3)
    assert haar_quadratic_average(P0, P0, 2) == pytest.approx(1 / 3)


def test_haar_quadratic_average():
    """Closed form for a few operator pairs"""
    eye = np.eye(3)
    assert haar_quadratic_average(eye, eye, 3) == pytest.approx(1)
    P0 = np.diag([1.0, 0.0])
    P1 = np.diag([0.0, 1.0])
    assert haar_quadratic_average(P0, P1, 2) == pytest.approx(1 / 6)
    with pytest.raises(ConfigError):
        haar_quadratic_average(P0, eye, 2)


def test_tensor_design(tensor_design_6):
    """72 product states in d = 6 with uniform weights"""
    assert len(tensor_design_6) == 72
    assert tensor_design_6.factor_dims == [2, 3]
    assert np.allclose(tensor_design_6.probabilities, 1 / 72)
    for n in (0, 13, 71):
        a, b = tensor_design_6.factor_index[n]
        expected = np.kron(tensor_design_6.factor_states[0][a], tensor_design_6.factor_states[1][b])
        assert np.allclose(tensor_design_6.states[n], expected)
        assert len(tensor_design_6.survival_meta[n]) == 2


def test_tensor_design_sizes():
    """D(D+1) states per factor; one factor is returned unchanged"""
    four = mub_to_design(build_mub(4))
    three = mub_to_design(build_mub(3))
    assert len(tensor_design([four, three])) == 240
    assert tensor_design([three]) is three
    with pytest.raises(ConfigError):
        tensor_design([])


def test_projected_design(projected_design_6):
    """6 computational states at 1/42 and 49 projected states at 36/(49 * 42)"""
    design = projected_design_6
    assert len(design) == 55
    assert np.allclose(design.probabilities[:6], 1 / 42)
    assert np.allclose(design.probabilities[6:], 36 / (49 * 42))
    assert design.probabilities.sum() == pytest.approx(1)
    assert design.survival_meta[0] == ((0, 0),)
    assert design.survival_meta[6] == ((1, 0),)
    assert np.allclose(np.linalg.norm(design.states, axis=1), 1)


def test_projected_design_errors():
    """Embedding dimension must be a prime power above d"""
    with pytest.raises(DimensionOrder):
        projected_design(6, 5)
    with pytest.raises(NotPrimePower):
        projected_design(6, 10)


def test_design_for_scheme():
    """Scheme dispatch and its errors"""
    assert len(design_for_scheme("projected", 6)) == 55, "D = 7 chosen automatically"
    assert len(design_for_scheme("projected", 6, 8)) == 6 + 64
    with pytest.raises(NotPrimePower, match="6 is not a prime power"):
        design_for_scheme("primepower", 6)
    with pytest.raises(ConfigError):
        design_for_scheme("tensor", 6, 7)
    with pytest.raises(ConfigError):
        design_for_scheme("haar", 6)


def test_verify_design(mub_design_3, projected_design_6, tensor_design_6):
    """2-designs reproduce the Haar average; tensor designs are exempt"""
    mub_report = verify_design(mub_design_3, trials=20)
    assert mub_report.passed and mub_report.max_deviation <= 1e-9
    projected_report = verify_design(projected_design_6, trials=20)
    assert projected_report.passed and projected_report.max_deviation <= 1e-9
    tensor_report = verify_design(tensor_design_6, trials=5)
    assert tensor_report.exempt and tensor_report.passed
    assert tensor_report.max_deviation > 1e-9, "a tensor design is not a 2-design"


@pytest.mark.parametrize("d, D", [(10, 11), (12, 13)])
def test_projected_design_larger(d, D):
    """d + D^2 states, weights 1/Z and d^2/(Z D^2), exact 2-design"""
    design = projected_design(d, D)
    Z = d * (d + 1)
    assert len(design) == d + D * D
    assert np.allclose(design.probabilities[:d], 1 / Z)
    assert np.allclose(design.probabilities[d:], d * d / (Z * D * D))
    report = verify_design(design, trials=20)
    assert report.passed and report.max_deviation <= 1e-9, report.max_deviation


def test_sampling_frequencies(mub_design_2):
    """Every state of the qubit design is drawn with frequency 1/6"""
    n = 60000
    indices = draw_indices(mub_design_2, block_rng(11).random(n))
    frequencies = np.bincount(indices, minlength=6) / n
    sigma = np.sqrt((1 / 6) * (5 / 6) / n)
    assert np.abs(frequencies - 1 / 6).max() <= 4 * sigma


def test_sampling_projected_weights(projected_design_6):
    """Computational states carry total weight 6/42"""
    n = 60000
    indices = draw_indices(projected_design_6, block_rng(12).random(n))
    frequency = np.mean(indices < 6)
    sigma = np.sqrt((1 / 7) * (6 / 7) / n)
    assert abs(frequency - 1 / 7) <= 4 * sigma


def test_sample_single_state_design():
    """A one-state design always yields that state"""
    design = WeightedDesign(
        d=2,
        states=np.array([[1, 0]], dtype=complex),
        probabilities=np.array([1.0]),
        survival_meta=[((0, 0),)],
        factor_dims=[2],
        scheme="projected",
        factor_states=[np.array([[1, 0]], dtype=complex)],
        factor_index=np.zeros((1, 1), dtype=np.int64),
    )
    rng = block_rng(0)
    for _ in range(5):
        sample = sample_input(design, rng)
        assert sample.index == 0
        assert sample.survival_meta == ((0, 0),)
