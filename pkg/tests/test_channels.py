"""Test operator bases, channels and chi matrices"""
import numpy as np
import pytest

from pyseqpt.exceptions import ChannelInvariantError, ConfigError, DimensionTooSmall
from pyseqpt.model.channels import (
    apply_channel,
    chi_apply,
    choi_matrix,
    chi_basis,
    kraus_to_chi,
    modified_apply,
    partial_trace,
    product_basis,
    standard_channels,
    weyl_basis,
)
from pyseqpt.model.oracle import exact_chi
from pyseqpt.model.structures import KrausChannel
from tests.utils import channel_panel, random_density_matrices


@pytest.mark.parametrize("D", [2, 3, 4, 5])
def test_weyl_basis(D):
    """Tr(E_m E_n^dag) = D delta_mn and E_0 = 1"""
    basis = weyl_basis(D)
    basis.check()
    E = basis.elements
    gram = np.einsum("mab,nab->mn", E, E.conj())
    assert np.allclose(gram, D * np.eye(D * D))
    assert np.allclose(basis.element(0), np.eye(D))


def test_weyl_basis_qubit():
    """Paulis up to phase: index a*D + b is X^a Z^b"""
    basis = weyl_basis(2)
    X = np.array([[0, 1], [1, 0]])
    Z = np.diag([1, -1])
    assert np.allclose(basis.element(1), Z)
    assert np.allclose(basis.element(2), X)
    assert np.allclose(basis.element(3), X @ Z)
    with pytest.raises(ConfigError):
        basis.element(4)


def test_product_basis():
    """Mixed-radix indexing, factor 1 most significant"""
    basis = chi_basis(6)
    assert basis.dims == [2, 3]
    assert len(basis) == 36
    assert basis.unflatten(basis.flatten((2, 7))) == (2, 7)
    expected = np.kron(weyl_basis(2).element(2), weyl_basis(3).element(7))
    assert np.allclose(basis.element(2 * 9 + 7), expected)
    assert product_basis([2, 3]) is product_basis((2, 3))


def test_apply_channel_examples():
    """Identity, completely depolarizing and unitary channels"""
    rho = random_density_matrices(3, 1, seed=4)[0]
    assert np.allclose(apply_channel(standard_channels("identity", 3), rho), rho)
    assert np.allclose(apply_channel(standard_channels("depolarizing", 3, [1.0]), rho), np.eye(3) / 3)
    U = standard_channels("random_unitary", 3, [5]).kraus[0]
    unitary = standard_channels("unitary", 3, [U])
    assert np.allclose(apply_channel(unitary, rho), U @ rho @ U.conj().T)


def test_apply_channel_dimension_mismatch():
    """Operator and channel dimensions must agree"""
    with pytest.raises(ConfigError):
        apply_channel(standard_channels("identity", 3), np.eye(2))


def test_modified_apply():
    """E(E_i^dag rho E_j) for a few index pairs"""
    basis = weyl_basis(2)
    identity = standard_channels("identity", 2)
    rho = np.diag([1.0, 0.0]).astype(complex)
    depolarizing = standard_channels("depolarizing", 2, [0.4])
    assert np.allclose(modified_apply(depolarizing, basis, 0, 0, rho), apply_channel(depolarizing, rho))
    E3 = basis.element(3)
    assert np.allclose(modified_apply(identity, basis, 3, 3, rho), E3.conj().T @ rho @ E3)
    # X^dag |0><0| = |1><0|
    expected = np.array([[0, 0], [1, 0]])
    assert np.allclose(modified_apply(identity, basis, 2, 0, rho), expected)


def test_kraus_to_chi_examples():
    """Identity, completely depolarizing and Weyl unitaries"""
    basis = chi_basis(3)
    chi = kraus_to_chi(standard_channels("identity", 3), basis).chi
    expected = np.zeros((9, 9))
    expected[0, 0] = 1
    assert np.allclose(chi, expected)

    chi = kraus_to_chi(standard_channels("depolarizing", 3, [1.0]), basis).chi
    assert np.allclose(chi, np.eye(9) / 9)

    chi = kraus_to_chi(standard_channels("weyl", 3, [5]), basis).chi
    expected = np.zeros((9, 9))
    expected[5, 5] = 1
    assert np.allclose(chi, expected)


def test_depolarizing_limits():
    """Strength 0 is the identity, strength out of range is rejected"""
    rho = random_density_matrices(2, 1, seed=1)[0]
    assert np.allclose(apply_channel(standard_channels("depolarizing", 2, [0.0]), rho), rho)
    standard_channels("depolarizing", 2, [4 / 3])
    with pytest.raises(ConfigError):
        standard_channels("depolarizing", 2, [1.5])


def test_random_cptp():
    """Rank-3 random channel is trace preserving and reproducible"""
    a = standard_channels("random_cptp", 4, [3, 7])
    b = standard_channels("random_cptp", 4, [3, 7])
    assert a.rank == 3
    assert np.allclose(a.kraus, b.kraus)
    completeness = np.einsum("kba,kbc->ac", a.kraus.conj(), a.kraus)
    assert np.allclose(completeness, np.eye(4))


def test_standard_channel_errors():
    """Unknown names and tiny dimensions"""
    with pytest.raises(ConfigError):
        standard_channels("amplitude_damping", 2)
    with pytest.raises(DimensionTooSmall):
        standard_channels("identity", 1)
    with pytest.raises(ConfigError):
        standard_channels("random_cptp", 2, [5, 0])


def test_kraus_invariants():
    """Non trace-preserving and misshaped Kraus sets"""
    with pytest.raises(ChannelInvariantError, match="trace preservation violated"):
        KrausChannel(2, [np.eye(2), np.eye(2)])
    with pytest.raises(ChannelInvariantError, match="kraus shape mismatch"):
        KrausChannel(2, [np.eye(3)])


@pytest.mark.parametrize("d", [2, 3, 4, 6])
def test_chi_round_trip(d):
    """sum chi_mn E_m rho E_n^dag reproduces the Kraus action"""
    basis = chi_basis(d)
    rhos = random_density_matrices(d, 50, seed=d)
    for name, channel in channel_panel(d).items():
        chi = kraus_to_chi(channel, basis)
        chi.check()
        assert np.allclose(chi_apply(chi, rhos), apply_channel(channel, rhos), atol=1e-9), name


@pytest.mark.parametrize("d", [2, 3, 6])
def test_kraus_to_chi_matches_exact_chi(d):
    """Kraus coefficients and the Choi reconstruction agree"""
    basis = chi_basis(d)
    for name, channel in channel_panel(d).items():
        deviation = np.abs(kraus_to_chi(channel, basis).chi - exact_chi(channel, basis).chi).max()
        assert deviation <= 1e-9, f"{name}: {deviation}"


@pytest.mark.parametrize("d", [2, 3, 4, 6])
def test_kraus_to_chi_random_channels(d):
    """Twenty random channels of mixed rank per dimension"""
    basis = chi_basis(d)
    for seed in range(20):
        channel = standard_channels("random_cptp", d, [1 + seed % 4, seed])
        deviation = np.abs(kraus_to_chi(channel, basis).chi - exact_chi(channel, basis).chi).max()
        assert deviation <= 1e-9, f"seed {seed}: {deviation}"


def test_partial_trace():
    """Tr_2(A x B) = A Tr B, Tr_1(A x B) = Tr A B"""
    A = random_density_matrices(2, 1, seed=2)[0]
    B = random_density_matrices(3, 1, seed=3)[0]
    AB = np.kron(A, B)
    assert np.allclose(partial_trace(AB, [2, 3], [1]), A)
    assert np.allclose(partial_trace(AB, [2, 3], [0]), B)
    assert np.allclose(partial_trace(AB, [2, 3], [0, 1]), [[1]])
    with pytest.raises(ConfigError):
        partial_trace(AB, [2, 3], [2])


@pytest.mark.parametrize("d", [2, 3])
def test_choi_matrix(d):
    """Identity gives the unnormalized maximally entangled projector; trace over outputs is 1"""
    omega = np.eye(d).reshape(-1)
    assert np.allclose(choi_matrix(standard_channels("identity", d)), np.outer(omega, omega))
    for name, channel in channel_panel(d).items():
        J = choi_matrix(channel)
        assert np.linalg.eigvalsh(J).min() >= -1e-9, name
        assert np.allclose(partial_trace(J, [d, d], [0]), np.eye(d)), name
