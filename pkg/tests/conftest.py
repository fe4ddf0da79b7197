"""conftest"""
from typing import Dict

import pytest

from pyseqpt.model.channels import chi_basis
from pyseqpt.model.designs import build_mub, design_for_scheme, factor_designs, projected_design
from pyseqpt.model.structures import KrausChannel, ProductOperatorBasis, WeightedDesign
from tests.utils import channel_panel


@pytest.fixture(scope="session")
def mub_design_2() -> WeightedDesign:
    """Uniform MUB design in dimension 2"""
    return design_for_scheme("primepower", 2)


@pytest.fixture(scope="session")
def mub_design_3() -> WeightedDesign:
    """Uniform MUB design in dimension 3"""
    return design_for_scheme("primepower", 3)


@pytest.fixture(scope="session")
def tensor_design_6() -> WeightedDesign:
    """Tensor design of GF(2) and GF(3) MUB designs"""
    return design_for_scheme("tensor", 6)


@pytest.fixture(scope="session")
def projected_design_6() -> WeightedDesign:
    """Design in dimension 6 projected from dimension 7"""
    return projected_design(6, 7)


@pytest.fixture(scope="session")
def factor_designs_6():
    return factor_designs(6)


@pytest.fixture(scope="session")
def basis_6() -> ProductOperatorBasis:
    return chi_basis(6)


@pytest.fixture(scope="session")
def panel_2() -> Dict[str, KrausChannel]:
    return channel_panel(2)


@pytest.fixture(scope="session")
def panel_3() -> Dict[str, KrausChannel]:
    return channel_panel(3)


@pytest.fixture(scope="session")
def panel_6() -> Dict[str, KrausChannel]:
    return channel_panel(6)


@pytest.fixture(scope="session")
def mub_4():
    return build_mub(4)
