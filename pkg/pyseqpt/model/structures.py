"""Datatypes"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Dict, List, Sequence, Tuple

import attr
import numpy as np
from loguru import logger

from pyseqpt.exceptions import ChannelInvariantError, ConfigError, InvariantError
from pyseqpt.util import IDENTITY_TOL, PROBABILITY_TOL, STRUCTURE_TOL, kron_all


SCHEMES = ("primepower", "tensor", "projected")
DESIGN_SCHEMES = ("uniform-MUB", "tensor", "projected")
PARTS = ("re", "im")


def survival_key(sign: int, survival: Sequence[int]) -> str:
    """Count key such as '+11' or '-10'"""
    return ("+" if sign > 0 else "-") + "".join(str(int(r)) for r in survival)


def survival_patterns(n_factors: int) -> List[Tuple[int, ...]]:
    """All binary N-tuples, r_1 most significant"""
    return list(product((0, 1), repeat=n_factors))


@attr.s(repr=False, cmp=False)
class MUBSet:
    """Maximal set of mutually unbiased bases in prime-power dimension"""

    D: int = attr.ib()
    bases: np.ndarray = attr.ib()  # (D+1, D, D): bases[M, k] is state k of basis M
    phase_table: np.ndarray = attr.ib()  # (D+1, D, D): phase_table[M, j, k] = alpha^M_jk

    def __repr__(self):
        return f"MUBSet(D={self.D}, n_bases={len(self.bases)})"

    def __len__(self):
        return len(self.bases)

    def max_deviation(self) -> Tuple[float, float]:
        """(orthonormality, unbiasedness) worst deviations"""
        D = self.D
        overlaps = np.einsum("Jla,Kma->JKlm", self.bases.conj(), self.bases)
        ortho = 0.0
        unbiased = 0.0
        for J in range(D + 1):
            for K in range(D + 1):
                if J == K:
                    ortho = max(ortho, np.abs(overlaps[J, K] - np.eye(D)).max())
                else:
                    unbiased = max(unbiased, np.abs(np.abs(overlaps[J, K]) ** 2 - 1 / D).max())
        return float(ortho), float(unbiased)


@attr.s(repr=False, cmp=False)
class WeightedDesign:
    """
    Finite weighted set of pure states.

    Every design carries its factor structure: `factor_states[a]` holds the states of factor a
    and `factor_index[n, a]` selects the factor-a state of design state n. Single-factor designs
    have one factor equal to the whole design.
    """

    d: int = attr.ib()
    states: np.ndarray = attr.ib()  # (n, d)
    probabilities: np.ndarray = attr.ib()  # (n,)
    survival_meta: List[Tuple[Tuple[int, int], ...]] = attr.ib()
    factor_dims: List[int] = attr.ib()
    scheme: str = attr.ib()
    factor_states: List[np.ndarray] = attr.ib()
    factor_index: np.ndarray = attr.ib()  # (n, N)

    def __attrs_post_init__(self):
        if self.scheme not in DESIGN_SCHEMES:
            raise ConfigError(f"unknown design scheme '{self.scheme}'")
        if self.states.shape != (len(self.probabilities), self.d):
            raise InvariantError(
                f"states of shape {self.states.shape} do not match {len(self.probabilities)} "
                f"probabilities in dimension {self.d}"
            )
        if abs(self.probabilities.sum() - 1) > PROBABILITY_TOL:
            raise InvariantError(f"design probabilities sum to {self.probabilities.sum()!r}")
        norms = np.linalg.norm(self.states, axis=1)
        if np.abs(norms - 1).max() > PROBABILITY_TOL:
            raise InvariantError("design state without unit norm")
        if int(np.prod(self.factor_dims)) != self.d:
            raise InvariantError(f"factor dims {self.factor_dims} do not multiply to {self.d}")

    def __repr__(self):
        return (
            f"WeightedDesign(scheme={self.scheme}, d={self.d}, "
            f"factor_dims={self.factor_dims}, n_states={len(self)})"
        )

    def __len__(self):
        return len(self.probabilities)

    @property
    def n_factors(self) -> int:
        return len(self.factor_dims)

    def factor_projectors(self, factor: int) -> np.ndarray:
        """Projectors of the factor states, shape (n_a, D_a, D_a)"""
        vecs = self.factor_states[factor]
        return np.einsum("ni,nj->nij", vecs, vecs.conj())

    def projectors(self) -> np.ndarray:
        """Projectors P_phi of all design states, shape (n, d, d)"""
        return np.einsum("ni,nj->nij", self.states, self.states.conj())

    def counts(self) -> None:
        """Print design summary"""
        logger.debug("Design:")
        logger.debug("Scheme      : {}", self.scheme)
        logger.debug("Dimension   : {}", self.d)
        logger.debug("Factor dims : {}", self.factor_dims)
        logger.debug("States      : {}", len(self))
        for weight, n in zip(*np.unique(np.round(self.probabilities, 15), return_counts=True)):
            logger.debug("Weight      : {} x {}", n, weight)


@dataclass(frozen=True)
class DesignSample:
    """One input drawn from a design"""

    index: int
    state: np.ndarray
    survival_meta: Tuple[Tuple[int, int], ...]
    factor_states: Tuple[np.ndarray, ...]


@attr.s(repr=False, cmp=False)
class OperatorBasis:
    """Unitary operator basis with Tr(E_m E_n^dag) = D delta_mn and E_0 = 1"""

    D: int = attr.ib()
    elements: np.ndarray = attr.ib()  # (D^2, D, D)
    labels: List[Tuple[int, int]] = attr.ib()  # m -> (a, b) for X^a Z^b

    def __repr__(self):
        return f"OperatorBasis(D={self.D})"

    def __len__(self):
        return len(self.elements)

    @property
    def dims(self) -> List[int]:
        return [self.D]

    def element(self, m: int) -> np.ndarray:
        if not 0 <= m < len(self):
            raise ConfigError(f"basis index {m} out of range [0, {len(self)})")
        return self.elements[m]

    def check(self) -> None:
        """Raise InvariantError when orthogonality, unitarity or E_0 = 1 fails"""
        D = self.D
        flat = self.elements.reshape(len(self), -1)
        gram = flat.conj() @ flat.T
        if np.abs(gram - D * np.eye(len(self))).max() > STRUCTURE_TOL:
            raise InvariantError("operator basis is not orthogonal")
        products = self.elements @ self.elements.conj().transpose(0, 2, 1)
        if np.abs(products - np.eye(D)).max() > STRUCTURE_TOL:
            raise InvariantError("operator basis element is not unitary")
        if not np.array_equal(self.elements[0], np.eye(D)):
            raise InvariantError("first basis element is not the identity")


class ProductOperatorBasis:
    """
    Tensor product of operator bases.

    Flat index i <-> (i_1, ..., i_N) is mixed radix with radices D_a^2, factor 1 most
    significant, so element(i) = E_{i_1} x ... x E_{i_N}.
    """

    def __init__(self, factors: List[OperatorBasis]):
        if not factors:
            raise ConfigError("product basis needs at least one factor")
        self.factors = list(factors)
        self.radices = [len(f) for f in self.factors]
        self._elements = None

    def __repr__(self):
        return f"ProductOperatorBasis(dims={self.dims})"

    def __len__(self):
        return int(np.prod(self.radices))

    @property
    def dims(self) -> List[int]:
        return [f.D for f in self.factors]

    @property
    def D(self) -> int:
        return int(np.prod(self.dims))

    def flatten(self, multi_index: Sequence[int]) -> int:
        if len(multi_index) != len(self.factors):
            raise ConfigError(f"multi-index {tuple(multi_index)} has the wrong length")
        flat = 0
        for idx, radix in zip(multi_index, self.radices):
            if not 0 <= idx < radix:
                raise ConfigError(f"multi-index {tuple(multi_index)} out of range")
            flat = flat * radix + idx
        return flat

    def unflatten(self, flat: int) -> Tuple[int, ...]:
        self._check_index(flat)
        digits = []
        for radix in reversed(self.radices):
            flat, idx = divmod(flat, radix)
            digits.append(idx)
        return tuple(reversed(digits))

    def element(self, flat: int) -> np.ndarray:
        """E_i as a d x d matrix"""
        return kron_all(
            f.elements[idx] for f, idx in zip(self.factors, self.unflatten(flat))
        )

    @property
    def elements(self) -> np.ndarray:
        """All d^2 elements, built once"""
        if self._elements is None:
            self._elements = np.stack([self.element(k) for k in range(len(self))])
        return self._elements

    def _check_index(self, flat: int) -> None:
        if not 0 <= flat < len(self):
            raise ConfigError(f"basis index {flat} out of range [0, {len(self)})")


def _kraus_array(kraus) -> np.ndarray:
    try:
        return np.asarray(kraus, dtype=complex)
    except (TypeError, ValueError) as err:
        raise ChannelInvariantError(f"kraus entries must be numbers: {err}") from err


@attr.s(repr=False, cmp=False)
class KrausChannel:
    """Channel in operator-sum form"""

    D: int = attr.ib()
    kraus: np.ndarray = attr.ib(converter=_kraus_array)

    def __attrs_post_init__(self):
        if self.kraus.ndim == 2:
            self.kraus = self.kraus[None]
        if self.kraus.ndim != 3 or self.kraus.shape[1:] != (self.D, self.D):
            raise ChannelInvariantError(
                f"kraus shape mismatch: {self.kraus.shape} for dimension {self.D}"
            )
        if not np.isfinite(self.kraus).all():
            raise ChannelInvariantError("kraus entries must be finite")
        completeness = np.einsum("kba,kbc->ac", self.kraus.conj(), self.kraus)
        if not np.abs(completeness - np.eye(self.D)).max() <= IDENTITY_TOL:
            raise ChannelInvariantError("trace preservation violated")

    def __repr__(self):
        return f"KrausChannel(D={self.D}, rank={len(self.kraus)})"

    @property
    def rank(self) -> int:
        return len(self.kraus)


@attr.s(repr=False, cmp=False)
class ChiMatrix:
    """chi_mn in a fixed (product) operator basis"""

    basis = attr.ib()
    chi: np.ndarray = attr.ib()

    def __repr__(self):
        return f"ChiMatrix(dims={self.basis.dims})"

    def __getitem__(self, key):
        return self.chi[key]

    def check(self, tol: float = IDENTITY_TOL) -> None:
        """Raise ChannelInvariantError on a non-Hermitian, non-positive or non-TP chi"""
        chi = self.chi
        if np.abs(chi - chi.conj().T).max() > tol:
            raise ChannelInvariantError("chi matrix is not Hermitian")
        if np.linalg.eigvalsh((chi + chi.conj().T) / 2).min() < -tol:
            raise ChannelInvariantError("chi matrix is not positive semidefinite")
        E = self.basis.elements
        tp = np.einsum("mn,nba,mbc->ac", chi, E.conj(), E)
        if np.abs(tp - np.eye(self.basis.D)).max() > 10 * tol:
            raise ChannelInvariantError("trace preservation violated")


@dataclass(frozen=True)
class ShotOutcome:
    """Ancilla sign and survival pattern of one circuit run"""

    ancilla: int
    survival: Tuple[int, ...]

    @property
    def key(self) -> str:
        return survival_key(self.ancilla, self.survival)


@attr.s(repr=False, cmp=False)
class CountTable:
    """Counts M_{+-r} indexed [sign (0: +1, 1: -1), r flattened with r_1 most significant]"""

    n_factors: int = attr.ib()
    counts: np.ndarray = attr.ib(default=None)

    def __attrs_post_init__(self):
        if self.counts is None:
            self.counts = np.zeros((2, 2 ** self.n_factors), dtype=np.int64)
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.shape != (2, 2 ** self.n_factors):
            raise ConfigError(f"count table shape {self.counts.shape} for N={self.n_factors}")

    def __repr__(self):
        return f"CountTable(N={self.n_factors}, shots={self.shots})"

    def __eq__(self, other):
        return (
            isinstance(other, CountTable)
            and self.n_factors == other.n_factors
            and np.array_equal(self.counts, other.counts)
        )

    @property
    def shots(self) -> int:
        return int(self.counts.sum())

    def add(self, outcome: ShotOutcome) -> None:
        if len(outcome.survival) != self.n_factors:
            raise ConfigError("survival vector length does not match the design")
        r = int("".join(str(b) for b in outcome.survival), 2)
        self.counts[0 if outcome.ancilla > 0 else 1, r] += 1

    def merge(self, other: CountTable) -> CountTable:
        """Sum of two tables; associative and commutative"""
        if other.n_factors != self.n_factors:
            raise ConfigError("cannot merge count tables of different N")
        return CountTable(self.n_factors, self.counts + other.counts)

    def items(self):
        """((sign, r), count) pairs in fixed order"""
        for s_idx, sign in enumerate((1, -1)):
            for r_idx, pattern in enumerate(survival_patterns(self.n_factors)):
                yield (sign, pattern), int(self.counts[s_idx, r_idx])

    def to_dict(self) -> Dict[str, int]:
        return {survival_key(sign, r): n for (sign, r), n in self.items()}


@dataclass
class EstimateResult:
    """Estimated chi element with its Hoeffding radius"""

    scheme: str
    d: int
    factor_dims: List[int]
    i: int
    j: int
    estimate: complex
    shots: int
    epsilon_bound: float
    confidence: float
    seed: int
    mode: str
    counts: Dict[str, Dict[str, int]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "d": self.d,
            "factor_dims": list(self.factor_dims),
            "i": self.i,
            "j": self.j,
            "estimate": [float(self.estimate.real), float(self.estimate.imag)],
            "shots": self.shots,
            "epsilon_bound": self.epsilon_bound,
            "confidence": self.confidence,
            "seed": self.seed,
            "mode": self.mode,
            "counts": self.counts,
        }

    def to_record(self) -> dict:
        """Flat row for tabular output"""
        return {
            "scheme": self.scheme,
            "d": self.d,
            "i": self.i,
            "j": self.j,
            "estimate": self.estimate,
            "shots": self.shots,
            "epsilon_bound": self.epsilon_bound,
            "confidence": self.confidence,
            "seed": self.seed,
            "mode": self.mode,
        }


@dataclass(frozen=True)
class IdentityReport:
    """Worst deviation of one identity over a set of trials"""

    name: str
    dims: Tuple[int, ...]
    trials: int
    max_deviation: float
    tolerance: float = IDENTITY_TOL
    exempt: bool = False

    def __post_init__(self):
        if self.max_deviation < 0:
            raise ValueError("deviation must be nonnegative")

    @property
    def passed(self) -> bool:
        return self.exempt or self.max_deviation <= self.tolerance

    def to_record(self) -> dict:
        return {
            "identity": self.name,
            "dims": "x".join(str(D) for D in self.dims),
            "trials": self.trials,
            "max_deviation": self.max_deviation,
            "passed": self.passed,
            "exempt": self.exempt,
        }


def batched_kron(stacks: Sequence[np.ndarray]) -> np.ndarray:
    """
    Kronecker products of all combinations of stacked matrices.

    stacks[a] has shape (n_a, D_a, D_a); the result has shape (prod n_a, d, d) ordered with
    factor 1 most significant.
    """
    out = np.ones((1, 1, 1), dtype=complex)
    for stack in stacks:
        n0, r0, _ = out.shape
        n1, r1, _ = stack.shape
        out = np.einsum("iab,kcd->ikacbd", out, stack).reshape(n0 * n1, r0 * r1, r0 * r1)
    return out
