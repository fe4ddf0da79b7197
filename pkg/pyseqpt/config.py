"""Run configuration assembled from the command line"""
from __future__ import annotations

import argparse
from itertools import product
from typing import List, Optional, Tuple

import attr

from pyseqpt.exceptions import ConfigError, DimensionOrder, DimensionTooSmall
from pyseqpt.model.structures import SCHEMES
from pyseqpt.util import (
    is_prime_power,
    n_jobs_from_env,
    prime_power,
    prime_power_factors,
    smallest_prime_power_above,
)


FORMATS = ("json", "csv")
MODES = ("montecarlo", "exact")
NEEDS_DIM = ("design", "channel", "estimate", "sweep", "verify")
NEEDS_CHANNEL = ("channel", "estimate", "sweep")
NEEDS_TARGETS = ("estimate", "sweep")


def parse_pairs(text: str) -> List[Tuple[int, int]]:
    """'0,0;1,2' -> [(0, 0), (1, 2)]"""
    pairs = []
    for item in text.split(";"):
        if not item.strip():
            continue
        try:
            i, j = (int(v) for v in item.split(","))
        except ValueError as err:
            raise ConfigError(f"cannot read index pair '{item}', expected 'i,j'") from err
        pairs.append((i, j))
    return pairs


def parse_int_list(text: str) -> List[int]:
    """'500,2000' -> [500, 2000]"""
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as err:
        raise ConfigError(f"cannot read integer list '{text}'") from err


@attr.s(repr=False, cmp=False)
class RunConfig:
    """Parameters of one CLI invocation"""

    command: str = attr.ib()
    dim: Optional[int] = attr.ib(default=None)
    scheme: Optional[str] = attr.ib(default=None)
    big_dim: Optional[int] = attr.ib(default=None)
    channel: Optional[str] = attr.ib(default=None)
    i: Optional[int] = attr.ib(default=None)
    j: Optional[int] = attr.ib(default=None)
    pairs: Optional[str] = attr.ib(default=None)
    all_pairs: bool = attr.ib(default=False)
    shots: Optional[int] = attr.ib(default=None)
    epsilon: Optional[float] = attr.ib(default=None)
    confidence: float = attr.ib(default=0.95)
    mode: str = attr.ib(default="montecarlo")
    bound: str = attr.ib(default="hoeffding")
    seed: int = attr.ib(default=0)
    out: Optional[str] = attr.ib(default=None)
    fmt: str = attr.ib(default="json")
    shot_list: Optional[str] = attr.ib(default=None)
    repetitions: int = attr.ib(default=1)
    summary_out: Optional[str] = attr.ib(default=None)
    identities: List[str] = attr.ib(factory=list)
    trials: int = attr.ib(default=10)
    channel_pairs: int = attr.ib(default=3)
    check_design: bool = attr.ib(default=False)
    chi_out: Optional[str] = attr.ib(default=None)
    n_jobs: Optional[int] = attr.ib(default=None)
    targets: List[Tuple[int, int]] = attr.ib(factory=list)

    def __repr__(self):
        return f"RunConfig(command={self.command}, dim={self.dim}, scheme={self.scheme})"

    @classmethod
    def from_namespace(cls, args: argparse.Namespace) -> RunConfig:
        """Pick the known fields from a parsed namespace, defaults for the rest"""
        names = [a.name for a in attr.fields(cls) if a.name not in ("targets", "n_jobs")]
        values = {
            name: getattr(args, name) for name in names if getattr(args, name, None) is not None
        }
        return cls(**values)

    @property
    def factor_dims(self) -> List[int]:
        return prime_power_factors(self.dim)

    def validate(self) -> RunConfig:
        """
        Check parameter combinations and fill in derived defaults.

        Raises ConfigError (or a subclass) on the first violation.
        """
        if self.fmt not in FORMATS:
            raise ConfigError(f"unknown format '{self.fmt}', expected one of {FORMATS}")
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode '{self.mode}', expected one of {MODES}")
        if self.seed < 0:
            raise ConfigError(f"seed must be nonnegative, got {self.seed}")
        if self.command in NEEDS_DIM and self.dim is None:
            raise ConfigError(f"{self.command} needs --dim")
        if self.dim is not None and self.dim < 2:
            raise DimensionTooSmall(f"dimension {self.dim} is smaller than 2")
        if self.command in NEEDS_CHANNEL and not self.channel:
            raise ConfigError(f"{self.command} needs --channel")

        self._validate_scheme()
        if self.command in NEEDS_TARGETS:
            self._validate_budget()
            self.targets = self._resolve_targets()
        if self.command == "plan" and self.epsilon is None:
            raise ConfigError("plan needs --eps")
        if self.trials < 1:
            raise ConfigError("at least one trial is required")
        self.n_jobs = n_jobs_from_env()
        return self

    def _validate_scheme(self) -> None:
        if self.command == "verify" and not self.check_design:
            self._validate_big_dim()
            return
        if self.scheme is None:
            if self.dim is None:
                if self.command == "plan":
                    raise ConfigError("plan needs --scheme or --dim")
                return
            self.scheme = "primepower" if is_prime_power(self.dim) else "tensor"
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme '{self.scheme}', expected one of {SCHEMES}")
        if self.big_dim is not None and self.scheme != "projected":
            raise ConfigError("--big-dim only applies to the projected scheme")
        if self.dim is None:
            return
        if self.scheme == "primepower":
            prime_power(self.dim)
        if self.scheme == "projected":
            if self.big_dim is None:
                self.big_dim = smallest_prime_power_above(self.dim)
            self._validate_big_dim()

    def _validate_big_dim(self) -> None:
        if self.big_dim is None:
            return
        prime_power(self.big_dim)
        if self.big_dim <= self.dim:
            raise DimensionOrder(f"embedding dimension {self.big_dim} must exceed {self.dim}")

    def _validate_budget(self) -> None:
        if self.mode == "exact":
            if self.shots is not None or self.epsilon is not None:
                raise ConfigError("exact mode takes neither --shots nor --eps")
            return
        if self.command == "sweep":
            if not self.shot_list:
                raise ConfigError("sweep needs --shot-list")
            if any(m < 1 for m in parse_int_list(self.shot_list)):
                raise ConfigError("shot counts must be positive")
            if self.repetitions < 1:
                raise ConfigError("at least one repetition is required")
        elif (self.shots is None) == (self.epsilon is None):
            raise ConfigError("give exactly one of --shots or --eps")
        if not 0 < self.confidence < 1:
            raise ConfigError(f"confidence must lie in (0, 1), got {self.confidence}")

    def _resolve_targets(self) -> List[Tuple[int, int]]:
        size = self.dim * self.dim
        if self.all_pairs:
            targets = list(product(range(size), repeat=2))
        elif self.pairs:
            targets = parse_pairs(self.pairs)
        elif self.i is not None and self.j is not None:
            targets = [(self.i, self.j)]
        else:
            raise ConfigError("give --i and --j, --pairs or --all")
        for i, j in targets:
            if not (0 <= i < size and 0 <= j < size):
                raise ConfigError(f"indices ({i}, {j}) out of range [0, {size})")
        return targets
