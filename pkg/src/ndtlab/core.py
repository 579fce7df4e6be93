"""Shared value types, errors, and exact combinatorics."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from math import comb
from typing import Hashable, NamedTuple, Union

import numpy as np

RationalLike = Union[Fraction, int, str]


class NDTError(Exception):
    """Base class for all package errors."""


class InvalidConfig(NDTError):
    def __init__(self, field: str, message: str = ""):
        self.field = field
        super().__init__(f"invalid {field}" + (f": {message}" if message else ""))


class DomainError(NDTError):
    """Arguments fall outside the domain where a formula is defined."""


class MissingEndpoint(NDTError):
    """An envelope was requested without the mu=0 or mu=1 anchor point."""


class DegenerateChannel(NDTError):
    """A channel realization makes a beamformer construction ill-posed."""


class TooManyRedraws(NDTError):
    """Consecutive degenerate channel draws exceeded the retry budget."""


class ShapeMismatch(NDTError):
    """Coefficient frames and channel states disagree in length or shape."""


class UnsupportedScheme(NDTError):
    """No implemented scheme covers the requested operating point."""


def to_fraction(value: RationalLike) -> Fraction:
    """Convert an int, Fraction or 'a/b' string to a Fraction; floats are rejected."""
    if isinstance(value, bool) or isinstance(value, float):
        raise TypeError("floats are not accepted; pass a Fraction or 'a/b' string")
    return Fraction(value)


def binomial(n: int, k: int) -> int:
    if k < 0 or n < 0 or k > n:
        return 0
    return comb(n, k)


@dataclass(frozen=True)
class NetworkConfig:
    """One base station, ``M`` caching relays, ``K`` users and ``N`` files.

    ``mu`` is the fraction of the library each relay can store.
    """

    K: int
    M: int
    mu: Fraction
    N: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "mu", to_fraction(self.mu))
        if self.N is None:
            object.__setattr__(self, "N", self.K + self.M)

    @property
    def mu_m(self) -> Fraction:
        """Number of relays caching each subfile, ``mu * M``."""
        return self.mu * self.M


def validate_config(cfg: NetworkConfig) -> NetworkConfig:
    if not isinstance(cfg.K, int) or cfg.K < 1:
        raise InvalidConfig("K", "must be a positive integer")
    if not isinstance(cfg.M, int) or cfg.M < 1:
        raise InvalidConfig("M", "must be a positive integer")
    if cfg.N < cfg.K + cfg.M:
        raise InvalidConfig("N", f"need N >= K+M = {cfg.K + cfg.M}, got {cfg.N}")
    if not 0 <= cfg.mu <= 1:
        raise InvalidConfig("mu", f"must lie in [0, 1], got {cfg.mu}")
    return cfg


def discrete_cache_grid(M: int) -> list[Fraction]:
    if M < 1:
        raise DomainError("M must be at least 1")
    return [Fraction(m, M) for m in range(M + 1)]


class SchemeLabel(str, Enum):
    UNICAST = "Unicast"
    FULL_ZF = "FullZF"
    ONE_SHOT = "OneShot"
    IA31 = "IA31"
    IA22 = "IA22"
    ENVELOPE = "Envelope"


@dataclass(frozen=True)
class SchemePoint:
    mu: Fraction
    ndt: Fraction
    scheme_label: SchemeLabel = SchemeLabel.ONE_SHOT

    def __post_init__(self):
        object.__setattr__(self, "mu", to_fraction(self.mu))
        object.__setattr__(self, "ndt", to_fraction(self.ndt))
        if self.ndt < 1:
            raise DomainError(f"an NDT below 1 is not achievable: {self.ndt}")


def format_fraction(value: Fraction) -> str:
    """Machine-readable 'num/den' form used in every CSV and JSON output."""
    return f"{value.numerator}/{value.denominator}"


class Receiver(NamedTuple):
    """A receiving node: ``("UE", k)`` or ``("RN", m)``, 1-based."""

    kind: str
    index: int

    def __str__(self) -> str:
        return f"{self.kind}{self.index}"


def ue(k: int) -> Receiver:
    return Receiver("UE", k)


def rn(m: int) -> Receiver:
    return Receiver("RN", m)


@dataclass(frozen=True)
class ChannelState:
    """Channel coefficients at one channel use.

    ``f[m]`` is base station to relay ``m+1``, ``g[k]`` base station to user
    ``k+1`` and ``H[k, m]`` relay ``m+1`` to user ``k+1`` (arrays are 0-based).
    """

    t: int
    f: np.ndarray
    g: np.ndarray
    H: np.ndarray

    @property
    def K(self) -> int:
        return self.g.shape[0]

    @property
    def M(self) -> int:
        return self.f.shape[0]


@dataclass
class Frame:
    """Transmit coefficients at one channel use.

    ``nu[sym]`` weights a symbol on the base-station signal and
    ``beta[(sym, m)]`` on relay ``m``'s signal; absent entries are zero.
    """

    t: int
    nu: dict[Hashable, complex]
    beta: dict[tuple[Hashable, int], complex]

    def symbols(self) -> set:
        return set(self.nu) | {sym for sym, _ in self.beta}

    def scaled(self, factor: complex) -> "Frame":
        return Frame(
            self.t,
            {k: v * factor for k, v in self.nu.items()},
            {k: v * factor for k, v in self.beta.items()},
        )
