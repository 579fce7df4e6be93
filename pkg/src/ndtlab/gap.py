"""Multiplicative gap between one-shot delivery and the converse.

Closed-form gap bounds per region pair, plus empirical ratios of the one-shot
memory-sharing envelope to the lower bound.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import ceil, floor

from .bounds import Envelope, lower_bound, lower_convex_envelope
from .core import (
    DomainError,
    NetworkConfig,
    SchemeLabel,
    SchemePoint,
    discrete_cache_grid,
    format_fraction,
    to_fraction,
)
from .ia import IA_POINTS
from .oneshot import Region, classify_region, delta_os

BOUND_SOURCES = ("BE", "CD_i", "CD_ii", "CD_iii", "DE", "Optimal")
CONSTANT_GAP = Fraction(8, 3)


@dataclass(frozen=True)
class GapReport:
    K: int
    M: int
    mu: Fraction
    achievable: Fraction
    lower: Fraction
    ratio: Fraction
    corollary_bound: Fraction | None
    bound_source: str | None

    @property
    def holds(self) -> bool:
        return self.corollary_bound is None or self.ratio <= self.corollary_bound

    def csv_row(self) -> list[str]:
        return [
            str(self.K),
            str(self.M),
            str(self.mu.numerator),
            str(self.mu.denominator),
            format_fraction(self.achievable),
            format_fraction(self.lower),
            format_fraction(self.ratio),
            "" if self.corollary_bound is None else format_fraction(self.corollary_bound),
            self.bound_source or "",
        ]


def gap_bound_be(theta, M: int) -> Fraction:
    """Gap when the relay broadcast dominates and ``mu >= ceil(theta)/M``."""
    theta = to_fraction(theta)
    if not 1 <= theta <= Fraction(M - 3, 2):
        raise DomainError(f"theta={theta} outside [1, (M-3)/2] for M={M}")
    return (M - theta) / (1 + theta)


def gap_bound_cd(K: int, M: int, case: str, param=None) -> Fraction:
    """Gap when user delivery dominates; ``case`` is ``"i"``, ``"ii"`` or ``"iii"``.

    Cases i and ii cover ``mu <= 1/M`` (ii only when ``K > M >= 2``); case iii
    takes the chain parameter ``d`` and covers ``mu >= ceil((M+1-d)/d)/M``.
    """
    if case == "i":
        if K == 1:
            return Fraction(1)
        if M == 1:
            return Fraction(1) if K <= 2 else 1 + (Fraction(K, 2) - Fraction(2, K)) / K
        slope = Fraction(M, K) * Fraction(K + M + 1, K + M - 1)
        return 1 + (Fraction(K, 2) + Fraction(M - 5, 4)) * min(Fraction(1), slope)
    if case == "ii":
        if not K > M >= 2:
            raise DomainError("case ii needs K > M >= 2")
        slope = Fraction(M, K) * Fraction(K + M + 1, K + M - 1)
        return 1 + (Fraction(K, 2) + Fraction(M - 5, 4)) * slope
    if case == "iii":
        if param is None:
            raise DomainError("case iii needs the chain parameter d")
        d = to_fraction(param)
        lo, hi = Fraction(M + 1, min(K, M)), Fraction(M + 1, 2)
        if not lo <= d <= hi:
            raise DomainError(f"d={d} outside [{lo}, {hi}]")
        return (d * K + d * (d - 1)) / max(M + 1, K)
    raise DomainError(f"unknown case {case!r}")


def gap_bound_de(M: int) -> Fraction:
    """Gap of memory sharing between no cache and ``mu = 1/M`` in the transition regime."""
    if M < 1:
        raise DomainError("M must be positive")
    return Fraction(M - 1, 2)


def optimality_conditions_hold(cfg: NetworkConfig) -> bool:
    """Conditions under which one-shot delivery meets the converse at NDT 1."""
    K, M, mu = cfg.K, cfg.M, cfg.mu
    case_a = K < M and mu >= Fraction(K, M) and mu * M >= ceil(Fraction(M - 1, 2)) and mu <= Fraction(1, 2)
    case_b = K <= M and mu >= Fraction(K, M) and mu > Fraction(1, 2)
    return case_a or case_b


def constant_gap_threshold(M: int) -> Fraction:
    """Smallest cache size from which the gap stays below 8/3."""
    return Fraction(ceil(Fraction(M - 1, 2)), M)


def oneshot_envelope(K: int, M: int, include_ia: bool = False) -> Envelope:
    """Memory sharing over the one-shot grid points, optionally joined with alignment points."""
    points = [
        SchemePoint(mu, delta_os(NetworkConfig(K, M, mu)), SchemeLabel.ONE_SHOT)
        for mu in discrete_cache_grid(M)
    ]
    if include_ia and (K, M) in IA_POINTS:
        mu, ndt = IA_POINTS[(K, M)]
        label = SchemeLabel.IA31 if (K, M) == (3, 1) else SchemeLabel.IA22
        points.append(SchemePoint(mu, ndt, label))
    return lower_convex_envelope(points)


def _chain_parameter(K: int, M: int, mu: Fraction) -> Fraction | None:
    """Smallest admissible ``d`` whose interval start ``ceil(kappa_d)/M`` is at most ``mu``."""
    cached = floor(mu * M)
    d = max(Fraction(M + 1, 1 + cached), Fraction(M + 1, min(K, M)))
    return d if d <= Fraction(M + 1, 2) else None


def _relay_bottleneck(cfg: NetworkConfig) -> bool:
    """True at interior grid points where the relay broadcast sets the one-shot NDT."""
    if cfg.mu in (0, 1) or (cfg.mu * cfg.M).denominator != 1:
        return False
    return classify_region(cfg) in (Region.B, Region.E)


def _broadcast_bound(cfg: NetworkConfig) -> Fraction | None:
    """Tightest broadcast-limited bound, using the largest admissible ``theta``."""
    M, mu = cfg.M, cfg.mu
    top = Fraction(M - 3, 2)
    theta = top if ceil(top) <= mu * M else Fraction(floor(mu * M))
    if 1 <= theta <= top and mu <= constant_gap_threshold(M):
        return gap_bound_be(theta, M)
    return None


def applicable_bounds(cfg: NetworkConfig) -> list[tuple[Fraction, str]]:
    """Every gap bound whose hypothesis holds at ``cfg``, in routing order.

    User-delivery bounds are skipped at grid points where the relay broadcast
    is the bottleneck; the broadcast bound covers those instead.
    """
    K, M, mu = cfg.K, cfg.M, cfg.mu
    found: list[tuple[Fraction, str]] = []
    if optimality_conditions_hold(cfg):
        found.append((Fraction(1), "Optimal"))
    relay_limited = _relay_bottleneck(cfg)
    broadcast = _broadcast_bound(cfg)
    if M > 2 * K:
        if mu <= Fraction(1, M):
            found.append((gap_bound_de(M), "DE"))
        if broadcast is not None:
            found.append((broadcast, "BE"))
        return found
    if relay_limited:
        if broadcast is not None:
            found.append((broadcast, "BE"))
        return found
    if K <= M:
        if K == 1:
            found.append((gap_bound_cd(K, M, "i"), "CD_i"))
        else:
            if mu <= Fraction(1, M):
                found.append((gap_bound_cd(K, M, "i"), "CD_i"))
            d = _chain_parameter(K, M, mu)
            if d is not None and mu <= Fraction(K, M):
                found.append((gap_bound_cd(K, M, "iii", d), "CD_iii"))
    else:
        if M == 1:
            found.append((gap_bound_cd(K, M, "i"), "CD_i"))
        else:
            if mu <= Fraction(1, M):
                found.append((gap_bound_cd(K, M, "ii"), "CD_ii"))
            d = _chain_parameter(K, M, mu)
            if d is not None:
                found.append((gap_bound_cd(K, M, "iii", d), "CD_iii"))
    return found


def empirical_gap(cfg: NetworkConfig, strict: bool = False) -> GapReport:
    """Ratio of the one-shot envelope to the lower bound, with the tightest applicable gap bound.

    With ``strict=True`` a ratio above its bound raises ``AssertionError``.
    """
    achievable = oneshot_envelope(cfg.K, cfg.M)(cfg.mu)
    lower, _ = lower_bound(cfg)
    ratio = achievable / lower
    candidates = applicable_bounds(cfg)
    if candidates:
        bound, source = min(candidates, key=lambda c: c[0])
    elif ratio == 1:
        bound, source = Fraction(1), "Optimal"
    else:
        bound, source = None, None
    report = GapReport(cfg.K, cfg.M, cfg.mu, achievable, lower, ratio, bound, source)
    if strict and not report.holds:
        raise AssertionError(f"gap {ratio} exceeds {source} bound {bound} at {cfg}")
    return report


def sweep_points(K: int, M: int) -> list[Fraction]:
    """Discrete cache grid plus the alignment corner when ``(K, M)`` has one."""
    mus = set(discrete_cache_grid(M))
    if (K, M) in IA_POINTS:
        mus.add(IA_POINTS[(K, M)][0])
    return sorted(mus)


def gap_sweep(kmax: int, mmax: int) -> list[GapReport]:
    if kmax < 1 or mmax < 1:
        raise DomainError("sweep bounds must be at least 1")
    return [
        empirical_gap(NetworkConfig(K, M, mu))
        for K in range(1, kmax + 1)
        for M in range(1, mmax + 1)
        for mu in sweep_points(K, M)
    ]


def constant_gap_sweep(kmax: int = 8, mmax: int = 8) -> tuple[Fraction, GapReport]:
    """Largest ratio over grid points at or above the constant-gap threshold."""
    worst: GapReport | None = None
    for K in range(1, kmax + 1):
        for M in range(1, mmax + 1):
            for mu in discrete_cache_grid(M):
                if mu < constant_gap_threshold(M):
                    continue
                report = empirical_gap(NetworkConfig(K, M, mu))
                if worst is None or report.ratio > worst.ratio:
                    worst = report
    return worst.ratio, worst
