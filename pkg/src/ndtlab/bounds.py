"""Converse bounds, corner points, the small-network closed form, and memory sharing."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .core import (
    DomainError,
    MissingEndpoint,
    NetworkConfig,
    SchemePoint,
    to_fraction,
)


@dataclass(frozen=True)
class BoundWitness:
    """The cut ``(ell, s)`` attaining the lower bound.

    ``ell`` counts relay caches in the cut, ``s`` counts user outputs and
    ``s_bar = M + 1 - s``.
    """

    value: Fraction
    ell: int
    s: int
    s_bar: int


@dataclass(frozen=True)
class EnvelopePoint:
    mu: Fraction
    ndt: Fraction


def _check_term_domain(ell: int, s: int, K: int, M: int) -> None:
    if not 1 <= s <= min(M + 1, K):
        raise DomainError(f"s={s} outside [1, min(M+1, K)={min(M + 1, K)}]")
    if not M + 1 - s <= ell <= M:
        raise DomainError(f"ell={ell} outside [{M + 1 - s}, {M}]")


def delta_lb_term(mu, ell: int, s: int, K: int, M: int) -> Fraction:
    """One member of the lower-bound family, indexed by the cut ``(ell, s)``."""
    mu = to_fraction(mu)
    if not 0 <= mu <= 1:
        raise DomainError(f"mu={mu} outside [0, 1]")
    _check_term_domain(ell, s, K, M)
    s_bar = M + 1 - s
    load = s_bar * (K - s + Fraction(s_bar - 1, 2)) + Fraction(ell * (ell + 1), 2)
    return (K + ell - mu * load) / s


def cut_pairs(K: int, M: int) -> Iterable[tuple[int, int]]:
    """All admissible ``(s, ell)`` in lexicographic order."""
    for s in range(1, min(M + 1, K) + 1):
        for ell in range(M + 1 - s, M + 1):
            yield s, ell


def lower_bound(cfg: NetworkConfig) -> tuple[Fraction, BoundWitness | None]:
    """Largest member of the family, floored at 1.

    The witness is the lexicographically smallest ``(s, ell)`` attaining the
    maximum, or ``None`` when every term lies strictly below 1.
    """
    best: BoundWitness | None = None
    for s, ell in cut_pairs(cfg.K, cfg.M):
        value = delta_lb_term(cfg.mu, ell, s, cfg.K, cfg.M)
        if best is None or value > best.value:
            best = BoundWitness(value, ell, s, cfg.M + 1 - s)
    if best is None or best.value < 1:
        return Fraction(1), None
    return best.value, best


def corner_ndt(mu_corner: int, K: int, M: int) -> Fraction:
    """Optimal NDT at the two cache-size extremes.

    No cache forces the base station to broadcast all ``K + M`` files; a full
    cache lets base station and relays jointly zero-force to the users.
    """
    if mu_corner == 0:
        return Fraction(K + M)
    if mu_corner == 1:
        return max(Fraction(1), Fraction(K, M + 1))
    raise DomainError("corner must be 0 or 1")


def _closed_form_terms(K: int, M: int, mu: Fraction, literal: bool) -> list[Fraction]:
    terms = [
        Fraction(1),
        K + M - mu * M * (K + M - 1),
    ]
    if K >= 2 or literal:
        terms.append((K + M - mu * (M * M + (K - 3) * (M - 1))) / 2)
        terms.append((K + M - 1 - mu * (M * M + (K - 3) * (M - 1) - M)) / 2)
    return terms


def optimal_tradeoff_closed(cfg: NetworkConfig, literal: bool = False) -> Fraction:
    """Closed-form optimal NDT for networks with ``K + M <= 4``.

    The two half-weight terms come from cuts with two user outputs, so they are
    only admitted when ``K >= 2``. ``literal=True`` keeps them regardless,
    which overshoots the converse for ``(K, M) = (1, 3)``.
    """
    if cfg.K + cfg.M > 4:
        raise DomainError(f"closed form covers K+M <= 4, got K+M={cfg.K + cfg.M}")
    return max(_closed_form_terms(cfg.K, cfg.M, cfg.mu, literal))


def conditional_rule_fires(cfg: NetworkConfig) -> bool:
    """True when dropping the two-output terms changes the closed-form value."""
    return optimal_tradeoff_closed(cfg) != optimal_tradeoff_closed(cfg, literal=True)


class Envelope:
    """Lower convex hull of achievable points with an exact evaluator."""

    def __init__(self, breakpoints: Sequence[EnvelopePoint]):
        self.breakpoints = list(breakpoints)

    def __call__(self, mu) -> Fraction:
        mu = to_fraction(mu)
        pts = self.breakpoints
        if not pts[0].mu <= mu <= pts[-1].mu:
            raise DomainError(f"mu={mu} outside the envelope support")
        for left, right in zip(pts, pts[1:]):
            if left.mu <= mu <= right.mu:
                span = right.mu - left.mu
                return left.ndt + (mu - left.mu) * (right.ndt - left.ndt) / span
        return pts[0].ndt

    def __iter__(self):
        return iter(self.breakpoints)

    def __len__(self):
        return len(self.breakpoints)


def _cross(o: EnvelopePoint, a: EnvelopePoint, b: EnvelopePoint) -> Fraction:
    return (a.mu - o.mu) * (b.ndt - o.ndt) - (a.ndt - o.ndt) * (b.mu - o.mu)


def lower_convex_envelope(points: Iterable[SchemePoint]) -> Envelope:
    """Memory-sharing envelope over the given scheme points."""
    pts = sorted((EnvelopePoint(p.mu, p.ndt) for p in points), key=lambda p: p.mu)
    if not pts:
        raise MissingEndpoint("no points supplied")
    mus = [p.mu for p in pts]
    if len(set(mus)) != len(mus):
        raise DomainError("points must have distinct mu values")
    if mus[0] != 0 or mus[-1] != 1:
        raise MissingEndpoint("envelope needs points at mu=0 and mu=1")
    hull: list[EnvelopePoint] = []
    for p in pts:
        while len(hull) >= 2 and _cross(hull[-2], hull[-1], p) <= 0:
            hull.pop()
        hull.append(p)
    return Envelope(hull)


def achievable_dof(cfg: NetworkConfig, ndt) -> Fraction:
    """Sum degrees of freedom implied by an NDT: users plus relay-uncached load over time."""
    ndt = to_fraction(ndt)
    if ndt < 1:
        raise DomainError("ndt must be at least 1")
    return (cfg.K + cfg.M * (1 - cfg.mu)) / ndt
