"""One-shot delivery: NDT formulas, regions, subpacketization, schedule and beamformers.

Worst-case demand is fixed throughout: user ``k`` requests file ``k`` and relay
``m`` requests file ``K + m``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from itertools import combinations
from typing import NamedTuple

import numpy as np

from .core import (
    ChannelState,
    DegenerateChannel,
    DomainError,
    Frame,
    NetworkConfig,
    TooManyRedraws,
    binomial,
    to_fraction,
)
from .verify import RANK_RTOL, draw_state


class Region(str, Enum):
    A = "A"
    B = "B"
    C = "C"
    D = "D"
    E = "E"
    ZERO_CACHE = "ZeroCache"
    FULL_CACHE = "FullCache"


class SymbolId(NamedTuple):
    """Subfile ``file`` cached at relays ``rn_subset``, labelled by ``ue_subset``."""

    file: int
    rn_subset: tuple[int, ...]
    ue_subset: tuple[int, ...]
    fragment: int = 1

    def to_list(self) -> list:
        return [self.file, list(self.rn_subset), list(self.ue_subset), self.fragment]


def _cached_relays(cfg: NetworkConfig) -> int:
    t = cfg.mu * cfg.M
    if t.denominator != 1:
        raise DomainError(f"mu*M = {t} is not an integer")
    return int(t)


def delta_man(mu, M: int) -> Fraction:
    """Coded-multicast NDT of the base-station-to-relay broadcast."""
    mu = to_fraction(mu)
    if not 0 <= mu <= 1:
        raise DomainError(f"mu={mu} outside [0, 1]")
    return M * (1 - mu) / (1 + mu * M)


def delta_os(cfg: NetworkConfig) -> Fraction:
    t = _cached_relays(cfg)
    man = delta_man(cfg.mu, cfg.M)
    indicator = 1 if cfg.K > t else 0
    return max(man, (cfg.K + man * indicator) / min(cfg.K, 1 + t))


def classify_region(cfg: NetworkConfig) -> Region:
    """Which bottleneck sets the one-shot NDT at an interior grid point."""
    t = _cached_relays(cfg)
    if cfg.mu in (0, 1):
        raise DomainError("mu in {0, 1} has no interior region; use ZeroCache/FullCache")
    K, M, mu = cfg.K, cfg.M, cfg.mu
    if K <= t:
        if mu > Fraction(1, 2):
            return Region.A
        if mu == Fraction(1, 2) or M < 1 / (1 - 2 * mu):
            return Region.A
        return Region.B
    if M < K:
        return Region.C
    if K > t * delta_man(mu, M):
        return Region.D
    return Region.E


def region_ndt(region: Region, cfg: NetworkConfig) -> Fraction:
    man = delta_man(cfg.mu, cfg.M)
    if region is Region.A:
        return Fraction(1)
    if region in (Region.B, Region.E):
        return man
    if region in (Region.C, Region.D):
        return (cfg.K + man) / (1 + cfg.mu * cfg.M)
    raise DomainError(f"no closed form for {region}")


@dataclass(frozen=True)
class OneShotCounts:
    """Subpacketization and channel-use counts, per fragment unless noted."""

    cached_relays: int
    psi: int
    psi_prime: int
    gamma: int
    symbols_per_file: int
    T1: int
    N_UE: int
    T2: Fraction
    rn_tx_load: Fraction
    frag_factor: int
    total_T: int

    @property
    def ndt(self) -> Fraction:
        return Fraction(self.total_T, self.frag_factor * self.symbols_per_file)


def subpacketize(cfg: NetworkConfig) -> OneShotCounts:
    """Split files so that phase 1 multicasts to relays and phase 2 finishes the users.

    The endpoints reduce to plain unicast (no cache) and joint zero-forcing
    (full cache) under the same formulas.
    """
    t = _cached_relays(cfg)
    K, M = cfg.K, cfg.M
    psi = min(K, t)
    psi_prime = min(K, 1 + t)
    gamma = binomial(K, psi)
    per_file = gamma * binomial(M, t)
    T1 = gamma * binomial(M, t + 1)
    N_UE = min(binomial(M, t + 1) * binomial(K - 1, psi - 1), per_file)
    T2 = Fraction(K * (per_file - N_UE), psi_prime)
    rn_tx = Fraction(K * N_UE, M)
    frag = T2.denominator
    total = frag * T1 + int(frag * T2)
    return OneShotCounts(t, psi, psi_prime, gamma, per_file, T1, N_UE, T2, rn_tx, frag, total)


def file_symbols(cfg: NetworkConfig, n: int, frag_factor: int = 1) -> list[SymbolId]:
    """All symbols of file ``n`` in canonical (lexicographic) order."""
    t = _cached_relays(cfg)
    psi = min(cfg.K, t)
    return [
        SymbolId(n, T, U, f)
        for T in combinations(range(1, cfg.M + 1), t)
        for U in combinations(range(1, cfg.K + 1), psi)
        for f in range(1, frag_factor + 1)
    ]


def cache_placement(cfg: NetworkConfig, frag_factor: int | None = None) -> dict[int, set[SymbolId]]:
    """Relay ``m`` stores every symbol whose relay label contains ``m``."""
    if frag_factor is None:
        frag_factor = subpacketize(cfg).frag_factor
    placement: dict[int, set[SymbolId]] = {m: set() for m in range(1, cfg.M + 1)}
    for n in range(1, cfg.N + 1):
        for sym in file_symbols(cfg, n, frag_factor):
            for m in sym.rn_subset:
                placement[m].add(sym)
    return placement


@dataclass
class ScheduleStep:
    t: int
    phase: int
    S_U: tuple[int, ...]
    S_R: tuple[int, ...] = ()
    S_R_prime: tuple[int, ...] = ()
    rn_symbols: dict[int, SymbolId] = field(default_factory=dict)
    ue_symbols: dict[int, SymbolId] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "phase": self.phase,
            "S_U": list(self.S_U),
            "S_R": list(self.S_R),
            "S_R_prime": list(self.S_R_prime),
            "rn_symbols": {str(m): s.to_list() for m, s in sorted(self.rn_symbols.items())},
            "ue_symbols": {str(k): s.to_list() for k, s in sorted(self.ue_symbols.items())},
        }


@dataclass
class DeliveryPlan:
    cfg: NetworkConfig
    counts: OneShotCounts
    steps: list[ScheduleStep]

    @property
    def phase1(self) -> list[ScheduleStep]:
        return [s for s in self.steps if s.phase == 1]

    @property
    def phase2(self) -> list[ScheduleStep]:
        return [s for s in self.steps if s.phase == 2]

    def to_dict(self) -> dict:
        return {
            "K": self.cfg.K,
            "M": self.cfg.M,
            "mu": f"{self.cfg.mu.numerator}/{self.cfg.mu.denominator}",
            "frag_factor": self.counts.frag_factor,
            "symbols_per_file": self.counts.symbols_per_file,
            "steps": [s.to_dict() for s in self.steps],
        }


# the greedy carrier choice can strand a user on tight instances; retry with shuffled tie order
PHASE1_RESTARTS = 64


def _phase1_assignment(
    cfg: NetworkConfig, counts: OneShotCounts, shuffle_seed: int | None = None
) -> list[ScheduleStep]:
    """Phase-1 steps over all fragments, in (user set, relay set, fragment) order.

    In each step the relays carrying user symbols form a size-psi set that
    caches an undelivered symbol for every served user. Ties go to the set
    leaving the scarcest user the most spare symbols, then to the least
    loaded relays, then to lexicographic order.
    """
    K, M, t, psi = cfg.K, cfg.M, counts.cached_relays, counts.psi
    frag = counts.frag_factor
    labels = list(combinations(range(1, M + 1), t))
    remaining = {
        (k, f): {T: [s for s in file_symbols(cfg, k, frag) if s.rn_subset == T and s.fragment == f]
                 for T in labels}
        for k in range(1, K + 1)
        for f in range(1, frag + 1)
    }
    quota = counts.N_UE * frag
    delivered = {k: 0 for k in range(1, K + 1)}
    carriers = list(combinations(range(1, M + 1), psi)) if psi > 0 else []
    if shuffle_seed is not None:
        np.random.default_rng(shuffle_seed).shuffle(carriers)
    supersets = {c: [T for T in labels if set(c) <= set(T)] for c in carriers}
    load = {m: 0 for m in range(1, M + 1)}
    steps: list[ScheduleStep] = []

    def supply(k: int, cand: tuple[int, ...], f: int) -> int:
        pool = remaining[(k, f)]
        return sum(len(pool[T]) for T in supersets[cand])

    def take(k: int, cand: tuple[int, ...], f: int) -> SymbolId | None:
        pool = remaining[(k, f)]
        found = [pool[T][0] for T in supersets[cand] if pool[T]]
        if not found:
            return None
        s = min(found)
        pool[s.rn_subset].remove(s)
        return s

    for S_U in combinations(range(1, K + 1), psi):
        for S_R in combinations(range(1, M + 1), t + 1):
            for f in range(1, frag + 1):
                rn_syms = {
                    m: SymbolId(K + m, tuple(r for r in S_R if r != m), S_U, f) for m in S_R
                }
                active = [k for k in S_U if delivered[k] < quota]
                best, best_key = (), None
                for cand in carriers:
                    stock = [supply(k, cand, f) for k in active]
                    hits = sum(1 for n in stock if n)
                    spare = min(stock, default=0)
                    key = (-hits, -min(spare, 2), sum(load[m] for m in cand), -spare)
                    if hits and (best_key is None or key < best_key):
                        best, best_key = cand, key
                ue_syms: dict[int, SymbolId] = {}
                for k in active if best else ():
                    s = take(k, best, f)
                    if s is not None:
                        ue_syms[k] = s
                        delivered[k] += 1
                if ue_syms:
                    for m in best:
                        load[m] += 1
                steps.append(
                    ScheduleStep(len(steps), 1, S_U, S_R, best if ue_syms else (), rn_syms, ue_syms)
                )
    short = {k: n for k, n in delivered.items() if n != quota}
    if short:
        raise AssertionError(f"phase-1 assignment delivered {short}, expected {quota} each")
    return steps


def build_schedule(cfg: NetworkConfig) -> DeliveryPlan:
    """Two-phase one-shot schedule for the worst-case demand.

    Phase 1 runs one step per (user set, relay set, fragment); phase 2 serves
    ``psi'`` users per step, cycling through users, until every file is done.
    """
    counts = subpacketize(cfg)
    frag = counts.frag_factor
    steps = None
    for shuffle_seed in [None, *range(PHASE1_RESTARTS)]:
        try:
            steps = _phase1_assignment(cfg, counts, shuffle_seed)
            break
        except AssertionError:
            continue
    if steps is None:
        raise AssertionError(f"no phase-1 assignment found for {cfg} after {PHASE1_RESTARTS} restarts")

    sent = {s for step in steps for s in step.ue_symbols.values()}
    queues = {
        k: [s for s in file_symbols(cfg, k, frag) if s not in sent] for k in range(1, cfg.K + 1)
    }
    n_phase2 = int(counts.T2 * frag)
    cursor = 0
    for _ in range(n_phase2):
        served = tuple(sorted((cursor + i) % cfg.K + 1 for i in range(counts.psi_prime)))
        cursor = (cursor + counts.psi_prime) % cfg.K
        ue_syms = {k: queues[k].pop(0) for k in served}
        steps.append(ScheduleStep(t=len(steps), phase=2, S_U=served, ue_symbols=ue_syms))
    leftover = {k: len(q) for k, q in queues.items() if q}
    if leftover:
        raise AssertionError(f"phase 2 left symbols undelivered: {leftover}")
    if len(steps) != counts.total_T:
        raise AssertionError(f"schedule has {len(steps)} steps, counts say {counts.total_T}")
    return DeliveryPlan(cfg, counts, steps)


def _nullspace(a: np.ndarray, rank_needed: int) -> np.ndarray:
    """Orthonormal basis (columns) of the right nullspace of ``a``."""
    n = a.shape[1]
    if a.shape[0] == 0:
        return np.eye(n, dtype=complex)
    _, sv, vh = np.linalg.svd(a)
    tol = max(a.shape) * (sv[0] if sv.size else 0.0) * RANK_RTOL
    rank = int(np.sum(sv > tol))
    if rank < rank_needed or sv.size == 0 or sv[0] == 0.0:
        raise DegenerateChannel(f"submatrix rank {rank} below {rank_needed}")
    return vh[rank:].conj().T


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def phase1_beamformers(step: ScheduleStep, channel: ChannelState) -> Frame:
    """Zero-force relay-bound symbols and user symbols at the other served users.

    A relay symbol is sent by the base station and the relays caching it; its
    coefficient vector is the nullspace direction closest to pure base-station
    transmission, so the intended relay hears it. A user symbol is sent by the
    carrier relays from the nullspace of the other served users' channels.
    """
    rows = [k - 1 for k in step.S_U]
    frame = Frame(step.t, {}, {})
    for m, sym in step.rn_symbols.items():
        helpers = [r for r in step.S_R if r != m]
        a = np.concatenate(
            [channel.g[rows, None], channel.H[np.ix_(rows, [r - 1 for r in helpers])]], axis=1
        )
        basis = _nullspace(a, len(rows))
        v = basis @ basis[0].conj()
        if abs(v[0]) < RANK_RTOL:
            raise DegenerateChannel("relay symbol cannot reach its relay")
        v = _unit(v)
        frame.nu[sym] = complex(v[0])
        for r, c in zip(helpers, v[1:]):
            frame.beta[(sym, r)] = complex(c)
    carriers = [r - 1 for r in step.S_R_prime]
    for k, sym in step.ue_symbols.items():
        others = [u - 1 for u in step.S_U if u != k]
        if not others:
            v = _unit(np.ones(len(carriers), dtype=complex))
        else:
            basis = _nullspace(channel.H[np.ix_(others, carriers)], len(others))
            v = _unit(basis[:, 0])
        for r, c in zip(step.S_R_prime, v):
            frame.beta[(sym, r)] = complex(c)
    return frame


def phase2_beamformers(step: ScheduleStep, channel: ChannelState) -> Frame:
    """Cooperative base-station and relay zero-forcing to the served users.

    Each user's symbol uses the base station plus the relays caching it,
    steered within the nullspace of the other served users towards its user.
    """
    frame = Frame(step.t, {}, {})
    for k, sym in step.ue_symbols.items():
        relays = [r - 1 for r in sym.rn_subset]
        others = [u - 1 for u in step.S_U if u != k]

        def tx_row(u: int) -> np.ndarray:
            return np.concatenate([[channel.g[u]], channel.H[u, relays]])

        a = np.array([tx_row(u) for u in others]).reshape(len(others), 1 + len(relays))
        basis = _nullspace(a, len(others))
        v = basis @ (basis.conj().T @ tx_row(k - 1).conj())
        if np.linalg.norm(v) < RANK_RTOL * np.linalg.norm(tx_row(k - 1)):
            raise DegenerateChannel(f"user {k} lies in the span of the other served users")
        v = _unit(v)
        frame.nu[sym] = complex(v[0])
        for r, c in zip(sym.rn_subset, v[1:]):
            frame.beta[(sym, r)] = complex(c)
    return frame


def plan_frames(plan: DeliveryPlan, channels: list[ChannelState]) -> list[Frame]:
    return [
        (phase1_beamformers if step.phase == 1 else phase2_beamformers)(step, ch)
        for step, ch in zip(plan.steps, channels)
    ]


def rn_phase1_counts(plan: DeliveryPlan) -> dict[int, int]:
    """Uncached symbols each relay receives during phase 1."""
    counts = {m: 0 for m in range(1, plan.cfg.M + 1)}
    for step in plan.phase1:
        for m in step.rn_symbols:
            counts[m] += 1
    return counts


def rn_transmit_counts(plan: DeliveryPlan) -> dict[int, int]:
    """Phase-1 steps in which each relay carries user symbols."""
    counts = {m: 0 for m in range(1, plan.cfg.M + 1)}
    for step in plan.phase1:
        if step.ue_symbols:
            for m in step.S_R_prime:
                counts[m] += 1
    return counts


@dataclass
class StepReport:
    t: int
    receiver: str
    desired_ratio: float
    interference_ratio: float
    passed: bool


@dataclass
class OneShotTrace:
    plan: DeliveryPlan
    channels: list[ChannelState]
    frames: list[Frame]
    step_reports: list[StepReport]
    redraws: int = 0

    @property
    def T(self) -> int:
        return len(self.frames)

    @property
    def ndt(self) -> Fraction:
        c = self.plan.counts
        return Fraction(self.T, c.frag_factor * c.symbols_per_file)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.step_reports)

    def to_dict(self) -> dict:
        return {
            "scheme": "OneShot",
            "plan": self.plan.to_dict(),
            "T": self.T,
            "ndt": f"{self.ndt.numerator}/{self.ndt.denominator}",
            "redraws": self.redraws,
            "passed": self.passed,
            "failed_steps": [r.t for r in self.step_reports if not r.passed],
        }


def receiver_row(frame: Frame, channel: ChannelState, kind: str, index: int, cache=()) -> dict:
    """Effective coefficient of every in-flight symbol at one receiver and one use."""
    row: dict = {}
    if kind == "UE":
        for sym, v in frame.nu.items():
            row[sym] = row.get(sym, 0) + channel.g[index - 1] * v
        for (sym, m), v in frame.beta.items():
            row[sym] = row.get(sym, 0) + channel.H[index - 1, m - 1] * v
    else:
        for sym, v in frame.nu.items():
            if sym not in cache:
                row[sym] = row.get(sym, 0) + channel.f[index - 1] * v
    return row


def check_step(
    step: ScheduleStep,
    frame: Frame,
    channel: ChannelState,
    placement: dict[int, set[SymbolId]],
    desired_tol: float = 1e-6,
    interference_tol: float = 1e-9,
) -> list[StepReport]:
    """Each served receiver must see its symbol alone within one channel use."""
    served = [("UE", k, s) for k, s in step.ue_symbols.items()]
    served += [("RN", m, s) for m, s in step.rn_symbols.items()]
    out = []
    for kind, idx, sym in served:
        cache = placement[idx] if kind == "RN" else ()
        row = receiver_row(frame, channel, kind, idx, cache)
        norm = float(np.sqrt(sum(abs(v) ** 2 for v in row.values())))
        if norm == 0.0:
            out.append(StepReport(step.t, f"{kind}{idx}", 0.0, 0.0, False))
            continue
        want = abs(row.get(sym, 0)) / norm
        leak = max((abs(v) / norm for s, v in row.items() if s != sym), default=0.0)
        ok = want > desired_tol and leak < interference_tol
        out.append(StepReport(step.t, f"{kind}{idx}", want, leak, ok))
    return out


def run_oneshot(cfg: NetworkConfig, seed: int, max_redraws: int = 16) -> OneShotTrace:
    """Build the schedule, draw one channel per step, beamform and check every step."""
    plan = build_schedule(cfg)
    placement = cache_placement(cfg, plan.counts.frag_factor)
    rng = np.random.default_rng(seed)
    channels, frames, reports, redraws = [], [], [], 0
    for step in plan.steps:
        build = phase1_beamformers if step.phase == 1 else phase2_beamformers
        for _ in range(max_redraws + 1):
            ch = draw_state(rng, step.t, cfg.K, cfg.M)
            try:
                frame = build(step, ch)
                break
            except DegenerateChannel:
                redraws += 1
        else:
            raise TooManyRedraws(f"{max_redraws} consecutive degenerate draws at t={step.t}")
        channels.append(ch)
        frames.append(frame)
        reports.extend(check_step(step, frame, ch, placement))
    return OneShotTrace(plan, channels, frames, reports, redraws)
