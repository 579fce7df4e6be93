"""Explicit alignment precoders for the two small networks that one-shot delivery cannot reach.

``(K, M) = (3, 1)`` at ``mu = 4/5`` delivers 5 symbols per file in 8 channel
uses; ``(K, M) = (2, 2)`` at ``mu = 4/9`` delivers 9 symbols per file in 12.
Users request files ``1..K`` and relay ``m`` requests file ``K + m``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, NamedTuple

import numpy as np

from .core import (
    ChannelState,
    DegenerateChannel,
    DomainError,
    Frame,
    NetworkConfig,
    Receiver,
    TooManyRedraws,
    rn,
    ue,
)
from .verify import (
    DecodabilityReport,
    EffectiveMatrix,
    ZeroForcingReport,
    check_decodability,
    check_zero_forcing,
    draw_state,
    effective_matrix,
    measure_ndt,
)

DEGENERACY_RTOL = 1e-8
MAX_REDRAWS = 16


class SymbolRef(NamedTuple):
    """Symbol ``index`` of file ``file``."""

    file: int
    index: int

    def __str__(self) -> str:
        return f"eta[{self.file},{self.index}]"


@dataclass
class IAPrecoderFrame(Frame):
    random_factors: dict[SymbolRef, complex] = field(default_factory=dict)


@dataclass
class ReceiverSpec:
    """What a receiver wants, what it may lump together, and what it already holds."""

    desired: list
    groups: list[list] = field(default_factory=list)
    cache: set = field(default_factory=set)


@dataclass
class AlignmentSpec:
    receivers: dict[Receiver, ReceiverSpec]
    zf_map: dict[SymbolRef, list[Receiver]]


@dataclass
class SchemeTrace:
    """A complete scheme run: channels, coefficients, per-receiver verdicts."""

    name: str
    K: int
    M: int
    mu: Fraction
    symbols_per_file: int
    channels: list[ChannelState]
    frames: list[Frame]
    spec: AlignmentSpec
    frag_factor: int = 1
    redraws: int = 0
    reports: dict[Receiver, DecodabilityReport] = field(default_factory=dict)
    zf_report: ZeroForcingReport | None = None
    extra_checks: dict[str, bool] = field(default_factory=dict)

    @property
    def T(self) -> int:
        return len(self.frames)

    @property
    def ndt(self) -> Fraction:
        return measure_ndt(self.T, self.symbols_per_file, self.frag_factor)

    @property
    def passed(self) -> bool:
        zf_ok = self.zf_report is None or self.zf_report.passed
        return zf_ok and all(r.passed for r in self.reports.values()) and all(
            self.extra_checks.values()
        )

    def matrices(self) -> dict[Receiver, EffectiveMatrix]:
        symbols = sorted({s for f in self.frames for s in f.symbols()})
        return {
            rx: effective_matrix(self.frames, self.channels, rx, symbols, spec.cache)
            for rx, spec in self.spec.receivers.items()
        }

    def to_dict(self) -> dict:
        def cplx(z: complex) -> list[float]:
            return [float(z.real), float(z.imag)]

        return {
            "scheme": self.name,
            "K": self.K,
            "M": self.M,
            "mu": f"{self.mu.numerator}/{self.mu.denominator}",
            "T": self.T,
            "symbols_per_file": self.symbols_per_file,
            "frag_factor": self.frag_factor,
            "ndt": f"{self.ndt.numerator}/{self.ndt.denominator}",
            "redraws": self.redraws,
            "passed": self.passed,
            "reports": [r.to_dict() for r in self.reports.values()],
            "frames": [
                {
                    "t": f.t,
                    "nu": [[str(s), cplx(v)] for s, v in sorted(f.nu.items(), key=lambda x: str(x[0]))],
                    "beta": [
                        [str(s), m, cplx(v)]
                        for (s, m), v in sorted(f.beta.items(), key=lambda x: str(x[0]))
                    ],
                }
                for f in self.frames
            ],
        }


def _require(value: complex, *scales: complex, what: str) -> complex:
    """Reject ``value`` when it is negligible against the magnitudes it was built from."""
    ref = max((abs(s) for s in scales), default=1.0)
    if abs(value) < DEGENERACY_RTOL * ref:
        raise DegenerateChannel(f"{what} vanishes for this channel")
    return value


# ---------------------------------------------------------------------------
# (K, M) = (3, 1), mu = 4/5


def ia31_precoders(channel: ChannelState) -> IAPrecoderFrame:
    """Precoders for one channel use of the three-user single-relay scheme.

    Each file has five symbols; the relay caches symbols 1-4 of every file.
    Symbols 1-3 of each user file are zero-forced at one other user and
    symbols 4 and 5 are aligned in three chains anchored at the relay file's
    single uncached symbol.
    """
    if channel.K != 3 or channel.M != 1:
        raise DomainError("scheme needs K=3 users and M=1 relay")
    g = {k: complex(channel.g[k - 1]) for k in (1, 2, 3)}
    h = {k: complex(channel.H[k - 1, 0]) for k in (1, 2, 3)}
    scale = max(abs(v) for v in (*g.values(), *h.values()))
    for k in (1, 2, 3):
        _require(g[k], scale, what=f"g{k}")
        _require(h[k], scale, what=f"h{k}1")

    def w(r: int) -> int:
        return (r - 1) % 3 + 1

    # j[r] is zero exactly when users r+1 and r+2 see base station and relay in the same ratio
    j = {
        r: _require(
            g[w(r + 1)] * h[w(r + 2)] - g[w(r + 2)] * h[w(r + 1)],
            g[w(r + 1)] * h[w(r + 2)],
            g[w(r + 2)] * h[w(r + 1)],
            what=f"j{r}3",
        )
        for r in (1, 2, 3)
    }
    anchor = j[1] * j[2] * j[3] * g[1] * g[2] * g[3] * h[1] * h[2] * h[3]

    nu: dict[SymbolRef, complex] = {SymbolRef(4, 5): anchor}
    beta: dict[tuple[SymbolRef, int], complex] = {}
    for r in (1, 2, 3):
        a, b, c = r, w(r + 1), w(r + 2)
        beta[(SymbolRef(a, 4), 1)] = anchor * g[c] / h[c]
        chain = anchor * g[c] * h[b]
        nu[SymbolRef(c, 5)] = chain / (h[c] * g[b])

        scale2 = chain / j[a]
        nu[SymbolRef(a, 2)] = scale2
        beta[(SymbolRef(a, 2), 1)] = -scale2 * g[c] / h[c]

        scale3 = chain * g[a] / (g[b] * j[b])
        nu[SymbolRef(b, 3)] = -scale3
        beta[(SymbolRef(b, 3), 1)] = scale3 * g[c] / h[c]

        scale1 = chain * g[a] / (h[c] * j[c])
        nu[SymbolRef(c, 1)] = scale1 * h[b] / g[b]
        beta[(SymbolRef(c, 1), 1)] = -scale1
    return IAPrecoderFrame(channel.t, nu, beta)


def ia31_spec() -> AlignmentSpec:
    def w(r: int) -> int:
        return (r - 1) % 3 + 1

    S = SymbolRef
    receivers: dict[Receiver, ReceiverSpec] = {}
    zf_map: dict[SymbolRef, list[Receiver]] = {}
    for k in (1, 2, 3):
        b, c = w(k + 1), w(k + 2)
        receivers[ue(k)] = ReceiverSpec(
            desired=[S(k, j) for j in range(1, 6)],
            groups=[
                [S(4, 5), S(b, 4)],
                [S(c, 4), S(c, 2), S(b, 5)],
                [S(c, 5), S(b, 3), S(c, 1)],
            ],
        )
        for sym in (S(b, 1), S(b, 2), S(c, 3)):
            zf_map.setdefault(sym, []).append(ue(k))
    cache = {S(i, j) for i in range(1, 5) for j in range(1, 5)}
    receivers[rn(1)] = ReceiverSpec(
        desired=[S(4, 5)], groups=[[S(i, 5)] for i in (1, 2, 3)], cache=cache
    )
    return AlignmentSpec(receivers, zf_map)


# ---------------------------------------------------------------------------
# (K, M) = (2, 2), mu = 4/9


def _unit_factors(rng: np.random.Generator, symbols: list[SymbolRef]) -> dict[SymbolRef, complex]:
    phases = rng.uniform(0.0, 2.0 * np.pi, size=len(symbols))
    return {s: complex(np.exp(1j * p)) for s, p in zip(symbols, phases)}


IA22_FACTOR_SYMBOLS = [SymbolRef(i, j) for i in (1, 2) for j in (1, 2, 5, 6)]


def ia22_precoders(channel: ChannelState, factor_seed: int) -> IAPrecoderFrame:
    """Precoders for one channel use of the two-user two-relay scheme.

    Each file has nine symbols; relay 1 caches symbols 1-4 and relay 2 caches
    symbols 5-8 of every file, symbol 9 is uncached. Random unit-modulus
    factors separate the pairs of user symbols that share a zero-forcing
    direction.
    """
    if channel.K != 2 or channel.M != 2:
        raise DomainError("scheme needs K=2 users and M=2 relays")
    g = {k: complex(channel.g[k - 1]) for k in (1, 2)}
    h = {(k, m): complex(channel.H[k - 1, m - 1]) for k in (1, 2) for m in (1, 2)}
    scale = max(abs(v) for v in (*g.values(), *h.values()))
    for k in (1, 2):
        _require(g[k], scale, what=f"g{k}")
        for m in (1, 2):
            _require(h[(k, m)], scale, what=f"h{k}{m}")
    l13 = _require(g[1] * h[(2, 1)] - g[2] * h[(1, 1)], g[1] * h[(2, 1)], g[2] * h[(1, 1)], what="l13")
    l23 = _require(g[2] * h[(1, 2)] - g[1] * h[(2, 2)], g[2] * h[(1, 2)], g[1] * h[(2, 2)], what="l23")

    c = _unit_factors(np.random.default_rng(factor_seed), IA22_FACTOR_SYMBOLS)
    S = SymbolRef
    nu: dict[SymbolRef, complex] = {}
    b1: dict[SymbolRef, complex] = {}
    b2: dict[SymbolRef, complex] = {}

    def other(k: int) -> int:
        return 2 if k == 1 else 1

    for k in (1, 2):
        nu[S(other(k), 9)] = l13 * l23 * h[(k, 1)]
        nu[S(5 - k, 9)] = l13 * l23 * h[(k, 1)] * h[(k, 2)] * h[(other(k), 2)]

    for k in (1, 2):
        p = other(k)
        sign = 1 if k == 1 else -1
        own9, cross9 = nu[S(p, 9)], nu[S(k + 2, 9)]
        for j in (1, 2):
            nu[S(p, j)] = c[S(p, j)] * h[(k, 1)]
            b1[S(p, j)] = -c[S(p, j)] * g[k]
            nu[S(p, 4 + j)] = -c[S(p, 4 + j)] * h[(k, 2)]
            b2[S(p, 4 + j)] = c[S(p, 4 + j)] * g[k]
        b1[S(p, 3)] = nu[S(5 - k, 9)] * g[k] / h[(k, 1)]
        b1[S(p, 4)] = own9 * g[k] / h[(k, 1)]
        b2[S(p, 7)] = nu[S(5 - k, 9)] * g[k] / h[(k, 2)]
        b2[S(p, 8)] = cross9 * g[k] / h[(k, 2)]

        for j, chain in ((9 - 2 * k, own9), (10 - 2 * k, cross9)):
            amp = sign * chain * g[k] / l23
            nu[S(3, j)] = -amp * h[(p, 2)]
            b2[S(3, j)] = amp * g[p]
        for j, chain in ((5 - 2 * k, own9), (6 - 2 * k, cross9)):
            amp = sign * chain * g[k] / l13
            nu[S(4, j)] = amp * h[(p, 1)]
            b1[S(4, j)] = -amp * g[p]

    beta = {(s, 1): v for s, v in b1.items()}
    beta.update({(s, 2): v for s, v in b2.items()})
    return IAPrecoderFrame(channel.t, nu, beta, random_factors=c)


def ia22_spec() -> AlignmentSpec:
    S = SymbolRef
    receivers: dict[Receiver, ReceiverSpec] = {}
    zf_map: dict[SymbolRef, list[Receiver]] = {}
    for k in (1, 2):
        p = 2 if k == 1 else 1
        receivers[ue(k)] = ReceiverSpec(
            desired=[S(k, j) for j in range(1, 10)],
            groups=[
                [S(p, 9), S(4, 5 - 2 * k), S(p, 4), S(3, 9 - 2 * k)],
                [S(k + 2, 9), S(4, 6 - 2 * k), S(p, 8), S(3, 10 - 2 * k)],
                [S(5 - k, 9), S(p, 3), S(p, 7)],
            ],
        )
        zeroed = [S(p, 1), S(p, 2), S(p, 5), S(p, 6)]
        zeroed += [S(3, 2 * k + 3), S(3, 2 * k + 4), S(4, 2 * k - 1), S(4, 2 * k)]
        for sym in zeroed:
            zf_map.setdefault(sym, []).append(ue(k))
    for m in (1, 2):
        held = range(1, 5) if m == 1 else range(5, 9)
        cache = {S(i, j) for i in range(1, 5) for j in held}
        wanted = [S(2 + m, j) for j in range(1, 10) if j not in held]
        others = [S(i, j) for i in (1, 2) for j in (1, 2, 5, 6, 9) if j not in held]
        others.append(S(5 - m, 9))
        receivers[rn(m)] = ReceiverSpec(desired=wanted, groups=[[s] for s in others], cache=cache)
    return AlignmentSpec(receivers, zf_map)


# ---------------------------------------------------------------------------
# runs


def _build_frames(
    seed: int,
    T: int,
    K: int,
    M: int,
    make: Callable[[ChannelState, int], Frame],
) -> tuple[list[ChannelState], list[Frame], int]:
    """Draw channels use by use, redrawing any use whose construction is degenerate."""
    rng = np.random.default_rng(seed)
    channels, frames, redraws = [], [], 0
    for t in range(T):
        for attempt in range(MAX_REDRAWS + 1):
            ch = draw_state(rng, t, K, M)
            try:
                frames.append(make(ch, t))
                channels.append(ch)
                break
            except DegenerateChannel:
                redraws += 1
        else:
            raise TooManyRedraws(f"{MAX_REDRAWS} consecutive degenerate draws at t={t}")
    return channels, frames, redraws


def _evaluate(trace: SchemeTrace, zf_tol: float = 1e-9, align_tol: float = 1e-10) -> SchemeTrace:
    mats = trace.matrices()
    trace.zf_report = check_zero_forcing(
        {rx: m for rx, m in mats.items() if rx.kind == "UE"}, trace.spec.zf_map, zf_tol
    )
    for rx, spec in trace.spec.receivers.items():
        trace.reports[rx] = check_decodability(mats[rx], spec.desired, spec.groups, zf_tol, align_tol)
    return trace


def _run(
    name: str, seed: int, K: int, M: int, mu: Fraction, per_file: int, T: int,
    make: Callable[[ChannelState, int], Frame], spec: AlignmentSpec,
    extra: Callable[[SchemeTrace], dict[str, bool]] | None = None,
) -> SchemeTrace:
    total_redraws = 0
    trace = None
    for attempt in range(MAX_REDRAWS):
        sub_seed = seed if attempt == 0 else int(np.random.SeedSequence([seed, attempt]).generate_state(1)[0])
        channels, frames, redraws = _build_frames(sub_seed, T, K, M, make)
        total_redraws += redraws
        trace = SchemeTrace(name, K, M, mu, per_file, channels, frames, spec, redraws=total_redraws)
        _evaluate(trace)
        if extra is not None:
            trace.extra_checks = extra(trace)
        if trace.passed:
            return trace
        total_redraws += 1
        trace.redraws = total_redraws
    return trace


def _rn31_first_uses(trace: SchemeTrace) -> dict[str, bool]:
    spec = trace.spec.receivers[rn(1)]
    mat = trace.matrices()[rn(1)].rows(slice(0, 4))
    report = check_decodability(mat, spec.desired, spec.groups)
    return {"rn_rank_within_4_uses": report.passed}


def ia31_run(seed: int) -> SchemeTrace:
    """Eight channel uses of the (3, 1) scheme; the relay is done after four."""
    return _run(
        "IA31", seed, 3, 1, Fraction(4, 5), 5, 8,
        lambda ch, t: ia31_precoders(ch), ia31_spec(), _rn31_first_uses,
    )


def _factor_seed(seed: int, t: int) -> int:
    return int(np.random.SeedSequence([seed, t, 22]).generate_state(1)[0])


def ia22_run(seed: int) -> SchemeTrace:
    """Twelve channel uses of the (2, 2) scheme."""
    return _run(
        "IA22", seed, 2, 2, Fraction(4, 9), 9, 12,
        lambda ch, t: ia22_precoders(ch, _factor_seed(seed, t)), ia22_spec(),
    )


IA_POINTS = {
    (3, 1): (Fraction(4, 5), Fraction(8, 5)),
    (2, 2): (Fraction(4, 9), Fraction(4, 3)),
}


def ia_point(cfg: NetworkConfig) -> Fraction | None:
    """NDT reached by an alignment scheme at ``cfg``, if one exists."""
    point = IA_POINTS.get((cfg.K, cfg.M))
    if point and point[0] == cfg.mu:
        return point[1]
    return None
