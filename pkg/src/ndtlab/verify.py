"""Linear-algebra certification of delivery schemes over random channels."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from .core import ChannelState, DomainError, Frame, Receiver, ShapeMismatch

RANK_RTOL = 1e-10
COND_LIMIT = 1e10


def draw_state(rng: np.random.Generator, t: int, K: int, M: int) -> ChannelState:
    """One channel use with i.i.d. CN(0, 1) entries."""

    def cn(*shape):
        return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)

    return ChannelState(t=t, f=cn(M), g=cn(K), H=cn(K, M))


def draw_channels(seed: int, T: int, K: int, M: int) -> list[ChannelState]:
    if min(T, K, M) < 1:
        raise DomainError("T, K and M must all be positive")
    rng = np.random.default_rng(seed)
    return [draw_state(rng, t, K, M) for t in range(T)]


@dataclass
class EffectiveMatrix:
    """Rows are channel uses, columns are symbols, entries are received coefficients."""

    receiver: Receiver
    symbols: list
    data: np.ndarray

    def column(self, sym: Hashable) -> np.ndarray:
        return self.data[:, self.symbols.index(sym)]

    def rows(self, selector) -> "EffectiveMatrix":
        return EffectiveMatrix(self.receiver, self.symbols, self.data[selector])


def effective_matrix(
    frames: Sequence[Frame],
    channels: Sequence[ChannelState],
    receiver: Receiver,
    symbols: Sequence[Hashable] | None = None,
    cache: Iterable[Hashable] = (),
) -> EffectiveMatrix:
    """Assemble what ``receiver`` observes across all channel uses.

    A user sees ``g_k nu + sum_m h_km beta_m``; a relay sees ``f_m nu`` and
    subtracts everything in its own cache, so those columns are zero.
    """
    if len(frames) != len(channels):
        raise ShapeMismatch(f"{len(frames)} frames but {len(channels)} channel uses")
    if symbols is None:
        seen: dict = {}
        for frame in frames:
            for sym in sorted(frame.symbols(), key=repr):
                seen.setdefault(sym, None)
        symbols = list(seen)
    symbols = list(symbols)
    col = {sym: i for i, sym in enumerate(symbols)}
    cached = set(cache)
    data = np.zeros((len(frames), len(symbols)), dtype=complex)
    for row, (frame, ch) in enumerate(zip(frames, channels)):
        if receiver.kind == "UE":
            if not 1 <= receiver.index <= ch.K:
                raise ShapeMismatch(f"{receiver} outside K={ch.K}")
            k = receiver.index - 1
            for sym, v in frame.nu.items():
                if sym in col:
                    data[row, col[sym]] += ch.g[k] * v
            for (sym, m), v in frame.beta.items():
                if not 1 <= m <= ch.M:
                    raise ShapeMismatch(f"relay {m} outside M={ch.M}")
                if sym in col:
                    data[row, col[sym]] += ch.H[k, m - 1] * v
        elif receiver.kind == "RN":
            if not 1 <= receiver.index <= ch.M:
                raise ShapeMismatch(f"{receiver} outside M={ch.M}")
            m = receiver.index - 1
            for sym, v in frame.nu.items():
                if sym in col and sym not in cached:
                    data[row, col[sym]] += ch.f[m] * v
        else:
            raise ShapeMismatch(f"unknown receiver kind {receiver.kind!r}")
    return EffectiveMatrix(receiver, symbols, data)


@dataclass
class ZeroForcingReport:
    max_residual: float
    worst: tuple | None
    passed: bool


def check_zero_forcing(
    matrices: Mapping[Receiver, EffectiveMatrix],
    zf_map: Mapping[Hashable, Iterable[Receiver]],
    tol: float = 1e-9,
) -> ZeroForcingReport:
    """Every symbol must vanish at the receivers it is zero-forced to.

    Residuals are relative to the symbol's largest coefficient over all given
    receivers; an all-zero column counts as residual 0.
    """
    if tol <= 0:
        raise DomainError("tol must be positive")
    worst, worst_at = 0.0, None
    for sym, targets in zf_map.items():
        scale = max(
            (np.abs(mat.column(sym)).max() for mat in matrices.values() if sym in mat.symbols),
            default=0.0,
        )
        if scale == 0.0:
            continue
        for rx in targets:
            residual = float(np.abs(matrices[rx].column(sym)).max() / scale)
            if residual > worst:
                worst, worst_at = residual, (sym, rx)
    return ZeroForcingReport(worst, worst_at, worst < tol)


@dataclass
class AlignmentReport:
    max_residual: float
    vacuous: list = field(default_factory=list)
    passed: bool = True


def check_alignment(
    matrix: EffectiveMatrix, groups: Sequence[Sequence[Hashable]], tol: float = 1e-10
) -> AlignmentReport:
    """Each group's columns must be equal entrywise, not merely proportional."""
    worst, vacuous = 0.0, []
    for group in groups:
        if not group:
            raise DomainError("alignment groups must be nonempty")
        cols = np.stack([matrix.column(s) for s in group], axis=1)
        scale = np.abs(cols).max()
        if scale == 0.0:
            vacuous.append(tuple(group))
            continue
        spread = np.abs(cols - cols[:, :1]).max() / scale
        worst = max(worst, float(spread))
    return AlignmentReport(worst, vacuous, worst < tol and not vacuous)


@dataclass
class DecodabilityReport:
    receiver: Receiver
    desired_rank_ok: bool
    alignment_ok: bool
    zf_residual_max: float
    grouped_condition_number: float
    rank: int
    columns: int
    verdict: str

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self) -> dict:
        return {
            "receiver": str(self.receiver),
            "desired_rank_ok": self.desired_rank_ok,
            "alignment_ok": self.alignment_ok,
            "zf_residual_max": self.zf_residual_max,
            "grouped_condition_number": self.grouped_condition_number,
            "rank": self.rank,
            "columns": self.columns,
            "verdict": self.verdict,
        }


def grouped_matrix(
    matrix: EffectiveMatrix, desired: Sequence[Hashable], groups: Sequence[Sequence[Hashable]]
) -> np.ndarray:
    """Desired columns followed by one representative per aligned group."""
    cols = [matrix.column(s) for s in desired] + [matrix.column(g[0]) for g in groups]
    return np.stack(cols, axis=1) if cols else np.zeros((matrix.data.shape[0], 0), complex)


def numerical_rank(a: np.ndarray) -> tuple[int, float]:
    """Rank with threshold ``max_dim * sigma_max * 1e-10`` and the 2-norm condition number."""
    if a.size == 0:
        return 0, float("inf")
    sv = np.linalg.svd(a, compute_uv=False)
    if sv[0] == 0.0:
        return 0, float("inf")
    rank = int(np.sum(sv > max(a.shape) * sv[0] * RANK_RTOL))
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 and len(sv) == a.shape[1] else float("inf")
    return rank, cond


def check_decodability(
    matrix: EffectiveMatrix,
    desired: Sequence[Hashable],
    groups: Sequence[Sequence[Hashable]] = (),
    zf_tol: float = 1e-9,
    align_tol: float = 1e-10,
) -> DecodabilityReport:
    """Decide whether the desired symbols can be solved for.

    The grouped matrix (unit-norm columns) must have full column rank and a
    bounded condition number, aligned groups must carry equal columns, and
    every other column must be numerically zero.
    """
    desired = list(desired)
    grouped_syms = {s for g in groups for s in g}
    if grouped_syms & set(desired):
        raise DomainError("desired symbols may not appear in aligned groups")

    a = grouped_matrix(matrix, desired, groups)
    norms = np.linalg.norm(a, axis=0)
    unit = a / np.where(norms > 0, norms, 1.0)
    rank, cond = numerical_rank(unit)
    if np.any(norms == 0):
        rank = min(rank, int(np.sum(norms > 0)))
    rank_ok = rank == a.shape[1] and cond < COND_LIMIT

    align = check_alignment(matrix, [g for g in groups if len(g) > 1], align_tol)

    scale = float(np.abs(matrix.data).max()) if matrix.data.size else 0.0
    leftover = [i for i, s in enumerate(matrix.symbols) if s not in grouped_syms and s not in desired]
    zf_residual = 0.0
    if leftover and scale > 0:
        zf_residual = float(np.abs(matrix.data[:, leftover]).max() / scale)

    ok = rank_ok and align.passed and zf_residual < zf_tol
    return DecodabilityReport(
        receiver=matrix.receiver,
        desired_rank_ok=rank_ok,
        alignment_ok=align.passed,
        zf_residual_max=zf_residual,
        grouped_condition_number=cond,
        rank=rank,
        columns=a.shape[1],
        verdict="pass" if ok else "fail",
    )


def round_trip_error(
    matrix: EffectiveMatrix,
    desired: Sequence[Hashable],
    groups: Sequence[Sequence[Hashable]] = (),
    rng: np.random.Generator | None = None,
) -> float:
    """Transmit random symbols through ``matrix`` and decode the desired ones.

    Returns the relative error of the recovered desired symbols.
    """
    rng = rng or np.random.default_rng(0)
    n = len(matrix.symbols)
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    y = matrix.data @ x
    a = grouped_matrix(matrix, desired, groups)
    z, *_ = np.linalg.lstsq(a, y, rcond=None)
    truth = np.array([x[matrix.symbols.index(s)] for s in desired])
    return float(np.linalg.norm(z[: len(desired)] - truth) / np.linalg.norm(truth))


def measure_ndt(total_T: int, symbols_per_file: int, frag_factor: int = 1) -> Fraction:
    if total_T <= 0 or symbols_per_file <= 0 or frag_factor <= 0:
        raise DomainError("inputs must be positive")
    return Fraction(total_T, frag_factor * symbols_per_file)


def trial_seed(seed: int, trial: int) -> int:
    """Independent 64-bit seed for trial ``trial`` of a run seeded with ``seed``."""
    if seed < 0 or trial < 0:
        raise DomainError("seed and trial index must be non-negative")
    words = np.random.SeedSequence([seed, trial]).generate_state(2, np.uint32)
    return int(words[0]) << 32 | int(words[1])
