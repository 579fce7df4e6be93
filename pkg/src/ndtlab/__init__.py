"""Delivery-time analysis for cache-aided relay networks.

Exact converse bounds, one-shot and interference-alignment achievability,
numerical certification of the schemes over random channels, and gap sweeps.
"""

from __future__ import annotations

from .bounds import Envelope, lower_bound, lower_convex_envelope, optimal_tradeoff_closed
from .core import (
    ChannelState,
    DegenerateChannel,
    DomainError,
    Frame,
    InvalidConfig,
    MissingEndpoint,
    NDTError,
    NetworkConfig,
    Receiver,
    SchemeLabel,
    SchemePoint,
    ShapeMismatch,
    TooManyRedraws,
    UnsupportedScheme,
    discrete_cache_grid,
    validate_config,
)
from .gap import GapReport, empirical_gap, gap_sweep, oneshot_envelope
from .ia import IA_POINTS, ia22_run, ia31_run
from .oneshot import build_schedule, delta_man, delta_os, run_oneshot
from .verify import check_decodability, draw_channels, effective_matrix

__all__ = [
    "ChannelState",
    "DegenerateChannel",
    "DomainError",
    "Envelope",
    "Frame",
    "GapReport",
    "IA_POINTS",
    "InvalidConfig",
    "MissingEndpoint",
    "NDTError",
    "NetworkConfig",
    "Receiver",
    "SchemeLabel",
    "SchemePoint",
    "ShapeMismatch",
    "TooManyRedraws",
    "UnsupportedScheme",
    "build_schedule",
    "check_decodability",
    "delta_man",
    "delta_os",
    "discrete_cache_grid",
    "draw_channels",
    "effective_matrix",
    "empirical_gap",
    "gap_sweep",
    "ia22_run",
    "ia31_run",
    "lower_bound",
    "lower_convex_envelope",
    "oneshot_envelope",
    "optimal_tradeoff_closed",
    "run_oneshot",
    "validate_config",
]
