"""Command-line front end: bounds, trade-off curves, scheme simulation and gap sweeps.

Exit codes: 0 ok, 2 invalid configuration, 3 I/O failure, 4 no scheme covers
the requested point, 5 a verification or gap assertion failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import re
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .bounds import achievable_dof, lower_bound, optimal_tradeoff_closed
from .core import (
    InvalidConfig,
    NDTError,
    NetworkConfig,
    TooManyRedraws,
    UnsupportedScheme,
    format_fraction,
    validate_config,
)
from .gap import CONSTANT_GAP, constant_gap_sweep, gap_sweep, oneshot_envelope
from .ia import ia22_run, ia31_run, ia_point
from .oneshot import run_oneshot
from .verify import trial_seed

SCHEMA = "ndt-lab/1"
EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_UNSUPPORTED, EXIT_ASSERT = 0, 2, 3, 4, 5
SEED_ENV = "NDT_SEED"

TRADEOFF_COLUMNS = ["mu_num", "mu_den", "lower_bound", "oneshot_envelope", "optimal_if_small", "dof"]
GAP_COLUMNS = ["K", "M", "mu_num", "mu_den", "achievable", "lower", "ratio", "bound", "source"]
TRIAL_COLUMNS = ["trial", "seed", "passed", "T", "ndt", "redraws"]

_FRACTION = re.compile(r"^\s*(\d+)\s*(?:/\s*(\d+)\s*)?$")


@dataclass(frozen=True)
class RunConfig:
    command: str
    K: int
    M: int
    N: int
    mu: Fraction | None
    grid: int
    trials: int
    seed: int
    out: str | None
    format: str


def parse_fraction(text: str) -> Fraction:
    """Accept ``a`` or ``a/b`` with non-negative integers; decimals are rejected."""
    match = _FRACTION.match(text)
    if not match:
        raise InvalidConfig("mu", f"expected a fraction like 4/5, got {text!r}")
    num, den = int(match.group(1)), int(match.group(2) or 1)
    if den == 0:
        raise InvalidConfig("mu", "zero denominator")
    return Fraction(num, den)


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise InvalidConfig("seed", f"{SEED_ENV}={raw!r} is not an integer") from None


def build_run_config(args: argparse.Namespace) -> RunConfig:
    mu = parse_fraction(args.mu) if args.mu is not None else None
    if args.command in ("bound", "simulate") and mu is None:
        raise InvalidConfig("mu", f"{args.command} needs --mu")
    seed = args.seed if args.seed is not None else _default_seed()
    if not 0 <= seed < 2**64:
        raise InvalidConfig("seed", "must be a 64-bit unsigned integer")
    if args.grid < 2:
        raise InvalidConfig("grid", "needs at least 2 points")
    if args.trials < 1:
        raise InvalidConfig("trials", "must be positive")
    n = args.n if args.n is not None else args.k + args.m
    cfg = NetworkConfig(args.k, args.m, mu if mu is not None else Fraction(0), n)
    validate_config(cfg)
    return RunConfig(args.command, args.k, args.m, n, mu, args.grid, args.trials, seed, args.out, args.format)


def _network(run: RunConfig, mu: Fraction | None = None) -> NetworkConfig:
    return NetworkConfig(run.K, run.M, run.mu if mu is None else mu, run.N)


def _csv_text(header: list[str], rows: list[list[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _json_text(payload: dict) -> str:
    return json.dumps({"schema": SCHEMA, **payload}, indent=2) + "\n"


def cmd_bound(run: RunConfig) -> tuple[str, int]:
    cfg = _network(run)
    value, witness = lower_bound(cfg)
    if run.format == "json":
        payload = {
            "command": "bound",
            "K": run.K,
            "M": run.M,
            "N": run.N,
            "mu": format_fraction(cfg.mu),
            "lower_bound": format_fraction(value),
            "witness": None
            if witness is None
            else {"ell": witness.ell, "s": witness.s, "s_bar": witness.s_bar},
        }
        return _json_text(payload), EXIT_OK
    where = "none (trivial bound 1)" if witness is None else f"ℓ={witness.ell},s={witness.s}"
    return f"{value} ({float(value)}), witness {where}\n", EXIT_OK


def tradeoff_rows(K: int, M: int, grid: int) -> list[list[str]]:
    """One row per uniform grid point; the envelope includes alignment corners where they exist."""
    envelope = oneshot_envelope(K, M, include_ia=True)
    rows = []
    for i in range(grid):
        mu = Fraction(i, grid - 1)
        cfg = NetworkConfig(K, M, mu)
        lower, _ = lower_bound(cfg)
        achievable = envelope(mu)
        optimal = format_fraction(optimal_tradeoff_closed(cfg)) if K + M <= 4 else ""
        rows.append([
            str(mu.numerator),
            str(mu.denominator),
            format_fraction(lower),
            format_fraction(achievable),
            optimal,
            format_fraction(achievable_dof(cfg, achievable)),
        ])
    return rows


def cmd_tradeoff(run: RunConfig) -> tuple[str, int]:
    rows = tradeoff_rows(run.K, run.M, run.grid)
    if run.format == "json":
        payload = {
            "command": "tradeoff",
            "K": run.K,
            "M": run.M,
            "rows": [dict(zip(TRADEOFF_COLUMNS, r)) for r in rows],
        }
        return _json_text(payload), EXIT_OK
    return _csv_text(TRADEOFF_COLUMNS, rows), EXIT_OK


def select_scheme(cfg: NetworkConfig) -> tuple[str, Callable[[int], object]]:
    """Pick the implemented scheme covering ``cfg`` or raise ``UnsupportedScheme``."""
    if ia_point(cfg) is not None:
        if (cfg.K, cfg.M) == (3, 1):
            return "IA31", ia31_run
        return "IA22", ia22_run
    if (cfg.mu * cfg.M).denominator == 1:
        return "OneShot", lambda seed: run_oneshot(cfg, seed)
    raise UnsupportedScheme(
        f"no implemented scheme at K={cfg.K}, M={cfg.M}, mu={cfg.mu}; "
        "the memory-sharing value is available from the tradeoff command"
    )


def simulate_trials(cfg: NetworkConfig, trials: int, seed: int) -> dict:
    name, runner = select_scheme(cfg)
    results = []
    for i in range(trials):
        s = trial_seed(seed, i)
        try:
            trace = runner(s)
            results.append({
                "trial": i,
                "seed": s,
                "passed": trace.passed,
                "T": trace.T,
                "ndt": format_fraction(trace.ndt),
                "redraws": trace.redraws,
            })
        except TooManyRedraws:
            results.append({"trial": i, "seed": s, "passed": False, "T": None, "ndt": None, "redraws": None})
    passing = [r for r in results if r["passed"]]
    ndts = sorted({r["ndt"] for r in passing})
    return {
        "scheme": name,
        "pass_count": len(passing),
        "pass_rate": format_fraction(Fraction(len(passing), trials)),
        "ndt": ndts[0] if len(ndts) == 1 else None,
        "ndt_consistent": len(ndts) <= 1,
        "redraws_total": sum(r["redraws"] or 0 for r in results),
        "trials": results,
    }


def cmd_simulate(run: RunConfig) -> tuple[str, int]:
    cfg = _network(run)
    summary = simulate_trials(cfg, run.trials, run.seed)
    code = EXIT_OK if summary["ndt_consistent"] else EXIT_ASSERT
    if run.format == "json":
        payload = {
            "command": "simulate",
            "K": run.K,
            "M": run.M,
            "N": run.N,
            "mu": format_fraction(cfg.mu),
            "seed": run.seed,
            "trial_count": run.trials,
            **summary,
        }
        return _json_text(payload), code
    rows = [
        ["" if r[c] is None else str(r[c]).lower() if isinstance(r[c], bool) else str(r[c]) for c in TRIAL_COLUMNS]
        for r in summary["trials"]
    ]
    return _csv_text(TRIAL_COLUMNS, rows), code


def cmd_gap(run: RunConfig) -> tuple[str, int]:
    reports = gap_sweep(run.K, run.M)
    worst_ratio, worst = constant_gap_sweep(run.K, run.M)
    ok = all(r.holds for r in reports) and worst_ratio <= CONSTANT_GAP
    code = EXIT_OK if ok else EXIT_ASSERT
    if run.format == "json":
        payload = {
            "command": "gap",
            "kmax": run.K,
            "mmax": run.M,
            "rows": [dict(zip(GAP_COLUMNS, r.csv_row())) for r in reports],
            "constant_gap_max_ratio": format_fraction(worst_ratio),
            "constant_gap_argmax": {"K": worst.K, "M": worst.M, "mu": format_fraction(worst.mu)},
            "all_bounds_hold": ok,
        }
        return _json_text(payload), code
    return _csv_text(GAP_COLUMNS, [r.csv_row() for r in reports]), code


COMMANDS = {"bound": cmd_bound, "tradeoff": cmd_tradeoff, "simulate": cmd_simulate, "gap": cmd_gap}


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ndt-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, default_km in (("bound", 1), ("tradeoff", 1), ("simulate", 1), ("gap", 8)):
        p = sub.add_parser(name)
        p.add_argument("--k", type=int, default=default_km, help="users (gap: largest K swept)")
        p.add_argument("--m", type=int, default=default_km, help="relays (gap: largest M swept)")
        p.add_argument("--n", type=int, default=None, help="library size, default K+M")
        p.add_argument("--mu", default=None, help="cache fraction as a/b")
        p.add_argument("--grid", type=int, default=101, help="uniform mu points for tradeoff")
        p.add_argument("--trials", type=int, default=100)
        p.add_argument("--seed", type=int, default=None, help=f"default from ${SEED_ENV} or 0")
        p.add_argument("--out", default=None, help="output file, default stdout")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        run = build_run_config(args)
        text, code = COMMANDS[run.command](run)
    except InvalidConfig as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG
    except UnsupportedScheme as exc:
        print(f"unsupported: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except (AssertionError, NDTError) as exc:
        print(f"failed: {exc}", file=sys.stderr)
        return EXIT_ASSERT
    try:
        if run.out is None:
            sys.stdout.write(text)
        else:
            with open(run.out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
    except OSError as exc:
        print(f"cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    return code


if __name__ == "__main__":
    sys.exit(main())
