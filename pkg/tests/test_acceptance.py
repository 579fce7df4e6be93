"""Acceptance criteria, one test per criterion, each printing a PASS/FAIL line.

Run directly with ``python3 tests/test_acceptance.py`` for just the summary.
"""

from __future__ import annotations

import time
from fractions import Fraction
from math import ceil

import numpy as np
import pytest

from ndtlab.bounds import achievable_dof, lower_bound
from ndtlab.core import NetworkConfig, discrete_cache_grid, rn, ue
from ndtlab.gap import CONSTANT_GAP, constant_gap_sweep, optimality_conditions_hold, oneshot_envelope
from ndtlab.ia import ia22_run, ia31_run
from ndtlab.oneshot import build_schedule, delta_os, run_oneshot
from ndtlab.verify import check_alignment, round_trip_error, trial_seed

TRIALS = 100


def report(number: int, ok: bool, detail: str, capsys) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


def lb(K: int, M: int, mu) -> Fraction:
    return lower_bound(NetworkConfig(K, M, mu))[0]


def criterion_1() -> tuple[bool, str]:
    start = time.perf_counter()
    bad = [
        (K, M)
        for K in range(1, 7)
        for M in range(1, 7)
        if lb(K, M, 0) != K + M or lb(K, M, 1) != max(Fraction(1), Fraction(K, M + 1))
    ]
    elapsed = time.perf_counter() - start
    return not bad and elapsed < 1, f"corner values exact on 36 networks, mismatches={bad}, {elapsed:.2f}s"


SMALL = [(1, 1), (1, 2), (2, 1), (2, 2), (3, 1), (1, 3)]


def criterion_2() -> tuple[bool, str]:
    start = time.perf_counter()
    bad = []
    for K, M in SMALL:
        env = oneshot_envelope(K, M, include_ia=True)
        for i in range(101):
            mu = Fraction(i, 100)
            if env(mu) != lb(K, M, mu):
                bad.append((K, M, mu))
    corners = [
        oneshot_envelope(3, 1, include_ia=True)(Fraction(4, 5)),
        oneshot_envelope(2, 2, include_ia=True)(Fraction(4, 9)),
        oneshot_envelope(2, 2, include_ia=True)(Fraction(1, 2)),
        oneshot_envelope(1, 2, include_ia=True)(Fraction(1, 2)),
        oneshot_envelope(1, 3, include_ia=True)(Fraction(1, 3)),
    ]
    want = [Fraction(8, 5), Fraction(4, 3), Fraction(5, 4), Fraction(1), Fraction(1)]
    elapsed = time.perf_counter() - start
    ok = not bad and corners == want and elapsed < 1
    shown = ", ".join(str(c) for c in corners)
    return ok, f"envelope = bound on 6x101 points (mismatches={len(bad)}), corners {shown}, {elapsed:.2f}s"


def criterion_3() -> tuple[bool, str]:
    passes = 0
    for i in range(TRIALS):
        trace = ia31_run(trial_seed(0, i))
        mats = trace.matrices()
        checks = [
            trace.T == 8,
            trace.ndt == Fraction(8, 5),
            all(trace.reports[ue(k)].rank == 8 and trace.reports[ue(k)].desired_rank_ok for k in (1, 2, 3)),
            trace.extra_checks.get("rn_rank_within_4_uses", False),
            trace.zf_report.max_residual < 1e-9,
            all(
                check_alignment(mats[ue(k)], trace.spec.receivers[ue(k)].groups).max_residual < 1e-10
                for k in (1, 2, 3)
            ),
            trace.passed,
        ]
        passes += all(checks)
    return passes >= 99, f"(3,1) alignment scheme {passes}/{TRIALS} trials pass, T=8, NDT 8/5"


def criterion_4() -> tuple[bool, str]:
    passes = 0
    for i in range(TRIALS):
        trace = ia22_run(trial_seed(0, i))
        checks = [
            trace.T == 12,
            trace.ndt == Fraction(4, 3),
            all(trace.reports[ue(k)].rank == 12 and trace.reports[ue(k)].columns == 12 for k in (1, 2)),
            all(trace.reports[rn(m)].rank == 12 for m in (1, 2)),
            trace.passed,
        ]
        passes += all(checks)
    return passes >= 99, f"(2,2) alignment scheme {passes}/{TRIALS} trials pass, T=12, NDT 4/3"


def criterion_5() -> tuple[bool, str]:
    expected = {
        (1, 2, Fraction(1, 2)): dict(T=2, ndt=Fraction(1)),
        (2, 2, Fraction(1, 2)): dict(T1=2, T2=3, ndt=Fraction(5, 4)),
        (1, 3, Fraction(1, 3)): dict(T=3, ndt=Fraction(1)),
        (2, 4, Fraction(1, 2)): dict(ndt=Fraction(1)),
    }
    summary, ok = [], True
    for point, want in expected.items():
        cfg = NetworkConfig(*point)
        passes = 0
        for i in range(TRIALS):
            trace = run_oneshot(cfg, trial_seed(0, i))
            counts = trace.plan.counts
            good = trace.passed and trace.ndt == want["ndt"]
            good &= "T" not in want or trace.T == want["T"]
            good &= "T1" not in want or len(trace.plan.phase1) == want["T1"]
            good &= "T2" not in want or len(trace.plan.phase2) == want["T2"]
            good &= counts.ndt == want["ndt"]
            passes += good
        ok &= passes == TRIALS
        summary.append(f"{point[0]},{point[1]},{point[2]}: {passes}/{TRIALS}")
    return ok, "one-shot traces " + "; ".join(summary)


def criterion_6() -> tuple[bool, str]:
    bad, count = [], 0
    for K in range(1, 7):
        for M in range(1, 7):
            for mu in discrete_cache_grid(M):
                cfg = NetworkConfig(K, M, mu)
                plan = build_schedule(cfg)
                c = plan.counts
                count += 1
                if Fraction(len(plan.steps), c.frag_factor * c.symbols_per_file) != delta_os(cfg):
                    bad.append((K, M, mu))
    return not bad, f"schedule length / symbols = one-shot NDT on {count} triplets, mismatches={bad}"


def criterion_7() -> tuple[bool, str]:
    hits, bad = 0, []
    for K in range(1, 11):
        for M in range(1, 11):
            for mu in discrete_cache_grid(M):
                cfg = NetworkConfig(K, M, mu)
                if optimality_conditions_hold(cfg):
                    hits += 1
                    if not delta_os(cfg) == lower_bound(cfg)[0] == 1:
                        bad.append((K, M, mu))
    return hits > 0 and not bad, f"{hits} optimal-condition triplets with NDT 1, mismatches={bad}"


def criterion_8() -> tuple[bool, str]:
    start = time.perf_counter()
    ratio, worst = constant_gap_sweep(8, 8)
    elapsed = time.perf_counter() - start
    where = f"(K={worst.K}, M={worst.M}, mu={worst.mu})"
    return ratio <= CONSTANT_GAP and elapsed < 5, f"max ratio {ratio} <= 8/3 at {where}, {elapsed:.2f}s"


def criterion_9() -> tuple[bool, str]:
    half, full = NetworkConfig(2, 2, Fraction(1, 2)), NetworkConfig(2, 2, 1)
    ndt_half, ndt_full = lb(2, 2, Fraction(1, 2)), lb(2, 2, 1)
    dof_half, dof_full = achievable_dof(half, ndt_half), achievable_dof(full, ndt_full)
    ok = (ndt_half, ndt_full, dof_half, dof_full) == (Fraction(5, 4), 1, Fraction(12, 5), 2)
    ok &= ndt_full < ndt_half and dof_full < dof_half
    return ok, f"NDT {ndt_half} -> {ndt_full} and DoF {dof_half} -> {dof_full} both decrease"


def criterion_10() -> tuple[bool, str]:
    convex_bad = 0
    grid = [Fraction(i, 40) for i in range(41)]
    for K in range(1, 11):
        for M in range(1, 11):
            vals = [lb(K, M, mu) for mu in grid]
            convex_bad += sum(vals[i] > (vals[i - 1] + vals[i + 1]) / 2 for i in range(1, 40))
    envelope_bad = 0
    for K in range(1, 9):
        for M in range(1, 9):
            env = oneshot_envelope(K, M, include_ia=True)
            envelope_bad += sum(env(mu) < lb(K, M, mu) for mu in grid)
    worst_round_trip, checked = 0.0, 0
    rng = np.random.default_rng(0)
    for runner in (ia31_run, ia22_run):
        for i in range(20):
            trace = runner(trial_seed(1, i))
            mats = trace.matrices()
            for rx, rep in trace.reports.items():
                if rep.passed:
                    spec = trace.spec.receivers[rx]
                    worst_round_trip = max(worst_round_trip, round_trip_error(mats[rx], spec.desired, spec.groups, rng))
                    checked += 1
    deterministic = ia22_run(5).to_dict() == ia22_run(5).to_dict() and run_oneshot(
        NetworkConfig(3, 4, Fraction(1, 2)), 5
    ).to_dict() == run_oneshot(NetworkConfig(3, 4, Fraction(1, 2)), 5).to_dict()
    ok = convex_bad == 0 and envelope_bad == 0 and worst_round_trip < 1e-8 and deterministic
    detail = (
        f"convexity violations={convex_bad}, envelope below bound={envelope_bad}, "
        f"round-trip max error {worst_round_trip:.1e} over {checked} reports, deterministic={deterministic}"
    )
    return ok, detail


CRITERIA = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
    10: criterion_10,
}


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    ok, detail = CRITERIA[number]()
    report(number, ok, detail, capsys)


if __name__ == "__main__":
    failures = 0
    for number, run in CRITERIA.items():
        ok, detail = run()
        print(f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
        failures += not ok
    raise SystemExit(1 if failures else 0)
