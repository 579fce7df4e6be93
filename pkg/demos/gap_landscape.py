"""How far one-shot delivery sits from the converse across small networks.

Run with ``python3 demos/gap_landscape.py``.
"""

from __future__ import annotations

from collections import Counter

from ndtlab.gap import constant_gap_sweep, gap_sweep

reports = gap_sweep(8, 8)
print(len(reports), "grid points, every bound holds:", all(r.holds for r in reports))
print("tightest bound by source:", dict(Counter(r.bound_source for r in reports)))

# worst ratio for each network size
worst = {}
for r in reports:
    if r.ratio > worst.get((r.K, r.M), (0, None))[0]:
        worst[(r.K, r.M)] = (r.ratio, r.mu)
print("   " + "".join(f"{m:>8}" for m in range(1, 9)))
for k in range(1, 9):
    print(f"K={k}" + "".join(f"{float(worst[(k, m)][0]):>8.3f}" for m in range(1, 9)))

# once relays hold about half the library the ratio stays under 8/3
ratio, at = constant_gap_sweep(8, 8)
print(f"largest ratio above the half-library threshold: {ratio} at K={at.K}, M={at.M}, mu={at.mu}")
