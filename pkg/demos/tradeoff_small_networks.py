"""Converse versus achievable delivery time on the networks where both meet.

Run with ``python3 demos/tradeoff_small_networks.py``.
"""

from __future__ import annotations

from fractions import Fraction

from ndtlab import NetworkConfig, lower_bound, oneshot_envelope
from ndtlab.bounds import achievable_dof
from ndtlab.ia import IA_POINTS

# two users and two relays: one-shot delivery alone leaves a gap below mu = 1/2
K, M = 2, 2
plain = oneshot_envelope(K, M)
joined = oneshot_envelope(K, M, include_ia=True)
print(f"(K, M) = ({K}, {M})")
print(f"{'mu':>6} {'converse':>9} {'one-shot':>9} {'with IA':>9} {'DoF':>7}")
for i in range(0, 19):
    mu = Fraction(i, 18)
    bound = lower_bound(NetworkConfig(K, M, mu))[0]
    dof = achievable_dof(NetworkConfig(K, M, mu), joined(mu))
    print(f"{str(mu):>6} {str(bound):>9} {str(plain(mu)):>9} {str(joined(mu)):>9} {str(dof):>7}")

# the envelope breakpoints are the scheme corners
print("breakpoints with IA:", [(str(p.mu), str(p.ndt)) for p in joined])

# the alignment corners land exactly on the converse
for (k, m), (mu, ndt) in IA_POINTS.items():
    bound = lower_bound(NetworkConfig(k, m, mu))[0]
    print(f"IA corner ({k},{m}) at mu={mu}: NDT {ndt}, converse {bound}")

# a cut witness explains which term of the converse is active
value, witness = lower_bound(NetworkConfig(3, 1, Fraction(4, 5)))
print(f"(3,1) at mu=4/5: {value} from cut ell={witness.ell}, s={witness.s}")
