"""
TOW's learning rule and the simultaneous-update estimator
=========================================================

If the player knew gamma = P_A + P_B, one play of A would also inform the
estimate of B.  The resulting expected rewards Q' differ from TOW's Q, but
their rescaled difference equals Q_A - Q_B once omega = gamma / (2 - gamma).
"""

import numpy as np

from towbandit import PlayHistory, omega_zero
from towbandit.models import q_diff, q_double_prime_diff, q_prime

h = PlayHistory([30, 12], [11, 7])
for gamma in (0.4, 1.0, 1.6):
    qa, qb = q_prime(h, gamma)
    print(f"gamma={gamma}:  Q'=({qa:.2f}, {qb:.2f})  "
          f"Q''_A-Q''_B={q_double_prime_diff(h, gamma):+.4f}  "
          f"Q_A-Q_B at omega0={q_diff(h, omega_zero(gamma)):+.4f}  "
          f"at omega=1: {q_diff(h, 1.0):+.4f}")

rng = np.random.default_rng(0)
worst = 0.0
for _ in range(10_000):
    n = rng.integers(0, 1000, 2)
    h = PlayHistory(n, [rng.integers(0, n[0] + 1), rng.integers(0, n[1] + 1)])
    g = rng.uniform(0.05, 1.95)
    worst = max(worst, abs(q_diff(h, omega_zero(g)) - q_double_prime_diff(h, g)))
print("largest discrepancy over 10^4 random histories:", worst)
