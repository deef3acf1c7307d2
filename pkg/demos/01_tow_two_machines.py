"""
Tug-of-war dynamics on two machines
===================================

Play machines A and B (P_A = 0.6, P_B = 0.4) with the TOW learning rule and
watch the estimates separate.
"""

import numpy as np

from towbandit import BanditEnv, PlayHistory, TowState, omega_zero, select, update
from towbandit.tow import OracleGamma, learning_rule

env = BanditEnv([0.6, 0.4], rng_seed=1)
rng = np.random.default_rng(2)

# The weight comes from the sum of the two probabilities: 1.0 / (2 - 1.0) = 1.
print("omega0 =", omega_zero(0.6 + 0.4))

state = TowState.fresh(2, OracleGamma(1.0))
history = PlayHistory.empty(2)
for t in range(1, 201):
    k = select(state, history, rng)
    won = env.pull(k, t)
    history.record(k, won)
    update(state, k, won, history)
    if t in (1, 2, 5, 10, 50, 200):
        print(f"t={t:4d}  played={'AB'[k]}  Q={state.q}  X_A={state.q[0] - state.q[1]:+.0f}")

# Q_k is just N_k - (1 + omega) L_k.
print("plays", history.plays, "losses", history.losses)
print("closed form", learning_rule(history, 1.0))
