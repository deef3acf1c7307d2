"""
Switching probabilities and more than two machines
==================================================

With four machines the weight separates the best from the second best:
omega0 = g / (2 - g) with g = P_(1) + P_(2).

Then the machines swap roles at step 500.  The oracle weight was computed
from the initial probabilities, the adaptive mode re-estimates g from the
play history, and omega = 1 ignores g entirely.  None of them is told about
the switch; the regret curves show how each recovers (or does not).
"""

from towbandit import BanditEnv, RunConfig, omega_zero_multi, run_experiment

probs = [0.7, 0.5, 0.3, 0.1]
print("omega0 for top-1 vs top-2:", omega_zero_multi(sorted(probs, reverse=True), 1))
m = run_experiment(RunConfig(BanditEnv(probs), policy="tow", omega="auto", horizon=1000,
                             trials=2000, base_seed=1, record_stride=250))
print("correct-selection rate:", dict(zip(m.steps.tolist(), m.correct_rate.round(4).tolist())))

env = BanditEnv([0.3, 0.2], switch_schedule=[(500, [0.1, 0.9])])
for omega in ("auto", "adaptive", 1.0):
    m = run_experiment(RunConfig(env, policy="tow", omega=omega, horizon=1000, trials=2000,
                                 base_seed=2, record_stride=250))
    print(f"omega={omega!s:9s} regret at 250/500/750/1000:", m.mean_regret.round(2).tolist())
