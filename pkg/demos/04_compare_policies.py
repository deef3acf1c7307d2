"""
TOW against standard bandit policies
====================================

Every policy sees the same machine draws in trial i (common random numbers).
Pass a path as the first argument to also save a regret plot (needs
matplotlib).
"""

import sys

from towbandit import BanditEnv, RunConfig, compare

cfg = RunConfig(BanditEnv([0.6, 0.4]), omega="auto", horizon=1000, trials=2000,
                base_seed=5, record_stride=10)
policies = ["tow", "cheater", "egreedy:0.05", "egreedy:0.1", "softmax:0.1", "ucb1",
            "ucb1tuned", "randomwalk:1,1.5", "random"]
results = compare(cfg, policies)

print(f"{'policy':18s} regret@1000   correct@1000")
for name, m in results.items():
    print(f"{name:18s} {m.mean_regret[-1]:8.2f} +- {m.se_regret[-1]:.2f}   {m.correct_rate[-1]:.3f}")

if len(sys.argv) > 1:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    for name, m in results.items():
        if name != "random":
            ax.plot(m.steps, m.mean_regret, label=name)
    ax.set_xlabel("step")
    ax.set_ylabel("mean cumulative regret")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(sys.argv[1])
