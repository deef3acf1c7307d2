"""Tug-of-war dynamics for two- and many-armed Bernoulli bandits.

Modules: :mod:`env` (machines, play counts), :mod:`tow` (the TOW policy),
:mod:`models` (random walk, cheater, simultaneous-update estimator,
baselines), :mod:`analysis` (Q-function and regret bounds), :mod:`harness`
(seeded Monte Carlo runs) and :mod:`cli`.
"""
from .analysis import (BoundReport, bound_report, chernoff, e_nb_bound, e_nb_limit, p_wrong,
                       phi, phi_tow, qfunc, regret_bound, s_moments_tow)
from .env import BanditEnv, PlayHistory, pull, record
from .harness import (AggregateMetrics, ConfigError, RunConfig, TrialRecord, compare,
                      read_results, run_experiment, run_trial, sweep, write_results)
from .tow import (Adaptive, Fixed, FluctuationConfig, OracleGamma, TowState, omega_zero,
                  omega_zero_multi, resolve_omega, select, update)

__version__ = "0.1.0"
