"""Comparison models for TOW dynamics and the textbook baselines.

* random walk: flight +alpha on reward, -beta on punishment;
* cheater algorithm: samples both machines every step, declares one;
* simultaneous-update estimator: with gamma = P_A + P_B known, one play
  informs both machines' estimates (Q' and its rescaling Q'');
* baselines: epsilon-greedy, softmax, UCB1, UCB1-tuned, uniform random.

Each policy exists in two forms: a single-trial function taking a
``numpy.random.Generator`` and a batched class used by the harness.  Both read
the same number of uniforms per decision (``n_uniforms``), so a trial's
choices are identical either way.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from ._kernels import argmax_tiebreak
from .env import BanditEnv, PlayHistory
from .tow import omega_zero


def _two_machines(history: PlayHistory) -> None:
    if history.n_machines != 2:
        raise ValueError("defined for two machines only")


# -- random walk ------------------------------------------------------------

@dataclass
class RandomWalkState:
    r: np.ndarray
    alpha: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        self.r = np.array(self.r, dtype=float)
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError("alpha and beta must be positive")

    @classmethod
    def fresh(cls, n_machines: int, alpha: float = 1.0, beta: float = 1.0) -> "RandomWalkState":
        return cls(np.zeros(n_machines), alpha, beta)


def rw_step(state: RandomWalkState, machine: int, reward: bool) -> RandomWalkState:
    if not 0 <= machine < len(state.r):
        raise IndexError(f"machine {machine} out of range")
    state.r[machine] += state.alpha if reward else -state.beta
    return state


def rw_closed_form(history: PlayHistory, alpha: float, beta: float) -> np.ndarray:
    """R_k = alpha N_k - (alpha + beta) L_k."""
    return alpha * history.plays - (alpha + beta) * history.losses


def rw_expected(alpha: float, beta: float, p: float, n: int) -> float:
    """E(R) after ``n`` plays of a machine paying with probability ``p``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    return (alpha * p - beta * (1.0 - p)) * n


def separation_ok(alpha: float, beta: float, p_a: float, p_b: float) -> bool:
    """True iff the punishment threshold beta/(alpha+beta) lies strictly between p_b and p_a."""
    if not p_a > p_b:
        raise ValueError(f"need p_a > p_b, got p_a={p_a}, p_b={p_b}")
    threshold = beta / (alpha + beta)
    return p_b < threshold < p_a


def alpha_beta_ratio_from_gamma(gamma: float) -> float:
    # beta/(alpha+beta) = gamma/2  <=>  beta/alpha = gamma/(2-gamma)
    return omega_zero(gamma)


# -- cheater algorithm ------------------------------------------------------

@dataclass
class CheaterState:
    """Running sums S_k of observed rewards.

    With ``omega`` set, each observed punishment also subtracts ``omega``
    (the TOW-analysis variant S_k = rewards_k - omega L_k).
    """

    s: np.ndarray = field(default_factory=lambda: np.zeros(2))
    omega: float | None = None

    def __post_init__(self):
        self.s = np.array(self.s, dtype=float)
        if self.s.shape != (2,):
            raise ValueError("the cheater algorithm is defined for two machines")


def cheater_declare(state: CheaterState, rng: np.random.Generator) -> int:
    """Machine the cheater claims to play next; a tie is settled by one uniform."""
    return int(argmax_tiebreak(state.s, rng.random()))


def cheater_step(state: CheaterState, env: BanditEnv, t: int,
                 rng: np.random.Generator) -> tuple[CheaterState, int]:
    """Pull both machines at step ``t``, add the outcomes, declare for ``t + 1``."""
    if env.n_machines != 2:
        raise ValueError("the cheater algorithm is defined for two machines")
    for k in (0, 1):
        won = env.pull(k, t)
        if won:
            state.s[k] += 1.0
        elif state.omega is not None:
            state.s[k] -= state.omega
    return state, cheater_declare(state, rng)


class CheaterPolicy:
    n_uniforms = 1
    env_draws = 2

    def __init__(self, n_machines: int = 2):
        if n_machines != 2:
            raise ValueError("the cheater algorithm is defined for two machines")
        self.n_machines = 2

    def reset(self, batch: int):
        self.s = np.zeros((batch, 2))

    def select(self, t, u):
        return argmax_tiebreak(self.s, u[:, 0])

    def update(self, t, chosen, rewards, outcomes):
        self.s += outcomes


# -- simultaneous-update estimator ------------------------------------------

def _scalar(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


def q_prime(history: PlayHistory, gamma: float) -> tuple[float, float]:
    """Expected rewards when one play updates both machines' estimates."""
    _two_machines(history)
    (na, nb), (la, lb) = history.plays, history.losses
    qa = na - la + (gamma - 1.0) * nb + lb
    qb = nb - lb + (gamma - 1.0) * na + la
    return float(qa), float(qb)


def q_diff(history: PlayHistory, omega: float) -> float:
    """Q_A - Q_B under the TOW learning rule; ``omega`` may be an array."""
    _two_machines(history)
    (na, nb), (la, lb) = history.plays, history.losses
    return _scalar((na - nb) - (1.0 + np.asarray(omega, dtype=float)) * (la - lb))


def q_double_prime_diff(history: PlayHistory, gamma: float) -> float:
    """(Q'_A - Q'_B) / (2 - gamma), computed in the reduced form; ``gamma`` may be an array."""
    _two_machines(history)
    gamma = np.asarray(gamma, dtype=float)
    if np.any((gamma <= 0.0) | (gamma >= 2.0)):
        raise ValueError(f"gamma must lie in (0, 2), got {gamma}")
    (na, nb), (la, lb) = history.plays, history.losses
    return _scalar((na - nb) - 2.0 / (2.0 - gamma) * (la - lb))


# -- baselines --------------------------------------------------------------

@dataclass(frozen=True)
class EpsilonGreedy:
    epsilon: float = 0.1

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon must lie in [0, 1], got {self.epsilon}")


@dataclass(frozen=True)
class Softmax:
    tau: float = 0.1

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")


@dataclass(frozen=True)
class UCB1:
    pass


@dataclass(frozen=True)
class UCB1Tuned:
    pass


@dataclass(frozen=True)
class RandomChoice:
    pass


Baseline = Union[EpsilonGreedy, Softmax, UCB1, UCB1Tuned, RandomChoice]

# uniforms per decision: [explore coin, random arm / softmax draw, tie-break]
BASELINE_UNIFORMS = 3


def _baseline_choice(policy: Baseline, plays: np.ndarray, losses: np.ndarray,
                     u: np.ndarray) -> np.ndarray:
    """Vectorised decision for histories of shape (B, M) and uniforms (B, 3)."""
    batch, m = plays.shape
    played = plays > 0
    safe = np.maximum(plays, 1)
    means = np.where(played, (plays - losses) / safe, 0.5)

    if isinstance(policy, RandomChoice):
        return np.minimum((u[:, 1] * m).astype(np.int64), m - 1)
    if isinstance(policy, EpsilonGreedy):
        greedy = argmax_tiebreak(means, u[:, 2])
        uniform = np.minimum((u[:, 1] * m).astype(np.int64), m - 1)
        return np.where(u[:, 0] < policy.epsilon, uniform, greedy)
    if isinstance(policy, Softmax):
        z = (means - means.max(axis=1, keepdims=True)) / policy.tau
        cdf = np.cumsum(np.exp(z), axis=1)
        hit = cdf > (u[:, 1] * cdf[:, -1])[:, None]
        return hit.argmax(axis=1)
    if isinstance(policy, (UCB1, UCB1Tuned)):
        n = plays.sum(axis=1, keepdims=True)
        log_n = np.log(np.maximum(n, 1))
        if isinstance(policy, UCB1):
            bonus = np.sqrt(2.0 * log_n / safe)
        else:
            var = means * (1.0 - means)  # Bernoulli: mean of squares equals mean
            v = var + np.sqrt(2.0 * log_n / safe)
            bonus = np.sqrt(log_n / safe * np.minimum(0.25, v))
        index = argmax_tiebreak(means + bonus, u[:, 2])
        warmup = ~played.all(axis=1)
        return np.where(warmup, (~played).argmax(axis=1), index)
    raise TypeError(f"unknown baseline {policy!r}")


def baseline_select(policy: Baseline, history: PlayHistory, rng: np.random.Generator) -> int:
    """One decision of a baseline policy; reads three uniforms from ``rng``.

    UCB variants first play every machine once, lowest index first.  Machines
    never played count as having mean 0.5 for the greedy and softmax rules.
    """
    u = rng.random(BASELINE_UNIFORMS)[None, :]
    return int(_baseline_choice(policy, history.plays[None, :], history.losses[None, :], u)[0])


class BaselinePolicy:
    n_uniforms = BASELINE_UNIFORMS
    env_draws = 1

    def __init__(self, n_machines: int, policy: Baseline):
        self.n_machines = n_machines
        self.policy = policy

    def reset(self, batch: int):
        self.plays = np.zeros((batch, self.n_machines), np.int64)
        self.losses = np.zeros((batch, self.n_machines), np.int64)

    def select(self, t, u):
        return _baseline_choice(self.policy, self.plays, self.losses, u)

    def update(self, t, chosen, rewards, outcomes=None):
        rows = np.arange(len(chosen))
        self.plays[rows, chosen] += 1
        self.losses[rows, chosen] += ~rewards


def random_walk_select(state: RandomWalkState, rng: np.random.Generator) -> int:
    """Play the machine whose walker is furthest right; one uniform breaks ties."""
    return int(argmax_tiebreak(state.r, rng.random()))


class RandomWalkPolicy:
    n_uniforms = 1
    env_draws = 1

    def __init__(self, n_machines: int, alpha: float = 1.0, beta: float = 1.0):
        if not (alpha > 0 and beta > 0):
            raise ValueError("alpha and beta must be positive")
        self.n_machines = n_machines
        self.alpha, self.beta = float(alpha), float(beta)

    def reset(self, batch: int):
        self.r = np.zeros((batch, self.n_machines))

    def select(self, t, u):
        return argmax_tiebreak(self.r, u[:, 0])

    def update(self, t, chosen, rewards, outcomes=None):
        rows = np.arange(len(chosen))
        self.r[rows, chosen] += np.where(rewards, self.alpha, -self.beta)

