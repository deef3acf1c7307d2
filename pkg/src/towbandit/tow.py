"""Tug-of-war (TOW) dynamics.

Each machine k carries an estimate Q_k.  A rewarded play adds +1 to Q_k, a
punished play adds -omega, so with a constant weight

    Q_k = N_k - (1 + omega) L_k.

The body's terminals are coupled by volume conservation: the displacement of
terminal k is its own estimate minus the mean of the others,

    X_k = Q_k - mean_{j != k} Q_j + delta_k(t),

which for two machines is X_A = Q_A - Q_B + delta = -X_B.  The machine with
the largest displacement is played next.

Per decision the policy stream supplies ``M + 1`` uniforms: M for the
fluctuation and one to break ties.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
from scipy.special import ndtri

from ._kernels import argmax_tiebreak
from .env import PlayHistory

GAMMA_EPS = 1e-6


def omega_zero(gamma: float) -> float:
    """Weight gamma / (2 - gamma) for the reward-probability sum ``gamma``.

    With this weight the punishment threshold beta/(alpha+beta) sits halfway
    between the two probabilities, so the better machine drifts up and the
    worse one down.
    """
    gamma = float(gamma)
    if not 0.0 < gamma < 2.0:
        raise ValueError(f"gamma must lie in (0, 2), got {gamma}")
    return gamma / (2.0 - gamma)


def omega_zero_multi(probs_sorted_desc: Sequence[float], m: int) -> float:
    """Weight separating the m-th and (m+1)-th best machines (m is 1-based)."""
    ps = [float(p) for p in probs_sorted_desc]
    if any(a < b for a, b in zip(ps, ps[1:])):
        raise ValueError("probabilities must be sorted in descending order")
    if not 1 <= m < len(ps):
        raise ValueError(f"m must satisfy 1 <= m < {len(ps)}, got {m}")
    return omega_zero(ps[m - 1] + ps[m])


# -- weight modes -----------------------------------------------------------

@dataclass(frozen=True)
class Fixed:
    omega: float

    def __post_init__(self):
        if not self.omega >= 0:
            raise ValueError(f"fixed omega must be >= 0, got {self.omega}")


@dataclass(frozen=True)
class OracleGamma:
    """The player is told gamma = sum of the top two reward probabilities."""

    gamma: float

    def __post_init__(self):
        if not 0 < self.gamma < 2:
            raise ValueError(f"gamma must lie in (0, 2), got {self.gamma}")


@dataclass(frozen=True)
class Adaptive:
    """Estimate gamma from the play history at every update (an extension)."""


OmegaMode = Union[Fixed, OracleGamma, Adaptive]


def parse_omega(value, probs: Sequence[float] | None = None) -> OmegaMode:
    """Map the ``omega`` config key to a mode.

    ``"auto"`` needs the true ``probs`` and yields OracleGamma of the top-two
    sum; ``"adaptive"`` yields Adaptive; anything numeric is Fixed.
    """
    if isinstance(value, str):
        key = value.strip().lower()
        if key == "auto":
            if probs is None:
                raise ValueError("omega = 'auto' needs the machine probabilities")
            top = sorted((float(p) for p in probs), reverse=True)
            return OracleGamma(top[0] + top[1])
        if key == "adaptive":
            return Adaptive()
        try:
            value = float(key)
        except ValueError:
            raise ValueError(f"omega must be 'auto', 'adaptive' or a number, got {value!r}") from None
    return Fixed(float(value))


def estimate_gamma(history: PlayHistory) -> float:
    """Sum of the two largest empirical reward rates, clamped into (0, 2)."""
    means = np.sort(history.mean_rewards(unplayed=0.5))[::-1]
    gamma = float(means[0] + means[1])
    return min(max(gamma, GAMMA_EPS), 2.0 - GAMMA_EPS)


# -- fluctuation ------------------------------------------------------------

FLUCT_KINDS = ("none", "uniform", "gaussian", "oscillation")


@dataclass(frozen=True)
class FluctuationConfig:
    """The fluctuation delta_k(t) added to each terminal's displacement.

    ``uniform``: i.i.d. on [-amplitude, amplitude]; ``gaussian``: i.i.d.
    N(0, amplitude^2); ``oscillation``: amplitude * cos(2 pi t / period + 2 pi k / M),
    i.e. antisymmetric across two machines.  With ``coupled=True`` the raw
    per-terminal values pass through the same mean-subtraction as Q, so the
    fluctuation itself conserves volume (for two machines: delta_A = -delta_B).
    """

    kind: str = "uniform"
    amplitude: float = 0.5
    period: int = 100
    coupled: bool = False

    def __post_init__(self):
        if self.kind not in FLUCT_KINDS:
            raise ValueError(f"fluct.kind must be one of {FLUCT_KINDS}, got {self.kind!r}")
        if not self.amplitude >= 0:
            raise ValueError("fluct.amplitude must be >= 0")
        if int(self.period) < 1:
            raise ValueError("fluct.period must be a positive integer")

    @property
    def silent(self) -> bool:
        return self.kind == "none" or self.amplitude == 0


NO_FLUCT = FluctuationConfig(kind="none", amplitude=0.0)


def couple(v: np.ndarray) -> np.ndarray:
    """v_k - mean_{j != k} v_j along the last axis."""
    m = v.shape[-1]
    if m == 2:
        return v - v[..., ::-1]
    return v - (v.sum(axis=-1, keepdims=True) - v) / (m - 1)


def fluctuation(cfg: FluctuationConfig, t, u: np.ndarray) -> np.ndarray:
    """delta(t) for uniforms ``u`` of shape (..., M); ``t`` broadcasts against (...)."""
    u = np.asarray(u, dtype=float)
    if cfg.silent:
        return np.zeros_like(u)
    a = cfg.amplitude
    if cfg.kind == "uniform":
        delta = a * (2.0 * u - 1.0)
    elif cfg.kind == "gaussian":
        delta = a * ndtri(np.clip(u, 2.0**-60, None))
    else:
        m = u.shape[-1]
        phase = 2 * np.pi * np.asarray(t, dtype=float)[..., None] / cfg.period
        delta = a * np.cos(phase + 2 * np.pi * np.arange(m) / m) * np.ones_like(u)
    return couple(delta) if cfg.coupled else delta


def displacement(q: np.ndarray, delta=0.0) -> np.ndarray:
    """Terminal displacements X_k = Q_k - mean_{j != k} Q_j + delta_k."""
    return couple(np.asarray(q, dtype=float)) + delta


# -- single-trial state -----------------------------------------------------

@dataclass
class TowState:
    q: np.ndarray
    omega_mode: OmegaMode = field(default_factory=lambda: Fixed(1.0))
    fluct: FluctuationConfig = field(default_factory=FluctuationConfig)
    time: int = 0

    def __post_init__(self):
        self.q = np.array(self.q, dtype=float)
        if self.q.ndim != 1 or len(self.q) < 2:
            raise ValueError("q needs one entry per machine and at least 2 machines")

    @classmethod
    def fresh(cls, n_machines: int, omega_mode: OmegaMode = Fixed(1.0),
              fluct: FluctuationConfig = FluctuationConfig()) -> "TowState":
        return cls(np.zeros(n_machines), omega_mode, fluct)

    @property
    def n_machines(self) -> int:
        return len(self.q)


def resolve_omega(state: TowState, history: PlayHistory | None = None) -> float:
    return omega_for(state.omega_mode, history)


def omega_for(mode: OmegaMode, history: PlayHistory | None = None) -> float:
    if isinstance(mode, Fixed):
        return mode.omega
    if isinstance(mode, OracleGamma):
        return omega_zero(mode.gamma)
    if history is None:
        return 1.0
    return omega_zero(estimate_gamma(history))


def select(state: TowState, history: PlayHistory | None, rng: np.random.Generator) -> int:
    """Pick the machine with the largest displacement at step ``state.time + 1``.

    Draws ``M + 1`` uniforms from ``rng`` whatever the fluctuation kind, so the
    stream position depends only on the number of decisions made.
    """
    u = rng.random(state.n_machines + 1)
    delta = fluctuation(state.fluct, state.time + 1, u[:-1])
    return int(argmax_tiebreak(displacement(state.q, delta), u[-1]))


def update(state: TowState, machine: int, reward: bool,
           history: PlayHistory | None = None) -> TowState:
    """Apply the learning rule for one play, in place.

    ``history`` should already include this play; it only matters in Adaptive
    mode, where omega is re-estimated each step (omega = 1 without a history).
    """
    if not 0 <= machine < state.n_machines:
        raise IndexError(f"machine {machine} out of range for {state.n_machines} machines")
    if reward:
        state.q[machine] += 1.0
    else:
        state.q[machine] -= resolve_omega(state, history)
    state.time += 1
    return state


def learning_rule(history: PlayHistory, omega: float) -> np.ndarray:
    """Closed form Q_k = N_k - (1 + omega) L_k."""
    return history.plays - (1.0 + omega) * history.losses


# -- batched policy ---------------------------------------------------------

class TowPolicy:
    """TOW dynamics run over a batch of independent trials at once."""

    env_draws = 1

    def __init__(self, n_machines: int, omega_mode: OmegaMode = Fixed(1.0),
                 fluct: FluctuationConfig = FluctuationConfig()):
        self.n_machines = n_machines
        self.omega_mode = omega_mode
        self.fluct = fluct
        self.n_uniforms = n_machines + 1

    def reset(self, batch: int):
        self.q = np.zeros((batch, self.n_machines))
        self.plays = np.zeros((batch, self.n_machines), np.int64)
        self.losses = np.zeros((batch, self.n_machines), np.int64)

    def select(self, t: int, u: np.ndarray) -> np.ndarray:
        delta = fluctuation(self.fluct, np.full(len(u), t), u[:, :-1])
        return argmax_tiebreak(displacement(self.q, delta), u[:, -1])

    def _omega(self) -> np.ndarray | float:
        if not isinstance(self.omega_mode, Adaptive):
            return omega_for(self.omega_mode)
        with np.errstate(invalid="ignore", divide="ignore"):
            means = np.where(self.plays > 0,
                             (self.plays - self.losses) / np.maximum(self.plays, 1), 0.5)
        top2 = -np.partition(-means, 1, axis=1)[:, :2]
        gamma = np.clip(top2.sum(axis=1), GAMMA_EPS, 2.0 - GAMMA_EPS)
        return gamma / (2.0 - gamma)

    def update(self, t: int, chosen: np.ndarray, rewards: np.ndarray, outcomes=None):
        rows = np.arange(len(chosen))
        self.plays[rows, chosen] += 1
        self.losses[rows, chosen] += ~rewards
        self.q[rows, chosen] += np.where(rewards, 1.0, -self._omega())
