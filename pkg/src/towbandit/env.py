"""Bernoulli slot machines and per-machine play counters.

Randomness: every environment owns one PCG64 stream seeded from ``rng_seed``.
Each :func:`pull` consumes exactly one uniform double from that stream, in
call order, so a fixed seed and a fixed call sequence reproduce every reward.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 generator for a 64-bit seed. Used for every stream in the package."""
    return np.random.Generator(np.random.PCG64(int(seed)))


def derive_seed(base_seed: int, *path: int) -> int:
    """Mix ``base_seed`` with an index path into a fresh 64-bit seed.

    The mixing is numpy's ``SeedSequence`` hash over ``[base_seed, *path]``, so
    the seed for trial 7 does not depend on how many trials are run.
    """
    ss = np.random.SeedSequence([int(base_seed), *(int(p) for p in path)])
    return int(ss.generate_state(1, np.uint64)[0])


def _check_probs(probs: Sequence[float], what: str) -> tuple[float, ...]:
    out = tuple(float(p) for p in probs)
    if any(not (0.0 <= p <= 1.0) for p in out):
        raise ValueError(f"{what}: probabilities must lie in [0, 1], got {out}")
    return out


@dataclass
class BanditEnv:
    """A set of Bernoulli machines with an optional step-change schedule.

    ``switch_schedule`` is a list of ``(t, probs)`` pairs; from step ``t`` on
    (inclusive) the machines pay with the replacement probabilities.
    """

    probs: Sequence[float]
    switch_schedule: Sequence[tuple[int, Sequence[float]]] = ()
    rng_seed: int = 0
    draws: int = field(default=0, init=False, compare=False)
    _rng: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        self.probs = _check_probs(self.probs, "probs")
        if len(self.probs) < 2:
            raise ValueError("a bandit needs at least 2 machines")
        schedule = []
        last_t = 0
        for t, ps in self.switch_schedule:
            t = int(t)
            if t <= last_t:
                raise ValueError("switch times must be positive and strictly increasing")
            ps = _check_probs(ps, f"switch at t={t}")
            if len(ps) != len(self.probs):
                raise ValueError(
                    f"switch at t={t} has {len(ps)} probabilities, expected {len(self.probs)}")
            schedule.append((t, ps))
            last_t = t
        self.switch_schedule = tuple(schedule)
        if not 0 <= int(self.rng_seed) < 2**64:
            raise ValueError("rng_seed must be a 64-bit unsigned integer")
        self._rng = make_rng(self.rng_seed)

    @property
    def n_machines(self) -> int:
        return len(self.probs)

    def probs_at(self, t: int) -> tuple[float, ...]:
        """Probabilities in effect at step ``t`` (1-based)."""
        current = self.probs
        for switch_t, ps in self.switch_schedule:
            if switch_t > t:
                break
            current = ps
        return current

    def prob_table(self, horizon: int) -> np.ndarray:
        """``(horizon, M)`` array whose row ``t-1`` is :meth:`probs_at` ``(t)``."""
        table = np.empty((horizon, self.n_machines))
        table[:] = self.probs
        for switch_t, ps in self.switch_schedule:
            if switch_t <= horizon:
                table[switch_t - 1:] = ps
        return table

    def best_machines(self, t: int) -> list[int]:
        ps = self.probs_at(t)
        top = max(ps)
        return [k for k, p in enumerate(ps) if p == top]

    def pull(self, machine: int, t: int) -> bool:
        if not 0 <= machine < self.n_machines:
            raise IndexError(f"machine {machine} out of range for {self.n_machines} machines")
        if t < 1:
            raise ValueError("time steps start at 1")
        self.draws += 1
        return bool(self._rng.random() < self.probs_at(t)[machine])


def pull(env: BanditEnv, machine: int, t: int) -> bool:
    """Play ``machine`` at step ``t``; True means a coin came out."""
    return env.pull(machine, t)


@dataclass
class PlayHistory:
    """Play counts N_k and punishment (non-reward) counts L_k per machine."""

    plays: np.ndarray
    losses: np.ndarray

    def __post_init__(self):
        self.plays = np.asarray(self.plays, dtype=np.int64).copy()
        self.losses = np.asarray(self.losses, dtype=np.int64).copy()
        if self.plays.shape != self.losses.shape or self.plays.ndim != 1:
            raise ValueError("plays and losses must be 1-d and the same length")
        if np.any(self.losses < 0) or np.any(self.losses > self.plays):
            raise ValueError("need 0 <= L_k <= N_k for every machine")

    @classmethod
    def empty(cls, n_machines: int) -> "PlayHistory":
        return cls(np.zeros(n_machines, np.int64), np.zeros(n_machines, np.int64))

    @property
    def n_machines(self) -> int:
        return len(self.plays)

    @property
    def total(self) -> int:
        return int(self.plays.sum())

    def rewards(self) -> np.ndarray:
        return self.plays - self.losses

    def mean_rewards(self, unplayed: float = 0.5) -> np.ndarray:
        """Empirical reward rates; machines never played get ``unplayed``."""
        means = np.full(self.n_machines, float(unplayed))
        played = self.plays > 0
        means[played] = self.rewards()[played] / self.plays[played]
        return means

    def record(self, machine: int, reward: bool) -> "PlayHistory":
        if not 0 <= machine < self.n_machines:
            raise IndexError(f"machine {machine} out of range for {self.n_machines} machines")
        self.plays[machine] += 1
        if not reward:
            self.losses[machine] += 1
        return self


def record(history: PlayHistory, machine: int, reward: bool) -> PlayHistory:
    """Count one play of ``machine``; updates in place and returns ``history``."""
    return history.record(machine, reward)
