"""Monte Carlo experiments: many seeded trials of one policy on one bandit.

Trial ``i`` of a run with ``base_seed`` reads two streams,
``derive_seed(base_seed, i, 0)`` for the machines and
``derive_seed(base_seed, i, 1)`` for the policy, so its outcome does not
depend on the number of trials, the batch it lands in or the thread count.
Every policy reading the same stream sees the same machine draws (common
random numbers).  Regret is pseudo-regret: max_k P_k(t) - P_chosen(t) summed
over steps, using the true probabilities.
"""
from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .env import BanditEnv, derive_seed, make_rng
from .models import (BaselinePolicy, CheaterPolicy, EpsilonGreedy, RandomChoice,
                     RandomWalkPolicy, Softmax, UCB1, UCB1Tuned)
from .tow import FluctuationConfig, TowPolicy, parse_omega

CSV_HEADER = ("step", "mean_regret", "se_regret", "correct_rate", "mean_nb")
BATCH = 1024
TIME_CHUNK = 256
THREADS_ENV = "TOW_BANDIT_THREADS"


class ConfigError(ValueError):
    pass


POLICY_NAMES = ("tow", "cheater", "egreedy", "softmax", "ucb1", "ucb1tuned", "random", "randomwalk")


def parse_policy(spec: str) -> tuple[str, tuple[float, ...]]:
    """Split ``"egreedy:0.1"`` or ``"randomwalk:1,2"`` into name and parameters."""
    name, _, rest = spec.strip().partition(":")
    name = name.lower()
    if name not in POLICY_NAMES:
        raise ConfigError(f"unknown policy {spec!r}; choose from {', '.join(POLICY_NAMES)}")
    try:
        params = tuple(float(v) for v in rest.split(",")) if rest else ()
    except ValueError:
        raise ConfigError(f"malformed parameters in policy {spec!r}") from None
    expected = {"egreedy": 1, "softmax": 1, "randomwalk": 2}.get(name, 0)
    if params and len(params) != expected:
        raise ConfigError(f"policy {name} takes {expected} parameter(s), got {spec!r}")
    return name, params


@dataclass
class RunConfig:
    env: BanditEnv
    policy: str = "tow"
    omega: str | float = "auto"
    fluct: FluctuationConfig = field(default_factory=FluctuationConfig)
    horizon: int = 1000
    trials: int = 100
    base_seed: int = 0
    record_stride: int = 10

    def __post_init__(self):
        if self.horizon < 1 or self.trials < 1 or self.record_stride < 1:
            raise ConfigError("horizon, trials and record_stride must all be >= 1")
        if not 0 <= int(self.base_seed) < 2**64:
            raise ConfigError("base_seed must be a 64-bit unsigned integer")
        parse_policy(self.policy)

    def to_dict(self) -> dict:
        return {
            "probs": list(self.env.probs),
            "switch": [{"t": t, "probs": list(ps)} for t, ps in self.env.switch_schedule],
            "algo": self.policy,
            "omega": self.omega,
            "fluct": {"kind": self.fluct.kind, "amplitude": self.fluct.amplitude,
                      "period": self.fluct.period, "coupled": self.fluct.coupled},
            "horizon": self.horizon,
            "trials": self.trials,
            "seed": self.base_seed,
            "stride": self.record_stride,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        env = BanditEnv(d["probs"], [(s["t"], s["probs"]) for s in d.get("switch", [])])
        return cls(env=env, policy=d.get("algo", "tow"), omega=d.get("omega", "auto"),
                   fluct=FluctuationConfig(**d.get("fluct", {})),
                   horizon=d.get("horizon", 1000), trials=d.get("trials", 100),
                   base_seed=d.get("seed", 0), record_stride=d.get("stride", 10))


def build_policy(config: RunConfig):
    """Batched policy object for ``config``; raises ConfigError on arity mismatch."""
    name, params = parse_policy(config.policy)
    m = config.env.n_machines
    try:
        if name == "tow":
            return TowPolicy(m, parse_omega(config.omega, config.env.probs), config.fluct)
        if name == "cheater":
            return CheaterPolicy(m)
        if name == "randomwalk":
            return RandomWalkPolicy(m, *(params or (1.0, 1.0)))
        baseline = {
            "egreedy": lambda: EpsilonGreedy(*params),
            "softmax": lambda: Softmax(*params),
            "ucb1": UCB1,
            "ucb1tuned": UCB1Tuned,
            "random": RandomChoice,
        }[name]()
        return BaselinePolicy(m, baseline)
    except ValueError as e:
        raise ConfigError(f"policy {config.policy!r}: {e}") from e


def trial_env(config: RunConfig, trial_index: int) -> BanditEnv:
    return replace(config.env, rng_seed=derive_seed(config.base_seed, trial_index, 0))


def trial_policy_rng(config: RunConfig, trial_index: int) -> np.random.Generator:
    return make_rng(derive_seed(config.base_seed, trial_index, 1))


def recorded_steps(horizon: int, stride: int) -> np.ndarray:
    return np.arange(stride, horizon + 1, stride)


def _simulate(config: RunConfig, trials: Sequence[int], full: bool = False) -> dict:
    """Run ``trials`` side by side; returns recorded (or full) per-trial curves."""
    horizon = config.horizon
    policy = build_policy(config)
    policy.reset(len(trials))
    env_rngs = [make_rng(derive_seed(config.base_seed, i, 0)) for i in trials]
    pol_rngs = [make_rng(derive_seed(config.base_seed, i, 1)) for i in trials]

    probs = config.env.prob_table(horizon)
    pmax = probs.max(axis=1)
    best = probs == pmax[:, None]

    b = len(trials)
    rows = np.arange(b)
    cum = np.zeros(b)
    nb = np.zeros(b, np.int64)
    steps = np.arange(1, horizon + 1) if full else recorded_steps(horizon, config.record_stride)
    out = {
        "steps": steps,
        "cum_regret": np.empty((b, len(steps))),
        "correct": np.empty((b, len(steps)), bool),
        "nb": np.empty((b, len(steps)), np.int64),
    }
    if full:
        out["chosen"] = np.empty((b, horizon), np.int64)
        out["rewards"] = np.empty((b, horizon), bool)
    slot = {int(s): j for j, s in enumerate(steps)}

    for t0 in range(0, horizon, TIME_CHUNK):
        width = min(TIME_CHUNK, horizon - t0)
        pol_u = np.stack([g.random((width, policy.n_uniforms)) for g in pol_rngs])
        env_u = np.stack([g.random((width, policy.env_draws)) for g in env_rngs])
        for j in range(width):
            t = t0 + j + 1
            p_t = probs[t - 1]
            chosen = policy.select(t, pol_u[:, j])
            if policy.env_draws == 1:
                outcomes = None
                rewards = env_u[:, j, 0] < p_t[chosen]
            else:
                outcomes = env_u[:, j] < p_t
                rewards = outcomes[rows, chosen]
            policy.update(t, chosen, rewards, outcomes)
            cum += pmax[t - 1] - p_t[chosen]
            hit = best[t - 1, chosen]
            nb += ~hit
            if full:
                out["chosen"][:, t - 1] = chosen
                out["rewards"][:, t - 1] = rewards
            k = slot.get(t)
            if k is not None:
                out["cum_regret"][:, k] = cum
                out["correct"][:, k] = hit
                out["nb"][:, k] = nb
    return out


@dataclass
class TrialRecord:
    chosen: np.ndarray
    rewards: np.ndarray
    cum_regret: np.ndarray


def run_trial(config: RunConfig, trial_index: int) -> TrialRecord:
    """One trial, every step logged; identical to trial ``trial_index`` of a full run."""
    out = _simulate(config, [trial_index], full=True)
    return TrialRecord(out["chosen"][0], out["rewards"][0], out["cum_regret"][0])


@dataclass
class AggregateMetrics:
    """Per recorded step: mean and standard error of the cumulative regret,
    the fraction of trials choosing a best machine, and the mean number of
    sub-optimal plays (with its standard error, not written to CSV)."""

    steps: np.ndarray
    mean_regret: np.ndarray
    se_regret: np.ndarray
    correct_rate: np.ndarray
    mean_nb: np.ndarray
    se_nb: np.ndarray | None = None
    config: RunConfig | None = None
    per_trial: dict | None = field(default=None, repr=False)

    def final(self) -> dict:
        if len(self.steps) == 0:
            return {}
        out = {k: float(getattr(self, k)[-1]) for k in CSV_HEADER[1:]}
        out["step"] = int(self.steps[-1])
        return out


def _column_stats(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Mean and standard error per column, summed exactly so trial order is irrelevant."""
    n = x.shape[0]
    cols = x.T.astype(float)
    mean = np.array([math.fsum(c) / n for c in cols])
    if n < 2:
        return mean, np.zeros_like(mean)
    ss = np.array([math.fsum((c - m) ** 2) for c, m in zip(cols, mean)])
    return mean, np.sqrt(ss / (n - 1) / n)


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    return n if n > 0 else (os.cpu_count() or 1)


def run_experiment(config: RunConfig, threads: int | None = None,
                   keep_trials: bool = False) -> AggregateMetrics:
    """Run ``config.trials`` trials and aggregate them per recorded step."""
    build_policy(config)
    blocks = [list(range(s, min(s + BATCH, config.trials)))
              for s in range(0, config.trials, BATCH)]
    threads = threads or thread_count()
    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda blk: _simulate(config, blk), blocks))
    else:
        parts = [_simulate(config, blk) for blk in blocks]

    steps = recorded_steps(config.horizon, config.record_stride)
    regret = np.concatenate([p["cum_regret"] for p in parts])
    correct = np.concatenate([p["correct"] for p in parts])
    nb = np.concatenate([p["nb"] for p in parts])
    mean_regret, se_regret = _column_stats(regret)
    correct_rate, _ = _column_stats(correct)
    mean_nb, se_nb = _column_stats(nb)
    per_trial = {"cum_regret": regret, "correct": correct, "nb": nb} if keep_trials else None
    return AggregateMetrics(steps, mean_regret, se_regret, correct_rate, mean_nb,
                            se_nb, config, per_trial)


# -- multi-run helpers --------------------------------------------------------

def compare(config: RunConfig, policies: Iterable[str], **kw) -> dict[str, AggregateMetrics]:
    """Run each policy on the same per-trial streams."""
    return {p: run_experiment(replace(config, policy=p), **kw) for p in policies}


SWEEP_PARAMS = ("omega", "amplitude", "period", "epsilon", "tau")


def with_param(config: RunConfig, param: str, value: float) -> RunConfig:
    """Copy of ``config`` with one tunable parameter set to ``value``."""
    name, _ = parse_policy(config.policy)
    if param == "omega":
        return replace(config, omega=float(value))
    if param == "amplitude":
        return replace(config, fluct=replace(config.fluct, amplitude=float(value)))
    if param == "period":
        return replace(config, fluct=replace(config.fluct, period=int(round(value))))
    if param in ("epsilon", "tau"):
        want = "egreedy" if param == "epsilon" else "softmax"
        if name != want:
            raise ConfigError(f"parameter {param} applies to policy {want}, not {name}")
        return replace(config, policy=f"{want}:{value!r}")
    raise ConfigError(f"cannot sweep {param!r}; choose from {', '.join(SWEEP_PARAMS)}")


def sweep(config: RunConfig, param: str, values: Sequence[float], **kw) -> list[tuple[float, AggregateMetrics]]:
    return [(v, run_experiment(with_param(config, param, v), **kw)) for v in values]


# -- files ------------------------------------------------------------------

def _fmt(x) -> str:
    return repr(float(x))


def metric_rows(metrics: AggregateMetrics) -> list[list[str]]:
    return [[str(int(s)), _fmt(r), _fmt(e), _fmt(c), _fmt(n)]
            for s, r, e, c, n in zip(metrics.steps, metrics.mean_regret, metrics.se_regret,
                                     metrics.correct_rate, metrics.mean_nb)]


def sidecar_path(path) -> Path:
    return Path(path).with_suffix(".json")


def _write(path: Path, write) -> None:
    try:
        with open(path, "w", newline="") as fh:
            write(fh)
    except OSError as e:
        raise OSError(e.errno, f"cannot write results to {path}: {e.strerror}") from e


def write_metrics_csv(fh, metrics: AggregateMetrics) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_HEADER)
    w.writerows(metric_rows(metrics))


def write_compare_csv(fh, results: dict[str, AggregateMetrics]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(("policy",) + CSV_HEADER)
    for name, metrics in results.items():
        w.writerows([name] + row for row in metric_rows(metrics))


def write_results(metrics: AggregateMetrics, path) -> None:
    """CSV of the per-step metrics plus a JSON sidecar holding the run config."""
    path = Path(path)
    _write(path, lambda fh: write_metrics_csv(fh, metrics))
    if metrics.config is not None:
        _write(sidecar_path(path), lambda fh: json.dump(metrics.config.to_dict(), fh, indent=2))


def read_results(path) -> AggregateMetrics:
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != CSV_HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        rows = [r for r in reader if r]
    cols = list(zip(*rows)) if rows else [()] * len(CSV_HEADER)
    config = None
    side = sidecar_path(path)
    if side.exists():
        config = RunConfig.from_dict(json.loads(side.read_text()))
    return AggregateMetrics(
        steps=np.array([int(s) for s in cols[0]], np.int64),
        mean_regret=np.array(cols[1], float), se_regret=np.array(cols[2], float),
        correct_rate=np.array(cols[3], float), mean_nb=np.array(cols[4], float),
        config=config)


def write_compare(results: dict[str, AggregateMetrics], path) -> None:
    """Merged CSV keyed by policy name: ``policy,step,...``."""
    _write(Path(path), lambda fh: write_compare_csv(fh, results))
