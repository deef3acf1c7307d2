"""Closed-form error probabilities and regret bounds for two machines.

A policy that compares two Gaussian-approximated score sums picks the worse
machine with probability Q(phi * sqrt(N)), where Q is the standard normal
upper tail.  Summing the Chernoff bound Q(x) <= exp(-x^2/2)/2 over steps gives
a bound on E(N_B) that stays finite as N grows, hence constant regret.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import erfc

from .tow import omega_zero

_SQRT2 = math.sqrt(2.0)


def qfunc(x):
    """Standard normal upper-tail probability, Q(x) = erfc(x / sqrt 2) / 2.

    Accepts scalars or arrays.  ``erfc`` keeps full relative precision in the
    far tail, unlike ``1 - Phi(x)``.
    """
    out = 0.5 * erfc(np.asarray(x, dtype=float) / _SQRT2)
    return float(out) if out.ndim == 0 else out


def chernoff(x):
    """Upper bound exp(-x^2 / 2) / 2 on Q(x), valid for x >= 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("the Chernoff tail bound is stated for x >= 0")
    out = 0.5 * np.exp(-0.5 * x * x)
    return float(out) if out.ndim == 0 else out


def bernoulli_variance(p: float) -> float:
    return p * (1.0 - p)


def phi(mu_a: float, mu_b: float, sigma_a: float, sigma_b: float) -> float:
    """Separation of the cheater's score difference: gap / sqrt(sigma_A^2 + sigma_B^2)."""
    if not mu_a > mu_b:
        raise ValueError(f"need mu_a > mu_b, got {mu_a} <= {mu_b}")
    var = sigma_a**2 + sigma_b**2
    if var <= 0:
        raise ValueError("combined variance must be positive")
    return (mu_a - mu_b) / math.sqrt(var)


def phi_tow(mu_a: float, mu_b: float, sigma: float, omega0: float) -> float:
    """Separation for TOW at omega0 with equal per-machine deviation ``sigma``."""
    if not mu_a > mu_b:
        raise ValueError(f"need mu_a > mu_b, got {mu_a} <= {mu_b}")
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    if omega0 < 0:
        raise ValueError("omega0 must be non-negative")
    return (mu_a - mu_b) * (1.0 + omega0) / (2.0 * sigma)


def p_wrong(phi_value: float, n):
    """Probability of choosing the worse machine after ``n`` steps: Q(phi sqrt n)."""
    if not phi_value > 0:
        raise ValueError("phi must be positive")
    return qfunc(phi_value * np.sqrt(np.asarray(n, dtype=float)))


def e_nb_limit(phi_value: float) -> float:
    return 0.5 + 1.0 / phi_value**2


def e_nb_bound(phi_value: float, n: int) -> float:
    """Upper bound on E(N_B) = sum_{t<n} Q(phi sqrt t) after ``n`` steps.

    The first term is Q(0) = 1/2; the rest is bounded by the Chernoff sum and
    then by its integral, giving 1/2 - (exp(-phi^2 (n-1)/2) - 1) / phi^2.
    """
    if not phi_value > 0:
        raise ValueError("phi must be positive")
    if n < 1:
        raise ValueError("horizon must be >= 1")
    p2 = phi_value * phi_value
    return 0.5 - math.expm1(-0.5 * p2 * (n - 1)) / p2


def regret_bound(mu_a: float, mu_b: float, phi_value: float, n: int) -> float:
    return (mu_a - mu_b) * e_nb_bound(phi_value, n)


def regret_limit(mu_a: float, mu_b: float, phi_value: float) -> float:
    return (mu_a - mu_b) * e_nb_limit(phi_value)


def s_moments_tow(mu_a: float, mu_b: float, sigma_a: float, sigma_b: float,
                  omega: float, n: int, d: int) -> tuple[float, float]:
    """Mean and variance of S = S_A - S_B for TOW with N = N_A + N_B, D = N_A - N_B.

    Losses are taken at their expectation, L_k = (1 - mu_k) N_k.
    """
    if n < 0 or abs(d) > n:
        raise ValueError(f"need 0 <= |d| <= n, got n={n}, d={d}")
    mean = (mu_a - mu_b) / 2 * (1 + omega) * n + d_coefficient(mu_a, mu_b, omega) * d
    var = (sigma_a**2 + sigma_b**2) / 2 * n + (sigma_a**2 - sigma_b**2) / 2 * d
    return mean, var


def d_coefficient(mu_a: float, mu_b: float, omega: float) -> float:
    """Coefficient of D in E(S); zero exactly when omega = omega0(mu_A + mu_B)."""
    return (mu_a + mu_b) / 2 * (1 + omega) - omega


@dataclass(frozen=True)
class BoundReport:
    """Analytic quantities for a Bernoulli pair (mu_a > mu_b) at horizon N.

    The unsuffixed bound fields use the cheater separation ``phi``; the
    ``*_tow`` fields repeat them with the TOW separation ``phi_t``.
    """

    mu_a: float
    mu_b: float
    horizon: int
    omega0: float
    phi: float
    phi_t: float
    e_nb_bound: float
    e_nb_limit: float
    regret_bound: float
    regret_limit: float
    e_nb_bound_tow: float
    e_nb_limit_tow: float
    regret_bound_tow: float
    regret_limit_tow: float

    def as_dict(self) -> dict:
        return asdict(self)

    def format(self) -> str:
        rows = [(k, v) for k, v in self.as_dict().items()]
        width = max(len(k) for k, _ in rows)
        lines = []
        for k, v in rows:
            val = str(v) if isinstance(v, int) else f"{v:.6f}"
            lines.append(f"{k.ljust(width)}  {val}")
        return "\n".join(lines)


def bound_report(mu_a: float, mu_b: float, horizon: int) -> BoundReport:
    """Cheater and TOW bounds for Bernoulli machines paying with mu_a > mu_b.

    The TOW deviation is sigma^2 = (sigma_A^2 + sigma_B^2) / 2, which is the
    common variance when the two are equal.
    """
    va, vb = bernoulli_variance(mu_a), bernoulli_variance(mu_b)
    w0 = omega_zero(mu_a + mu_b)
    ph = phi(mu_a, mu_b, math.sqrt(va), math.sqrt(vb))
    pt = phi_tow(mu_a, mu_b, math.sqrt((va + vb) / 2), w0)
    return BoundReport(
        mu_a=mu_a, mu_b=mu_b, horizon=horizon, omega0=w0, phi=ph, phi_t=pt,
        e_nb_bound=e_nb_bound(ph, horizon), e_nb_limit=e_nb_limit(ph),
        regret_bound=regret_bound(mu_a, mu_b, ph, horizon),
        regret_limit=regret_limit(mu_a, mu_b, ph),
        e_nb_bound_tow=e_nb_bound(pt, horizon), e_nb_limit_tow=e_nb_limit(pt),
        regret_bound_tow=regret_bound(mu_a, mu_b, pt, horizon),
        regret_limit_tow=regret_limit(mu_a, mu_b, pt),
    )
