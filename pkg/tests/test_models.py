import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from towbandit.env import BanditEnv, PlayHistory, make_rng
from towbandit.models import (BaselinePolicy, CheaterPolicy, CheaterState, EpsilonGreedy,
                              RandomChoice, RandomWalkState, Softmax, UCB1, UCB1Tuned,
                              alpha_beta_ratio_from_gamma, baseline_select, cheater_declare,
                              cheater_step, q_diff, q_double_prime_diff, q_prime, rw_closed_form,
                              rw_expected, rw_step, separation_ok)
from towbandit.tow import omega_zero

histories = st.integers(0, 10_000).flatmap(
    lambda na: st.integers(0, 10_000).flatmap(
        lambda nb: st.tuples(st.just(na), st.just(nb), st.integers(0, na), st.integers(0, nb))))
gammas = st.floats(0.01, 1.99)


def hist(na, nb, la, lb):
    return PlayHistory([na, nb], [la, lb])


# random walk

def test_rw_step_examples():
    s = RandomWalkState.fresh(1, 1.0, 1.0)
    rw_step(s, 0, True)
    assert s.r[0] == 1.0
    s = RandomWalkState.fresh(1, 1.0, 2.0)
    rw_step(s, 0, True)
    rw_step(s, 0, False)
    assert s.r[0] == -1.0


@settings(max_examples=50)
@given(st.lists(st.tuples(st.integers(0, 1), st.booleans()), max_size=300),
       st.floats(0.1, 5), st.floats(0.1, 5))
def test_rw_bookkeeping_matches_closed_form(events, alpha, beta):
    s = RandomWalkState.fresh(2, alpha, beta)
    h = PlayHistory.empty(2)
    for k, r in events:
        rw_step(s, k, r)
        h.record(k, r)
    assert np.allclose(s.r, rw_closed_form(h, alpha, beta), atol=1e-9)


def test_rw_expected():
    assert rw_expected(1, 1, 0.5, 123) == 0
    assert rw_expected(1, 1, 0.6, 100) == pytest.approx(20.0, abs=1e-12)
    assert rw_expected(2, 3, 0.3, 0) == 0
    with pytest.raises(ValueError):
        rw_expected(1, 1, 1.5, 10)


def test_separation_ok():
    assert separation_ok(1, 1, 0.6, 0.4)
    assert not separation_ok(9, 1, 0.6, 0.4)
    assert not separation_ok(1, 1, 0.5, 0.3)   # threshold 0.5 == P_A
    assert not separation_ok(1, 1, 0.7, 0.5)   # threshold 0.5 == P_B
    with pytest.raises(ValueError):
        separation_ok(1, 1, 0.4, 0.4)


def test_alpha_beta_ratio():
    assert alpha_beta_ratio_from_gamma(1.0) == 1.0
    assert alpha_beta_ratio_from_gamma(0.8) == pytest.approx(2 / 3)
    rng = np.random.default_rng(0)
    for g in rng.uniform(0.001, 1.999, 100):
        assert alpha_beta_ratio_from_gamma(g) == omega_zero(g)
        w = alpha_beta_ratio_from_gamma(g)
        assert w / (1 + w) == pytest.approx(g / 2, rel=1e-12)


# cheater

def test_cheater_step_examples():
    env = BanditEnv([1.0, 0.0], rng_seed=1)
    st_, declared = cheater_step(CheaterState(), env, 1, np.random.default_rng(0))
    assert st_.s.tolist() == [1.0, 0.0] and declared == 0
    assert env.draws == 2
    for t in range(2, 10):
        _, declared = cheater_step(st_, env, t, np.random.default_rng(t))
        assert declared == 0
    assert env.draws == 18


def test_cheater_tie_is_fair():
    rng = np.random.default_rng(4)
    s = CheaterState([2.0, 2.0])
    n = 10_000
    a = sum(cheater_declare(s, rng) == 0 for _ in range(n))
    assert abs(a / n - 0.5) <= 3 * math.sqrt(0.25 / n)


def test_cheater_tow_analysis_mode():
    env = BanditEnv([0.0, 0.0], rng_seed=0)
    s, _ = cheater_step(CheaterState(omega=0.5), env, 1, np.random.default_rng(0))
    assert s.s.tolist() == [-0.5, -0.5]


def test_cheater_rejects_many_machines():
    with pytest.raises(ValueError):
        cheater_step(CheaterState(), BanditEnv([0.1, 0.2, 0.3]), 1, np.random.default_rng(0))
    with pytest.raises(ValueError):
        CheaterPolicy(3)


def test_cheater_batched_matches_scalar():
    env_seed, pol_seed = 5, 6
    env = BanditEnv([0.55, 0.45], rng_seed=env_seed)
    rng = make_rng(pol_seed)
    s = CheaterState()
    declared = cheater_declare(s, rng)
    ref = []
    for t in range(1, 201):
        ref.append(declared)
        s, declared = cheater_step(s, env, t, rng)

    pol = CheaterPolicy()
    pol.reset(1)
    env_rng, pol_rng = make_rng(env_seed), make_rng(pol_seed)
    got = []
    for t in range(1, 201):
        c = pol.select(t, pol_rng.random((1, 1)))
        out = env_rng.random((1, 2)) < [0.55, 0.45]
        pol.update(t, c, out[0, c], out)
        got.append(int(c[0]))
    assert got == ref


# simultaneous-update estimator

def test_q_prime_examples():
    assert q_prime(hist(0, 0, 0, 0), 0.7) == (0.0, 0.0)
    assert q_prime(hist(3, 2, 1, 2), 1.0) == (4.0, 1.0)
    assert q_prime(hist(7, 0, 3, 0), 1.0)[0] == 4.0


def test_q_prime_matches_table_estimates():
    # N_A (N_A-L_A)/N_A + N_B (gamma - (N_B-L_B)/N_B), and the mirror for B
    na, nb, la, lb, g = 9, 5, 4, 2, 1.3
    qa = na * (na - la) / na + nb * (g - (nb - lb) / nb)
    qb = na * (g - (na - la) / na) + nb * (nb - lb) / nb
    assert q_prime(hist(na, nb, la, lb), g) == pytest.approx((qa, qb), abs=1e-12)


def test_q_diff_examples():
    assert q_diff(hist(4, 4, 2, 2), 0.3) == 0
    assert q_diff(hist(3, 2, 1, 2), 1.0) == 3.0
    assert q_diff(hist(9, 4, 2, 2), 5.0) == 5.0


def test_q_double_prime_diff_examples():
    h = hist(3, 2, 1, 2)
    assert q_double_prime_diff(h, 1.0) == 3.0 == q_diff(h, omega_zero(1.0))
    assert q_double_prime_diff(hist(5, 5, 1, 1), 0.4) == 0
    with pytest.raises(ValueError):
        q_double_prime_diff(h, 2.0)


@given(histories, gammas)
def test_double_prime_is_rescaled_prime(h, g):
    ph = hist(*h)
    qa, qb = q_prime(ph, g)
    assert q_double_prime_diff(ph, g) == pytest.approx((qa - qb) / (2 - g), abs=1e-7)


@given(histories, gammas)
def test_difference_identity_and_sign(h, g):
    ph = hist(*h)
    a, b = q_diff(ph, omega_zero(g)), q_double_prime_diff(ph, g)
    assert abs(a - b) <= 1e-9
    if abs(a) > 1e-6:
        assert np.sign(a) == np.sign(b)


# baselines

def _freqs(policy, history, n=10_000, seed=0):
    rng = np.random.default_rng(seed)
    return np.bincount([baseline_select(policy, history, rng) for _ in range(n)],
                       minlength=history.n_machines) / n


def test_epsilon_one_is_uniform():
    f = _freqs(EpsilonGreedy(1.0), PlayHistory([10, 10], [2, 8]))
    assert abs(f[0] - 0.5) <= 3 * math.sqrt(0.25 / 10_000)


def test_epsilon_zero_exploits():
    h = PlayHistory([10, 10], [2, 8])
    rng = np.random.default_rng(1)
    assert all(baseline_select(EpsilonGreedy(0.0), h, rng) == 0 for _ in range(200))


def test_softmax_high_temperature_is_uniform():
    f = _freqs(Softmax(1e9), PlayHistory([10, 10, 10], [0, 5, 10]))
    assert np.all(np.abs(f - 1 / 3) <= 3 * math.sqrt(2 / 9 / 10_000))


def test_softmax_low_temperature_is_greedy():
    f = _freqs(Softmax(1e-3), PlayHistory([10, 10], [7, 2]), n=500)
    assert f[1] == 1.0


def test_softmax_probabilities():
    h = PlayHistory([10, 10], [2, 6])   # means 0.8, 0.4
    tau = 0.2
    p0 = 1 / (1 + math.exp((0.4 - 0.8) / tau))
    f = _freqs(Softmax(tau), h, n=20_000, seed=3)
    assert abs(f[0] - p0) <= 3 * math.sqrt(p0 * (1 - p0) / 20_000)


@pytest.mark.parametrize("policy", [UCB1(), UCB1Tuned()])
def test_ucb_round_robin_start(policy):
    rng = np.random.default_rng(0)
    h = PlayHistory.empty(3)
    order = []
    for _ in range(3):
        k = baseline_select(policy, h, rng)
        order.append(k)
        h.record(k, False)
    assert order == [0, 1, 2]


def test_ucb1_index():
    h = PlayHistory([10, 2], [3, 1])  # means 0.7, 0.5; n = 12
    i0 = 0.7 + math.sqrt(2 * math.log(12) / 10)
    i1 = 0.5 + math.sqrt(2 * math.log(12) / 2)
    assert baseline_select(UCB1(), h, np.random.default_rng(0)) == int(i1 > i0)


def test_ucb1_tuned_index():
    h = PlayHistory([50, 3], [10, 2])
    n = 53

    def idx(mean, nk):
        v = mean * (1 - mean) + math.sqrt(2 * math.log(n) / nk)
        return mean + math.sqrt(math.log(n) / nk * min(0.25, v))
    want = int(idx(1 / 3, 3) > idx(0.8, 50))
    assert baseline_select(UCB1Tuned(), h, np.random.default_rng(0)) == want


def test_random_choice_uniform():
    f = _freqs(RandomChoice(), PlayHistory.empty(4))
    assert np.all(np.abs(f - 0.25) <= 3 * math.sqrt(0.1875 / 10_000))


@pytest.mark.parametrize("bad", [lambda: EpsilonGreedy(1.5), lambda: EpsilonGreedy(-0.1),
                                 lambda: Softmax(0.0), lambda: RandomWalkState([0, 0], 0, 1)])
def test_invalid_parameters(bad):
    with pytest.raises(ValueError):
        bad()


@pytest.mark.parametrize("policy", [EpsilonGreedy(0.2), Softmax(0.1), UCB1(), UCB1Tuned(),
                                    RandomChoice()])
def test_batched_baseline_matches_scalar(policy):
    probs = [0.3, 0.6, 0.5]
    env = BanditEnv(probs, rng_seed=77)
    rng = make_rng(78)
    h = PlayHistory.empty(3)
    ref = []
    for t in range(1, 301):
        k = baseline_select(policy, h, rng)
        h.record(k, env.pull(k, t))
        ref.append(k)

    pol = BaselinePolicy(3, policy)
    pol.reset(1)
    env_rng, pol_rng = make_rng(77), make_rng(78)
    got = []
    for t in range(1, 301):
        c = pol.select(t, pol_rng.random((1, 3)))
        pol.update(t, c, env_rng.random(1) < np.array(probs)[c])
        got.append(int(c[0]))
    assert got == ref
