import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ccce.vertiport import (ScenarioTooLargeError, VertiportScenario, build_game, occupancy_bits, occupancy_cost,
                            sample_sigmas, weights_from_sigmas)


def test_encoding():
    np.testing.assert_array_equal(occupancy_bits(2), [[0, 0], [1, 0], [0, 1], [1, 1]])


def test_cost_examples():
    scen = VertiportScenario(n=4, m=2, gamma=1.5)
    assert occupancy_cost(scen, 0, (3, 0, 0, 0)) == 0.0
    assert occupancy_cost(scen, 1, (3, 0, 0, 0)) == 10.0
    # everyone on vertiport 0, nobody on vertiport 1
    for i in range(4):
        assert occupancy_cost(scen, i, (1, 1, 1, 1)) == pytest.approx(27.5)


def test_build_game_sizes_and_values():
    game = build_game(VertiportScenario(n=4, m=2))
    assert game.num_profiles == 256 and game.action_counts == (4,) * 4
    tiny = build_game(VertiportScenario(n=1, m=1))
    np.testing.assert_array_equal(tiny.costs, [[5.0, 0.0]])
    scen = VertiportScenario(n=3, m=2, gamma=1.3)
    game = build_game(scen)
    for k, p in enumerate(itertools.product(range(4), repeat=3)):
        for i in range(3):
            assert game.costs[i, k] == pytest.approx(occupancy_cost(scen, i, p))


def test_gamma_one_is_plain_penalty():
    scen = VertiportScenario(n=2, m=1, gamma=1.0)
    assert occupancy_cost(scen, 0, (1, 1)) == 5.0


def test_profile_cap():
    with pytest.raises(ScenarioTooLargeError):
        build_game(VertiportScenario(n=11, m=2))
    with pytest.raises(ScenarioTooLargeError):
        build_game(VertiportScenario(n=3, m=2, max_profiles=63))


@pytest.mark.parametrize("kwargs", [dict(n=0), dict(m=0), dict(gamma=0.9)])
def test_scenario_validation(kwargs):
    with pytest.raises(ValueError):
        VertiportScenario(**kwargs)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 4), st.integers(1, 2), st.floats(1, 3))
def test_cost_nonnegative_zero_iff_alone_everywhere(n, m, gamma):
    scen = VertiportScenario(n=n, m=m, gamma=gamma)
    game = build_game(scen)
    full = 2**m - 1
    for k in range(game.num_profiles):
        p = game.profile(k)
        for i in range(n):
            alone = p[i] == full and all(p[j] == 0 for j in range(n) if j != i)
            assert game.costs[i, k] >= 0
            assert (game.costs[i, k] == 0) == alone


@settings(max_examples=20, deadline=None)
@given(st.permutations(range(4)), st.floats(1, 3))
def test_agent_symmetry(perm, gamma):
    scen = VertiportScenario(n=4, m=2, gamma=gamma)
    game = build_game(scen)
    rng = np.random.default_rng(0)
    for _ in range(20):
        p = tuple(int(a) for a in rng.integers(0, 4, 4))
        q = tuple(p[perm[j]] for j in range(4))  # agent j in q plays what agent perm[j] played in p
        for j in range(4):
            assert game.costs[j, game.profile_index(q)] == game.costs[perm[j], game.profile_index(p)]


@settings(max_examples=20, deadline=None)
@given(st.floats(1, 2), st.floats(0, 2))
def test_gamma_monotone(g1, dg):
    a = build_game(VertiportScenario(n=3, m=2, gamma=g1)).costs
    b = build_game(VertiportScenario(n=3, m=2, gamma=g1 + dg)).costs
    c = build_game(VertiportScenario(n=3, m=2, gamma=1.0)).costs
    congested = a != build_game(VertiportScenario(n=3, m=2, gamma=1.0, congestion_penalty=0.0)).costs
    assert np.all(b >= a - 1e-12)
    np.testing.assert_array_equal(a[~congested], b[~congested])
    np.testing.assert_array_equal(a[~congested], c[~congested])


def test_sample_sigmas():
    assert np.all(sample_sigmas(VertiportScenario(gamma=1.0), np.random.default_rng(0)) == 0)
    s = sample_sigmas(VertiportScenario(gamma=1.5), np.random.default_rng(1))
    assert s.shape == (4,) and np.all((s >= 0) & (s <= 0.15))
    np.testing.assert_array_equal(s, sample_sigmas(VertiportScenario(gamma=1.5), np.random.default_rng(1)))


def test_weights():
    np.testing.assert_allclose(weights_from_sigmas([0.1, 0.2]), [2 / 3, 1 / 3])
    np.testing.assert_allclose(weights_from_sigmas([0.3] * 3), [1 / 3] * 3)
    w = weights_from_sigmas([0.1, 0.5, 0.2])
    assert np.argmin(w) == 1 and w.sum() == pytest.approx(1.0)
    w0 = weights_from_sigmas([0.0, 0.0])
    np.testing.assert_allclose(w0, [0.5, 0.5])
    with pytest.raises(ValueError):
        weights_from_sigmas([-0.1, 0.2])
