import numpy as np
import pytest
from hypothesis import given, strategies as st

import goalbench as gb
from goalbench.env_core import ConfigurationError, integrate_step
from goalbench.environments import TwoTankParams, make_env, reward

# field-for-field expectations for all six systems
EXPECTED = {
    "inverted_pendulum": dict(
        state_dim=4, action_dim=1, dt=0.01, horizon=1500,
        s0=[np.pi / 7, 2.0, 0.0, 0.0], bounds=[[-50, 50]],
        goal=[(0, 0.0, 0.1)],
    ),
    "pendulum": dict(
        state_dim=2, action_dim=1, dt=0.01, horizon=1000,
        s0=[np.pi, 1.0], bounds=[[-0.1, 0.1]],
        goal=[(0, np.pi, 0.25), (1, 0.0, 0.25)],
    ),
    "3wrobot_kin": dict(
        state_dim=3, action_dim=2, dt=0.01, horizon=500,
        s0=[5.0, 5.0, 2 * np.pi / 3], bounds=[[-25, 25], [-5, 5]],
        goal=[(0, 0.0, 1.0), (1, 0.0, 1.0), (2, 0.0, 0.7)],
    ),
    "2tank": dict(
        state_dim=2, action_dim=1, dt=0.1, horizon=800,
        s0=[2.0, -2.0], bounds=[[0, 1]],
        goal=[(0, 0.4, 0.05), (1, 0.4, 0.05)],
    ),
    "lunar_lander": dict(
        state_dim=6, action_dim=2, dt=0.01, horizon=1000,
        s0=[3.0, 5.0, 2 * np.pi / 3, 0.0, 0.0, 0.0],
        bounds=[[-100, 100], [-50, 50]],
        goal=[(1, 1.0, 0.05), (2, 0.0, 0.05)],
    ),
    "omnibot": dict(
        state_dim=2, action_dim=2, dt=0.01, horizon=1000,
        s0=[-10.0, -10.0], bounds=[[-10, 10], [-10, 10]],
        goal=[(0, 0.0, 0.5), (1, 0.0, 0.5)],
    ),
}


@pytest.mark.parametrize("name", sorted(EXPECTED))
def test_spec_fields_match_published_table(name):
    spec = make_env(name)
    exp = EXPECTED[name]
    assert spec.state_dim == exp["state_dim"]
    assert spec.action_dim == exp["action_dim"]
    assert spec.dt == exp["dt"]
    assert spec.horizon_steps == exp["horizon"]
    assert np.allclose(spec.initial_state, exp["s0"], atol=0)
    assert np.allclose(spec.action_bounds, exp["bounds"], atol=0)
    got = [(c.index, c.center, c.halfwidth) for c in spec.goal.constraints]
    assert got == [(i, pytest.approx(c), pytest.approx(h)) for i, c, h in exp["goal"]]


def test_unknown_environment_rejected():
    with pytest.raises(ConfigurationError, match="unknown environment"):
        make_env("cartpole")


def test_reward_examples():
    omni = make_env("omnibot")
    assert reward(omni, [-10.0, -10.0], [3.0, 3.0]) == -2000.0

    pend = make_env("pendulum")
    assert reward(pend, [0.0, 0.0], [0.0]) == 0.0
    assert reward(pend, [np.pi, 0.0], [0.1]) == pytest.approx(
        -np.pi**2 - 0.001 * 0.01, abs=1e-12)

    lunar = make_env("lunar_lander")
    assert reward(lunar, [0, 1, 0, 0, 0, 0], [30.0, 10.0]) == 0.0

    robot = make_env("3wrobot_kin")
    assert reward(robot, [5, 5, 2 * np.pi / 3], [0, 0]) == pytest.approx(
        -25 - 250 - (2 * np.pi / 3) ** 2)

    cart = make_env("inverted_pendulum")
    assert reward(cart, [0, 2, 0, 0], [10.0]) == 0.0


STATE_SCALES = {
    "inverted_pendulum": 2 * np.pi,
    "pendulum": 2 * np.pi,
    "3wrobot_kin": 8.0,
    "2tank": 3.0,
    "lunar_lander": 8.0,
    "omnibot": 12.0,
}


@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_reward_nonpositive_everywhere(seed):
    rng = np.random.default_rng(seed)
    for name in gb.ENV_NAMES:
        spec = make_env(name)
        s = rng.uniform(-STATE_SCALES[name], STATE_SCALES[name], spec.state_dim)
        a = rng.uniform(spec.action_bounds[:, 0], spec.action_bounds[:, 1])
        assert reward(spec, s, a) <= 0.0


@pytest.mark.parametrize("name", sorted(set(EXPECTED) - {"pendulum"}))
def test_reward_is_maximal_at_goal_center(name):
    # the pendulum is exempt: its printed goal centers on the hanging pose
    # while the printed reward peaks at the upright one
    spec = make_env(name)
    center = spec.initial_state.astype(float).copy() * 0.0
    for c in spec.goal.constraints:
        center[c.index] = c.center
    a0 = np.zeros(spec.action_dim)
    r_center = reward(spec, center, a0)
    rng = np.random.default_rng(1)
    for _ in range(200):
        s = center.copy()
        for c in spec.goal.constraints:
            s[c.index] = c.center + rng.uniform(-c.halfwidth, c.halfwidth)
        assert reward(spec, s, a0) <= r_center + 1e-12


def test_omnibot_constant_action_integrates_exactly():
    spec = make_env("omnibot")
    rng = np.random.default_rng(7)
    s = rng.uniform(-5, 5, 2)
    a = rng.uniform(-10, 10, 2)
    cur = s.copy()
    for _ in range(100):
        cur = integrate_step(spec, cur, a)
    assert np.allclose(cur, s + 100 * spec.dt * a, atol=1e-12)


def test_two_tank_inflow_fixed_point_structure():
    p = TwoTankParams()
    spec = make_env("2tank")
    for i in (0.1, 0.3077, 0.9):
        h1 = p.K1 * i
        ds = spec.dynamics(np.array([h1, 0.2]), np.array([i]))
        assert ds[0] == pytest.approx(0.0, abs=1e-15)


def test_sampling_rates():
    for name in gb.ENV_NAMES:
        assert make_env(name).dt == (0.1 if name == "2tank" else 0.01)


def test_three_wheel_printed_rhs_variant():
    printed = make_env("3wrobot_kin", printed_rhs=True)
    s = np.array([2.0, 3.0, 0.5])
    a = np.array([4.0, 1.0])
    ds = printed.dynamics(s, a)
    assert ds[0] == pytest.approx(2.0 * np.cos(0.5))
    assert ds[1] == pytest.approx(3.0 * np.sin(0.5))
    assert ds[2] == pytest.approx(1.0)
    default = make_env("3wrobot_kin")
    ds2 = default.dynamics(s, a)
    assert ds2[0] == pytest.approx(4.0 * np.cos(0.5))
    assert ds2[1] == pytest.approx(4.0 * np.sin(0.5))


def test_dynamics_broadcast_over_candidate_batches():
    for name in gb.ENV_NAMES:
        spec = make_env(name)
        batch = np.tile((spec.action_bounds[:, 0] + spec.action_bounds[:, 1]) / 2,
                        (5, 1))
        out = integrate_step(spec, spec.initial_state, batch)
        assert out.shape == (5, spec.state_dim)
        single = integrate_step(spec, spec.initial_state, batch[0])
        assert np.array_equal(out[0], single)
