"""The six benchmark systems: dynamics, rewards, goal boxes, initial states.

Parameter values, rewards, goal sets, initial conditions, action ranges and
sampling rates follow the published benchmark definitions verbatim.  Horizons
follow the hyperparameter tables (1500 / 1000 / 500 / 800 / 1000 / 1000 steps).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .env_core import (
    BoxConstraint,
    ConfigurationError,
    EnvironmentSpec,
    GoalBox,
    wrap_angle,
)


@dataclass(frozen=True)
class PendulumParams:
    m: float = 0.127  # kg
    l: float = 0.337  # m
    g: float = 9.81  # m/s^2


@dataclass(frozen=True)
class InvertedPendulumParams:
    m_c: float = 0.1  # cart mass, kg
    m_p: float = 2.0  # pole mass, kg
    l: float = 0.5  # pole length, m
    g: float = 9.81


@dataclass(frozen=True)
class TwoTankParams:
    K1: float = 1.3  # inflow scaling
    K2: float = 1.0  # tank-1 -> tank-2 flow scaling
    K3: float = 0.2  # quadratic leak scaling
    tau1: float = 18.4  # base area, tank 1
    tau2: float = 24.4  # base area, tank 2


@dataclass(frozen=True)
class LunarParams:
    m: float = 10.0
    J: float = 3.0
    g: float = 1.625


ENV_NAMES = (
    "inverted_pendulum",
    "pendulum",
    "3wrobot_kin",
    "2tank",
    "lunar_lander",
    "omnibot",
)


def _omnibot() -> EnvironmentSpec:
    def dynamics(s, a):
        return np.broadcast_to(a, np.broadcast_shapes(s.shape, a.shape)).astype(float)

    def reward(s, a):
        return -10.0 * s[..., 0] ** 2 - 10.0 * s[..., 1] ** 2

    goal = GoalBox((BoxConstraint(0, 0.0, 0.5), BoxConstraint(1, 0.0, 0.5)))
    return EnvironmentSpec(
        name="omnibot", state_dim=2, action_dim=2,
        dynamics=dynamics, reward=reward, goal=goal,
        action_bounds=np.array([[-10.0, 10.0], [-10.0, 10.0]]),
        initial_state=np.array([-10.0, -10.0]),
        dt=0.01, horizon_steps=1000,
        goal_center_map=lambda s: np.asarray(s, dtype=float),
    )


def _pendulum(p: PendulumParams = PendulumParams()) -> EnvironmentSpec:
    def dynamics(s, a):
        th, om = s[..., 0], s[..., 1]
        dom = 1.5 * p.g / p.l * np.sin(th) + 3.0 * a[..., 0] / (p.m * p.l**2)
        return np.stack([om + 0.0 * dom, dom], axis=-1)

    def reward(s, a):
        # arccos(cos th) evaluated as |wrap(th)|, avoiding arccos conditioning
        ang = np.abs(wrap_angle(s[..., 0]))
        return -(ang**2) - 0.1 * s[..., 1] ** 2 - 0.001 * a[..., 0] ** 2

    def center(s):
        s = np.asarray(s, dtype=float)
        return np.stack([wrap_angle(s[..., 0] - np.pi), s[..., 1]], axis=-1)

    goal = GoalBox((BoxConstraint(0, np.pi, 0.25, wrap=True), BoxConstraint(1, 0.0, 0.25)))
    return EnvironmentSpec(
        name="pendulum", state_dim=2, action_dim=1,
        dynamics=dynamics, reward=reward, goal=goal,
        action_bounds=np.array([[-0.1, 0.1]]),
        initial_state=np.array([np.pi, 1.0]),
        dt=0.01, horizon_steps=1000,
        goal_center_map=center,
    )


def _inverted_pendulum(p: InvertedPendulumParams = InvertedPendulumParams()) -> EnvironmentSpec:
    mc, mp, l, g = p.m_c, p.m_p, p.l, p.g

    def dynamics(s, a):
        th, x, om, v = s[..., 0], s[..., 1], s[..., 2], s[..., 3]
        F = a[..., 0]
        sin, cos = np.sin(th), np.cos(th)
        dom = (g * sin * (mc + mp) - cos * (F + mp * l * om**2 * sin)) / (
            4.0 * l / 3.0 * (mc + mp) - l * mp * cos**2
        )
        dv = (F + mp * l * om**2 * sin - 3.0 / 8.0 * mp * g * np.sin(2.0 * th)) / (
            mc + mp - 3.0 / 4.0 * mp * cos**2
        )
        return np.stack([om + 0.0 * F, v + 0.0 * F, dom, dv], axis=-1)

    def reward(s, a):
        return -20.0 * (1.0 - np.cos(s[..., 0])) - 2.0 * s[..., 2] ** 2

    def center(s):
        s = np.asarray(s, dtype=float)
        return np.stack(
            [wrap_angle(s[..., 0]), s[..., 1], s[..., 2], s[..., 3]], axis=-1
        )

    goal = GoalBox((BoxConstraint(0, 0.0, 0.1, wrap=True),))
    return EnvironmentSpec(
        name="inverted_pendulum", state_dim=4, action_dim=1,
        dynamics=dynamics, reward=reward, goal=goal,
        action_bounds=np.array([[-50.0, 50.0]]),
        initial_state=np.array([np.pi / 7.0, 2.0, 0.0, 0.0]),
        dt=0.01, horizon_steps=1500,
        goal_center_map=center,
    )


def _three_wheel_robot(printed_rhs: bool = False) -> EnvironmentSpec:
    # Default is the standard unicycle; the benchmark text prints
    # xdot = x cos(th), ydot = y sin(th), which never uses the commanded
    # velocity and leaves the position uncontrollable, so it is kept only
    # behind this flag for fidelity experiments.
    def dynamics(s, a):
        x, y, th = s[..., 0], s[..., 1], s[..., 2]
        v, om = a[..., 0], a[..., 1]
        if printed_rhs:
            return np.stack([x * np.cos(th) + 0.0 * v, y * np.sin(th) + 0.0 * v,
                             om + 0.0 * v], axis=-1)
        return np.stack([v * np.cos(th), v * np.sin(th), om + 0.0 * x], axis=-1)

    def reward(s, a):
        return -(s[..., 0] ** 2) - 10.0 * s[..., 1] ** 2 - s[..., 2] ** 2

    def center(s):
        s = np.asarray(s, dtype=float)
        return np.stack([s[..., 0], s[..., 1], wrap_angle(s[..., 2])], axis=-1)

    goal = GoalBox((
        BoxConstraint(0, 0.0, 1.0),
        BoxConstraint(1, 0.0, 1.0),
        BoxConstraint(2, 0.0, 0.7, wrap=True),
    ))
    return EnvironmentSpec(
        name="3wrobot_kin", state_dim=3, action_dim=2,
        dynamics=dynamics, reward=reward, goal=goal,
        action_bounds=np.array([[-25.0, 25.0], [-5.0, 5.0]]),
        initial_state=np.array([5.0, 5.0, 2.0 * np.pi / 3.0]),
        dt=0.01, horizon_steps=500,
        goal_center_map=center,
    )


def _two_tank(p: TwoTankParams = TwoTankParams()) -> EnvironmentSpec:
    def dynamics(s, a):
        h1, h2 = s[..., 0], s[..., 1]
        dh1 = (p.K1 * a[..., 0] - h1) / p.tau1
        dh2 = (-h2 + p.K2 * h1 + p.K3 * h2**2) / p.tau2 + 0.0 * dh1
        return np.stack([dh1, dh2], axis=-1)

    def reward(s, a):
        return -10.0 * (s[..., 0] - 0.4) ** 2 - 10.0 * (s[..., 1] - 0.4) ** 2

    def center(s):
        s = np.asarray(s, dtype=float)
        return np.stack([s[..., 0] - 0.4, s[..., 1] - 0.4], axis=-1)

    goal = GoalBox((BoxConstraint(0, 0.4, 0.05), BoxConstraint(1, 0.4, 0.05)))
    return EnvironmentSpec(
        name="2tank", state_dim=2, action_dim=1,
        dynamics=dynamics, reward=reward, goal=goal,
        action_bounds=np.array([[0.0, 1.0]]),
        initial_state=np.array([2.0, -2.0]),
        dt=0.1, horizon_steps=800,
        goal_center_map=center,
    )


def _lunar_lander(p: LunarParams = LunarParams()) -> EnvironmentSpec:
    def dynamics(s, a):
        th = s[..., 2]
        Fs, Fv = a[..., 0], a[..., 1]
        sin, cos = np.sin(th), np.cos(th)
        return np.stack(
            [
                s[..., 3] + 0.0 * Fs,
                s[..., 4] + 0.0 * Fs,
                s[..., 5] + 0.0 * Fs,
                (Fs * cos - Fv * sin) / p.m,
                (Fs * sin + Fv * cos) / p.m - p.g,
                Fs / p.J,
            ],
            axis=-1,
        )

    def reward(s, a):
        return (
            -(s[..., 0] ** 2)
            - 0.1 * (s[..., 1] - 1.0) ** 2
            - 10.0 * s[..., 2] ** 2
            - 0.1 * s[..., 3] ** 2
            - 0.1 * s[..., 4] ** 2
            - 0.1 * s[..., 5] ** 2
        )

    def center(s):
        s = np.asarray(s, dtype=float)
        return np.stack(
            [s[..., 0], s[..., 1] - 1.0, wrap_angle(s[..., 2]),
             s[..., 3], s[..., 4], s[..., 5]],
            axis=-1,
        )

    goal = GoalBox((BoxConstraint(1, 1.0, 0.05), BoxConstraint(2, 0.0, 0.05, wrap=True)))
    return EnvironmentSpec(
        name="lunar_lander", state_dim=6, action_dim=2,
        dynamics=dynamics, reward=reward, goal=goal,
        action_bounds=np.array([[-100.0, 100.0], [-50.0, 50.0]]),
        initial_state=np.array([3.0, 5.0, 2.0 * np.pi / 3.0, 0.0, 0.0, 0.0]),
        dt=0.01, horizon_steps=1000,
        goal_center_map=center,
    )


_FACTORIES = {
    "omnibot": _omnibot,
    "pendulum": _pendulum,
    "inverted_pendulum": _inverted_pendulum,
    "3wrobot_kin": _three_wheel_robot,
    "2tank": _two_tank,
    "lunar_lander": _lunar_lander,
}


def make_env(name: str, integrator: str = "rk4", printed_rhs: bool = False) -> EnvironmentSpec:
    """Build the fully populated spec for one of the six benchmark systems.

    ``printed_rhs`` selects the literal three-wheel-robot right-hand side
    (ignored for any other environment).
    """
    if name not in _FACTORIES:
        raise ConfigurationError(
            f"unknown environment '{name}'; choose from {sorted(_FACTORIES)}"
        )
    if name == "3wrobot_kin":
        spec = _FACTORIES[name](printed_rhs=printed_rhs)
    else:
        spec = _FACTORIES[name]()
    if integrator != "rk4":
        from .env_core import replace_spec

        spec = replace_spec(spec, integrator=integrator)
    return spec


def reward(spec: EnvironmentSpec, s, a) -> float:
    """Evaluate the environment reward; always <= 0 for all six systems."""
    return spec.reward(np.asarray(s, dtype=float), np.asarray(a, dtype=float))
