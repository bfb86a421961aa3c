"""Closed-form goal-reaching controllers for the six benchmark systems.

These are the fallback policies of the certified agent and the performance
reference for every learning curve.  Conventions: sign(0) := 0 everywhere
(avoids chattering at exact zeros), angular errors are wrapped to (-pi, pi]
before use, outputs are clipped to the action box by the episode loop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .env_core import ConfigurationError, EnvironmentSpec, wrap_angle
from .environments import LunarParams, PendulumParams, TwoTankParams


def _sgn(x: float) -> float:
    return float(np.sign(x))


def _omnibot_pi0(s: np.ndarray) -> np.ndarray:
    return np.array([-0.5 * s[0], -0.5 * s[1]])


def _pendulum_pi0(s: np.ndarray, p: PendulumParams = PendulumParams()) -> np.ndarray:
    th, om = float(s[0]), float(s[1])
    if math.cos(th) <= math.cos(math.pi / 10.0) or abs(om) > 0.2:
        # energy-shaping branch: torque of fixed magnitude 0.03
        pivot = (
            p.m * p.g * p.l * om / 2.0 * (math.cos(th) - 1.0)
            + p.m * p.l**2 * om**3 / 6.0
        )
        u = 0.03 * _sgn(pivot)
    else:
        u = 0.6 * math.sin(th) + 0.2 * om
    return np.array([u])


def _inverted_pendulum_pi0(s: np.ndarray) -> np.ndarray:
    th, om = float(s[0]), float(s[2])
    a_upright = 70.0 * th + 20.0 * om
    if math.cos(th) < 0.0:
        a_upswing = 3.0 * _sgn(om)
    else:
        a_upswing = 3.0 * _sgn(math.sin(th))
    lam = (1.0 - math.tanh((th - 0.35) / 10.0)) / 2.0
    return np.array([(1.0 - lam) * a_upswing + lam * a_upright])


def _three_wheel_robot_pi0(s: np.ndarray) -> np.ndarray:
    x, y, th = float(s[0]), float(s[1]), float(s[2])
    # atan2(0, 0) is 0 in numpy/C, matching the convention used here
    err = wrap_angle(th - math.atan2(y, x))
    away = abs(x) >= 0.001 or abs(y) >= 0.001
    if away and abs(err) >= 0.001:
        return np.array([0.0, -3.0 * _sgn(err) * math.sqrt(abs(err))])
    if away:
        return np.array([-3.0 * (x * x + y * y) ** 0.25, 0.0])
    if abs(th) >= 0.001:
        return np.array([0.0, -3.0 * _sgn(th) * math.sqrt(abs(th))])
    return np.array([0.0, 0.0])


def _two_tank_pi0(s: np.ndarray, p: TwoTankParams = TwoTankParams()) -> np.ndarray:
    h1, h2 = float(s[0]), float(s[1])
    num = (
        -6.5 * (h1 - 0.4)
        + 2.0 * h1 / p.tau1
        - 6.5 * (h2 - 0.4)
        - 2.0 * (-h1 + p.K2 * h1 + p.K3 * h2**2)
    )
    return np.array([num / (1.0 + 2.0 * p.K1 / p.tau1)])


def _lunar_lander_pi0(s: np.ndarray, printed: bool = False,
                      p: LunarParams = LunarParams()) -> np.ndarray:
    th, om = float(s[2]), float(s[5])
    u = -80.0 * th - 20.0 * om
    if printed:
        # Literal published form: lateral position feedback and zero vertical
        # thrust.  With the vertical engine off the craft can only fall, the
        # goal band at unit altitude is a one-shot flyby, and the position
        # feedback routed through the torquing thruster stalls the tilt near
        # 0.8 rad before the crossing, so the craft never meets the goal.
        # Kept behind this flag for fidelity runs.
        x, vx = float(s[0]), float(s[3])
        u -= math.cos(th) ** 2 * (-10.0 * x - 40.0 * vx)
        return np.array([u, 0.0])
    # Default: same attitude law plus an altitude-hold vertical channel
    # (hover thrust with critically damped altitude feedback), which makes
    # the goal band an attractor reachable from any state.
    y, vy = float(s[1]), float(s[4])
    f_vert = p.m * p.g - 10.0 * (y - 1.0) - 20.0 * vy
    return np.array([u, f_vert])


_PI0 = {
    "omnibot": _omnibot_pi0,
    "pendulum": _pendulum_pi0,
    "inverted_pendulum": _inverted_pendulum_pi0,
    "3wrobot_kin": _three_wheel_robot_pi0,
    "2tank": _two_tank_pi0,
    "lunar_lander": _lunar_lander_pi0,
}


@dataclass(frozen=True)
class NominalPolicy:
    env_name: str
    act: Callable


def make_nominal(env_name: str, lunar_printed: bool = False) -> NominalPolicy:
    if env_name not in _PI0:
        raise ConfigurationError(f"no nominal policy for environment '{env_name}'")
    if env_name == "lunar_lander":
        fn = lambda s: _lunar_lander_pi0(s, printed=lunar_printed)
    else:
        fn = _PI0[env_name]
    return NominalPolicy(env_name=env_name, act=fn)


_BOUNDS_CACHE = {}


def _action_bounds(env_name: str) -> np.ndarray:
    if env_name not in _BOUNDS_CACHE:
        from .environments import make_env

        _BOUNDS_CACHE[env_name] = make_env(env_name).action_bounds
    return _BOUNDS_CACHE[env_name]


def nominal_action(env_name: str, s: np.ndarray) -> np.ndarray:
    """Exact formula evaluation followed by the action-box clamp."""
    raw = make_nominal(env_name).act(np.asarray(s, dtype=float))
    bounds = _action_bounds(env_name)
    return np.clip(raw, bounds[:, 0], bounds[:, 1])


class NominalAgent:
    """Step-policy wrapper usable directly by the episode loop."""

    def __init__(self, spec: EnvironmentSpec, lunar_printed: bool = False):
        self.spec = spec
        self.policy = make_nominal(spec.name, lunar_printed=lunar_printed)

    def reset(self, spec, episode_index, rng):
        pass

    def __call__(self, t, s):
        a = self.policy.act(s)
        return a, {"mode": "nominal", "certified_value": np.nan,
                   "relax_prob": 0.0, "xi": 0}
