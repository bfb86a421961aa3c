"""Generic MDP-from-ODE machinery: specs, integration, goal geometry, episode loop.

States and actions are plain 1-D float64 numpy arrays.  All dynamics and reward
callables are vectorized over leading axes so that batches of candidate actions
can be integrated in one call.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np


class IntegrationDivergedError(RuntimeError):
    """Raised when a step of numerical integration produces non-finite state."""


class ConfigurationError(ValueError):
    """Raised for invalid environment / agent configuration."""


def wrap_angle(a):
    """Wrap angle(s) to (-pi, pi]."""
    return -((np.pi - np.asarray(a)) % (2.0 * np.pi) - np.pi)


@dataclass(frozen=True)
class BoxConstraint:
    """One goal-box constraint: |c(s) - center| <= halfwidth.

    ``index`` selects the state coordinate; ``wrap`` measures the deviation on
    the circle (used for angle coordinates).
    """

    index: int
    center: float
    halfwidth: float
    wrap: bool = False

    def __post_init__(self):
        if not self.halfwidth > 0:
            raise ConfigurationError("goal halfwidth must be strictly positive")

    def deviation(self, s: np.ndarray) -> np.ndarray:
        d = np.asarray(s)[..., self.index] - self.center
        if self.wrap:
            d = wrap_angle(d)
        return np.abs(d)


@dataclass(frozen=True)
class GoalBox:
    constraints: tuple

    def slacks(self, s: np.ndarray) -> np.ndarray:
        """Per-constraint distance outside the box, zero when satisfied."""
        return np.stack(
            [np.maximum(c.deviation(s) - c.halfwidth, 0.0) for c in self.constraints],
            axis=-1,
        )

    def distance(self, s: np.ndarray) -> float:
        return np.sqrt(np.sum(self.slacks(s) ** 2, axis=-1))

    def contains(self, s: np.ndarray) -> np.ndarray:
        return np.all(self.slacks(s) == 0.0, axis=-1)


@dataclass(frozen=True)
class EnvironmentSpec:
    """Everything needed to simulate one benchmark system."""

    name: str
    state_dim: int
    action_dim: int
    dynamics: Callable  # (state, action) -> state derivative, vectorized
    reward: Callable  # (state, action) -> reward, vectorized
    goal: GoalBox
    action_bounds: np.ndarray  # (action_dim, 2) [min, max]
    initial_state: np.ndarray
    dt: float
    horizon_steps: int
    goal_center_map: Callable  # state -> goal-centered coordinates, vectorized
    integrator: str = "rk4"

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigurationError(f"{self.name}: dt must be positive")
        if not self.horizon_steps > 0:
            raise ConfigurationError(f"{self.name}: horizon must be positive")
        if self.initial_state.shape != (self.state_dim,):
            raise ConfigurationError(f"{self.name}: initial state dimension mismatch")
        if self.integrator not in ("rk4", "euler"):
            raise ConfigurationError(f"{self.name}: unknown integrator {self.integrator}")


def clip_action(spec: EnvironmentSpec, a: np.ndarray) -> np.ndarray:
    """Componentwise clamp into the environment's action box."""
    a = np.asarray(a, dtype=float)
    return np.clip(a, spec.action_bounds[:, 0], spec.action_bounds[:, 1])


def integrate_step(spec, s, a, step: Optional[int] = None):
    """Advance the state by one dt holding the action constant.

    Classical 4th-order Runge-Kutta by default; explicit Euler when the spec
    was built with ``integrator="euler"``.  Deterministic.
    """
    s = np.asarray(s, dtype=float)
    a = np.asarray(a, dtype=float)
    dt, f = spec.dt, spec.dynamics
    if spec.integrator == "euler":
        out = s + dt * f(s, a)
    else:
        k1 = f(s, a)
        k2 = f(s + dt * k1 / 2.0, a)
        k3 = f(s + dt * k2 / 2.0, a)
        k4 = f(s + dt * k3, a)
        out = s + dt * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
    if not np.all(np.isfinite(out)):
        where = "" if step is None else f" at step {step}"
        raise IntegrationDivergedError(
            f"integration diverged in environment '{spec.name}'{where}"
        )
    return out


def goal_distance(spec: EnvironmentSpec, s: np.ndarray) -> float:
    """Euclidean distance to the goal box in the constrained coordinates."""
    return spec.goal.distance(s)


def in_goal(spec: EnvironmentSpec, s: np.ndarray) -> bool:
    return bool(np.all(spec.goal.contains(s)))


def make_rng(seed: int, episode_index: int = 0) -> np.random.Generator:
    """Philox (64-bit counter-based) stream split by seed then episode."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(episode_index),))
    return np.random.Generator(np.random.Philox(ss))


@dataclass
class EpisodeLog:
    """Per-step record of one episode plus identifying header fields."""

    agent: str
    env: str
    seed: int
    episode: int
    dt: float
    states: np.ndarray  # (T, state_dim)
    actions: np.ndarray  # (T, action_dim)
    rewards: np.ndarray  # (T,)
    cum_rewards: np.ndarray  # (T,)
    modes: list  # length T, short strings
    certified_values: np.ndarray  # (T,)
    relax_probs: np.ndarray  # (T,)
    xi: np.ndarray  # (T,) 1 iff mode == "relaxed"
    final_state: np.ndarray = field(default=None)

    @property
    def episode_return(self) -> float:
        return float(self.cum_rewards[-1])

    @property
    def horizon(self) -> int:
        return self.states.shape[0]

    def times(self) -> np.ndarray:
        return np.arange(self.horizon) * self.dt

    def entered_goal(self, spec: EnvironmentSpec) -> bool:
        return bool(np.any(spec.goal.contains(self.states)))

    def first_entry_step(self, spec: EnvironmentSpec):
        hits = np.flatnonzero(spec.goal.contains(self.states))
        return int(hits[0]) if hits.size else None


_DEFAULT_INFO = {"mode": "policy", "certified_value": np.nan, "relax_prob": 0.0, "xi": 0}


def run_episode(spec: EnvironmentSpec, agent, seed: int, episode_index: int = 0,
                agent_name: str = "policy") -> EpisodeLog:
    """Roll out ``spec.horizon_steps`` transitions from the initial state.

    ``agent`` is a step-policy callback ``agent(t, s) -> action`` or
    ``-> (action, info)``; if it has a ``reset`` method it is called first with
    ``(spec, episode_index, rng)`` where the rng is seeded from
    ``(seed, episode_index)``.  Actions are clipped before use.
    """
    if seed < 0:
        raise ConfigurationError("seed must be non-negative")
    rng = make_rng(seed, episode_index)
    if hasattr(agent, "reset"):
        agent.reset(spec, episode_index, rng)

    T, sd, ad = spec.horizon_steps, spec.state_dim, spec.action_dim
    states = np.empty((T, sd))
    actions = np.empty((T, ad))
    rewards = np.empty(T)
    cert = np.empty(T)
    relax = np.empty(T)
    xi = np.zeros(T, dtype=int)
    modes = []

    s = spec.initial_state.astype(float).copy()
    for t in range(T):
        out = agent(t, s)
        if isinstance(out, tuple):
            a, info = out
        else:
            a, info = out, _DEFAULT_INFO
        a = clip_action(spec, a)
        states[t] = s
        actions[t] = a
        rewards[t] = spec.reward(s, a)
        modes.append(info["mode"])
        cert[t] = info["certified_value"]
        relax[t] = info["relax_prob"]
        xi[t] = info["xi"]
        s = integrate_step(spec, s, a, step=t)

    log = EpisodeLog(
        agent=agent_name, env=spec.name, seed=seed, episode=episode_index,
        dt=spec.dt, states=states, actions=actions, rewards=rewards,
        cum_rewards=np.cumsum(rewards), modes=modes, certified_values=cert,
        relax_probs=relax, xi=xi, final_state=s,
    )
    if hasattr(agent, "end_episode"):
        agent.end_episode(log)
    return log


def replace_spec(spec: EnvironmentSpec, **kw) -> EnvironmentSpec:
    """Copy of the spec with selected fields overridden (e.g. shorter horizon)."""
    return dataclasses.replace(spec, **kw)
