"""On-policy baselines: REINFORCE, VPG with GAE, PPO with the clipped objective.

Policies are truncated normals over the action box with a small tanh MLP mean
network.  Backpropagation is hand-coded for these fixed architectures; the
default optimizer is a plain gradient step at the tabulated learning rates
(momentum optional), since vendor-optimizer parity is out of scope.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .critic import td_residuals
from .env_core import ConfigurationError, EnvironmentSpec
from .truncnorm import TruncatedNormal


class MLP:
    """Fully-connected tanh network with linear output and flat weight vector."""

    def __init__(self, in_dim: int, hidden: Tuple[int, ...], out_dim: int):
        self.sizes = (in_dim, *hidden, out_dim)
        self.shapes = []
        for a, b in zip(self.sizes[:-1], self.sizes[1:]):
            self.shapes.append((b, a))  # weight
            self.shapes.append((b,))  # bias
        self.n_params = sum(int(np.prod(s)) for s in self.shapes)

    def init(self, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
        parts = []
        for shape in self.shapes:
            if len(shape) == 2:
                parts.append(rng.standard_normal(shape).ravel()
                             * (scale / np.sqrt(shape[1])))
            else:
                parts.append(np.zeros(shape))
        return np.concatenate(parts)

    def _layers(self, w: np.ndarray):
        out, off = [], 0
        for shape in self.shapes:
            n = int(np.prod(shape))
            out.append(w[off: off + n].reshape(shape))
            off += n
        return [(out[i], out[i + 1]) for i in range(0, len(out), 2)]

    def forward(self, w: np.ndarray, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        A = X
        layers = self._layers(w)
        for W, b in layers[:-1]:
            A = np.tanh(A @ W.T + b)
        W, b = layers[-1]
        return A @ W.T + b

    def forward_cached(self, w, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        layers = self._layers(w)
        acts = [X]
        A = X
        for W, b in layers[:-1]:
            A = np.tanh(A @ W.T + b)
            acts.append(A)
        W, b = layers[-1]
        return A @ W.T + b, acts

    def vjp(self, w: np.ndarray, X: np.ndarray, dY: np.ndarray) -> np.ndarray:
        """Gradient of sum(dY * forward(w, X)) in w, summed over the batch."""
        dY = np.atleast_2d(np.asarray(dY, dtype=float))
        _, acts = self.forward_cached(w, X)
        layers = self._layers(w)
        grads = [None] * len(layers)
        delta = dY
        for i in range(len(layers) - 1, -1, -1):
            W, b = layers[i]
            grads[i] = (delta.T @ acts[i], delta.sum(axis=0))
            if i > 0:
                delta = (delta @ W) * (1.0 - acts[i] ** 2)
        return np.concatenate([np.concatenate([gW.ravel(), gb])
                               for gW, gb in grads])


@dataclass(frozen=True)
class GaeConfig:
    """Discounting / advantage / optimization settings for one baseline run."""

    gamma: float = 0.99
    lam: float = 0.95
    n_td: int = 1
    clip_eps: float = 0.2
    critic_hidden: Tuple[int, ...] = (15, 15)
    critic_lr: float = 0.01
    critic_epochs: int = 30
    policy_hidden: Tuple[int, ...] = (15, 15)
    policy_lr: float = 0.001
    policy_epochs: int = 30
    episodes_per_iter: int = 2
    sigma_scale: float = 0.1  # sigma = sigma_scale * action half-width
    momentum: float = 0.0
    printed_gae_exponent: bool = True

    def __post_init__(self):
        if not (0.0 < self.gamma <= 1.0):
            raise ConfigurationError("gamma must lie in (0, 1]")
        if not (0.0 <= self.lam <= 1.0):
            raise ConfigurationError("lambda must lie in [0, 1]")


# Tabulated per-environment settings of the published runs.  The GAE lambda
# and the PPO clip ratio are not tabulated there; 0.95 / 0.2 are the defaults.
PPO_VPG_TABLE = {
    "pendulum": dict(gamma=0.9964, n_td=1, critic_hidden=(100, 100, 100, 100),
                     critic_lr=0.001, critic_epochs=50, policy_hidden=(4,),
                     policy_lr=0.01, policy_epochs=50, episodes_per_iter=2),
    "2tank": dict(gamma=0.9895, n_td=70, critic_hidden=(100, 50, 10),
                  critic_lr=0.001, critic_epochs=50, policy_hidden=(4,),
                  policy_lr=0.01, policy_epochs=50, episodes_per_iter=2),
    "3wrobot_kin": dict(gamma=0.9964, n_td=1, critic_hidden=(15, 15),
                        critic_lr=0.1, critic_epochs=30, policy_hidden=(15, 15),
                        policy_lr=0.0005, policy_epochs=30, episodes_per_iter=10),
    "inverted_pendulum": dict(gamma=0.9989, n_td=1, critic_hidden=(100, 50),
                              critic_lr=0.01, critic_epochs=50,
                              policy_hidden=(32, 32), policy_lr=0.003,
                              policy_epochs=50, episodes_per_iter=5),
    "lunar_lander": dict(gamma=0.9964, n_td=1, critic_hidden=(15, 15),
                         critic_lr=0.1, critic_epochs=30, policy_hidden=(15, 15),
                         policy_lr=0.0005, policy_epochs=30, episodes_per_iter=10),
    "omnibot": dict(gamma=0.9964, n_td=1, critic_hidden=(100, 50, 10),
                    critic_lr=0.1, critic_epochs=50, policy_hidden=(4,),
                    policy_lr=0.005, policy_epochs=50, episodes_per_iter=2),
}

REINFORCE_TABLE = {
    "pendulum": dict(gamma=1.0, policy_hidden=(4,), policy_lr=0.1,
                     episodes_per_iter=4),
    "2tank": dict(gamma=1.0, policy_hidden=(4, 4), policy_lr=0.1,
                  episodes_per_iter=4),
    "3wrobot_kin": dict(gamma=1.0, policy_hidden=(15, 15), policy_lr=0.01,
                        episodes_per_iter=4),
    "inverted_pendulum": dict(gamma=0.9989, policy_hidden=(32, 32), policy_lr=0.05,
                              episodes_per_iter=3),
    "lunar_lander": dict(gamma=1.0, policy_hidden=(4,), policy_lr=0.1,
                         episodes_per_iter=6),
    "omnibot": dict(gamma=1.0, policy_hidden=(4, 4), policy_lr=0.1,
                    episodes_per_iter=4),
}


def default_gae_config(env_name: str, algo: str, **overrides) -> GaeConfig:
    table = REINFORCE_TABLE if algo == "reinforce" else PPO_VPG_TABLE
    base = dict(table.get(env_name, {}))
    base.update(overrides)
    return GaeConfig(**base)


def discounted_tail_returns(rewards: np.ndarray, gamma: float) -> np.ndarray:
    """G_t = sum_{t' >= t} gamma^{t'} r_{t'} with episode-start exponents."""
    rewards = np.asarray(rewards, dtype=float)
    w = gamma ** np.arange(len(rewards)) * rewards
    return np.cumsum(w[::-1])[::-1]


def gae_advantages(rewards: np.ndarray, values: np.ndarray, gamma: float,
                   lam: float, printed_exponent: bool = True) -> np.ndarray:
    """GAE over one episode with zero bootstrap beyond the horizon.

    The default weights the TD residual at t' by (gamma*lam)**t' exactly as
    published; ``printed_exponent=False`` selects the conventional
    (gamma*lam)**(t' - t) discounting.
    """
    rewards = np.asarray(rewards, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(values) != len(rewards):
        raise ConfigurationError("values and rewards must align per step")
    v_ext = np.append(values, 0.0)
    deltas = rewards + gamma * v_ext[1:] - v_ext[:-1]
    if printed_exponent:
        weighted = (gamma * lam) ** np.arange(len(deltas)) * deltas
        return np.cumsum(weighted[::-1])[::-1]
    adv = np.empty_like(deltas)
    acc = 0.0
    for t in range(len(deltas) - 1, -1, -1):
        acc = deltas[t] + gamma * lam * acc
        adv[t] = acc
    return adv


def make_policy(spec: EnvironmentSpec, hidden: Tuple[int, ...],
                sigma_scale: float) -> Tuple[MLP, TruncatedNormal]:
    lo, hi = spec.action_bounds[:, 0], spec.action_bounds[:, 1]
    sigma = sigma_scale * (hi - lo) / 2.0
    return MLP(spec.state_dim, hidden, spec.action_dim), TruncatedNormal(lo, hi, sigma)


def _policy_score_grad(mlp: MLP, dist: TruncatedNormal, theta, S, A, coeffs):
    """Gradient of sum_t coeffs[t] * log pi_theta(A_t | S_t)."""
    mu = mlp.forward(theta, S)
    dmu = dist.dlogpdf_dmu(A, mu) * np.asarray(coeffs, dtype=float)[:, None]
    return mlp.vjp(theta, S, dmu)


def reinforce_update(mlp: MLP, dist: TruncatedNormal, theta: np.ndarray,
                     episodes: List[Tuple[np.ndarray, np.ndarray, np.ndarray]],
                     baselines: np.ndarray, lr: float, gamma: float):
    """One ascent step of the score-function estimator with per-step baselines.

    Returns the updated weights and the refreshed baselines (batch mean of the
    discounted tail returns).
    """
    M = len(episodes)
    grad = np.zeros_like(theta)
    tails = []
    for S, A, R in episodes:
        G = discounted_tail_returns(R, gamma)
        tails.append(G)
        grad += _policy_score_grad(mlp, dist, theta, S, A, G - baselines)
    new_theta = theta + lr * grad / M
    return new_theta, np.mean(tails, axis=0)


def vpg_update(mlp: MLP, dist: TruncatedNormal, theta: np.ndarray,
               episodes, advantages, lr: float, gamma: float) -> np.ndarray:
    """One ascent step of the gamma^t-weighted GAE policy gradient."""
    M = len(episodes)
    grad = np.zeros_like(theta)
    for (S, A, _), adv in zip(episodes, advantages):
        coeffs = gamma ** np.arange(len(adv)) * adv
        grad += _policy_score_grad(mlp, dist, theta, S, A, coeffs)
    return theta + lr * grad / M


def ppo_losses(mlp: MLP, dist: TruncatedNormal, theta, theta_old, episodes,
               advantages, clip_eps: float, gamma: float) -> float:
    """Evaluate the clipped PPO objective at ``theta`` against ``theta_old``."""
    M = len(episodes)
    total = 0.0
    for (S, A, _), adv in zip(episodes, advantages):
        mu_new = mlp.forward(theta, S)
        mu_old = mlp.forward(theta_old, S)
        lp_new = _logp_rows(dist, A, mu_new)
        lp_old = _logp_rows(dist, A, mu_old)
        ratio = np.exp(lp_new - lp_old)
        clipped = np.clip(ratio, 1.0 - clip_eps, 1.0 + clip_eps)
        total += np.sum(gamma ** np.arange(len(adv))
                        * np.minimum(ratio * adv, clipped * adv))
    return total / M


def _logp_rows(dist: TruncatedNormal, A, mu):
    alpha = (dist.lo - mu) / dist.sigma
    beta = (dist.hi - mu) / dist.sigma
    from .truncnorm import norm_cdf

    Z = norm_cdf(beta) - norm_cdf(alpha)
    zed = (A - mu) / dist.sigma
    comp = (-0.5 * zed**2 - 0.5 * np.log(2.0 * np.pi) - np.log(dist.sigma)
            - np.log(Z))
    return comp.sum(axis=1)


def ppo_update(mlp: MLP, dist: TruncatedNormal, theta, episodes, advantages,
               clip_eps: float, gamma: float, lr: float, epochs: int) -> np.ndarray:
    """Ascent epochs on the clipped surrogate with frozen old log-densities."""
    theta_old = theta.copy()
    lp_old = []
    for (S, A, _) in episodes:
        lp_old.append(_logp_rows(dist, A, mlp.forward(theta_old, S)))
    M = len(episodes)
    for _ in range(epochs):
        grad = np.zeros_like(theta)
        for (S, A, _), adv, lpo in zip(episodes, advantages, lp_old):
            mu = mlp.forward(theta, S)
            lp = _logp_rows(dist, A, mu)
            ratio = np.exp(lp - lpo)
            clipped = np.clip(ratio, 1.0 - clip_eps, 1.0 + clip_eps)
            unclipped_active = ratio * adv <= clipped * adv
            coeff = (gamma ** np.arange(len(adv)) * ratio * adv
                     * unclipped_active)
            dmu = dist.dlogpdf_dmu(A, mu) * coeff[:, None]
            grad += mlp.vjp(theta, S, dmu)
        theta = theta + lr * grad / M
    return theta


def fit_value_mlp(mlp: MLP, w: np.ndarray, episodes, gamma: float, n_td: int,
                  lr: float, epochs: int):
    """Plain gradient descent on the summed N-step TD loss over the batch.

    Returns the fitted weights and the per-epoch loss history.
    """
    history = []
    for _ in range(epochs):
        grad = np.zeros_like(w)
        loss = 0.0
        for S, _, R in episodes:
            V = mlp.forward(w, S).ravel()
            # the last reward leads out of the logged window, so it is unused
            res = td_residuals(V, R[: len(V) - 1], gamma, n_td)
            loss += float(np.sum(res**2))
            c = np.zeros(len(V))
            n_res = len(res)
            np.add.at(c, np.arange(n_res), 2.0 * res)
            np.add.at(c, np.arange(n_res) + n_td, -2.0 * gamma**n_td * res)
            grad += mlp.vjp(w, S, c[:, None])
        history.append(loss)
        w = w - lr * grad
    return w, history


class BaselineAgent:
    """Iteration-batched on-policy learner usable by the episode loop."""

    def __init__(self, spec: EnvironmentSpec, algo: str,
                 config: Optional[GaeConfig] = None):
        if algo not in ("reinforce", "sdpg", "ppo"):
            raise ConfigurationError(f"unknown baseline '{algo}'")
        self.spec = spec
        self.algo = algo
        self.cfg = config if config is not None else default_gae_config(spec.name, algo)
        self.mlp, self.dist = make_policy(spec, self.cfg.policy_hidden,
                                          self.cfg.sigma_scale)
        self.theta: Optional[np.ndarray] = None
        self.value_mlp = MLP(spec.state_dim, self.cfg.critic_hidden, 1)
        self.w_value: Optional[np.ndarray] = None
        self.baselines: Optional[np.ndarray] = None
        self._batch = []
        self._rng = None

    def reset(self, spec, episode_index, rng):
        self._rng = rng
        if self.theta is None:
            self.theta = self.mlp.init(rng, scale=0.1)
            self.w_value = self.value_mlp.init(rng, scale=0.1)
            self.baselines = np.zeros(spec.horizon_steps)

    def __call__(self, t, s):
        mu = self.mlp.forward(self.theta, s)[0]
        a = self.dist.sample(self._rng, mu)
        return a, {"mode": "policy", "certified_value": np.nan,
                   "relax_prob": 0.0, "xi": 0}

    def end_episode(self, log):
        self._batch.append((log.states.copy(), log.actions.copy(),
                            log.rewards.copy()))
        if len(self._batch) < self.cfg.episodes_per_iter:
            return
        episodes, self._batch = self._batch, []
        cfg = self.cfg
        if self.algo == "reinforce":
            self.theta, self.baselines = reinforce_update(
                self.mlp, self.dist, self.theta, episodes, self.baselines,
                cfg.policy_lr, cfg.gamma,
            )
            return
        self.w_value, _ = fit_value_mlp(
            self.value_mlp, self.w_value, episodes, cfg.gamma, cfg.n_td,
            cfg.critic_lr, cfg.critic_epochs,
        )
        advantages = []
        for S, _, R in episodes:
            V = self.value_mlp.forward(self.w_value, S).ravel()
            advantages.append(gae_advantages(R, V, cfg.gamma, cfg.lam,
                                             cfg.printed_gae_exponent))
        if self.algo == "sdpg":
            self.theta = vpg_update(self.mlp, self.dist, self.theta, episodes,
                                    advantages, cfg.policy_lr, cfg.gamma)
        else:
            self.theta = ppo_update(self.mlp, self.dist, self.theta, episodes,
                                    advantages, cfg.clip_eps, cfg.gamma,
                                    cfg.policy_lr, cfg.policy_epochs)
