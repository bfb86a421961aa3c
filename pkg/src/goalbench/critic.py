"""Critic models, quadratic sandwich bounds, TD loss, and certified updates.

The value critic is a bias-free one-hidden-layer tanh network h_w whose output
is squared and regularized:  V(z) = -(h_w(z)^2 + eps_reg * ||z||^2),  with z
the goal-centered coordinates.  By construction V <= -eps_reg ||z||^2 and
V(0) = 0.  The state-action variant mirrors it with positive sign,
Q(z, a) = h_w([z, a])^2 + eps_reg * ||z||^2.

Certification ("try critic update") performs plain gradient steps on the TD
loss and then merely checks the improvement and sandwich constraints, which is
an explicitly sanctioned realization of the constrained update.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .env_core import ConfigurationError


@dataclass(frozen=True)
class KappaBounds:
    """Quadratic sandwich kappa_low(r) = c_low r^2,  kappa_up(r) = c_up r^2."""

    c_low: float
    c_up: float

    def __post_init__(self):
        if not (0.0 < self.c_low < self.c_up):
            raise ConfigurationError("need 0 < c_low < c_up")

    def low(self, r):
        return self.c_low * np.square(r)

    def up(self, r):
        return self.c_up * np.square(r)


def td_residuals(values: np.ndarray, rewards: np.ndarray, gamma: float,
                 n_td: int) -> np.ndarray:
    """N-step temporal-difference residuals over a trajectory window.

    ``values[t]`` estimates the return from the t-th state; ``rewards[t]`` is
    the reward collected between states t and t+1 (so ``len(rewards) ==
    len(values) - 1``).  Returns one residual per t in [0, T - 1 - n_td].
    """
    values = np.asarray(values, dtype=float)
    rewards = np.asarray(rewards, dtype=float)
    T = len(values)
    if T <= n_td:
        raise ConfigurationError(f"batch of {T} states is too short for N_TD={n_td}")
    if len(rewards) != T - 1:
        raise ConfigurationError("need exactly one reward per transition")
    disc = gamma ** np.arange(n_td)
    n_res = T - n_td
    # windows of n_td consecutive rewards starting at each t
    idx = np.arange(n_res)[:, None] + np.arange(n_td)[None, :]
    reward_sums = (rewards[idx] * disc[None, :]).sum(axis=1)
    return values[:n_res] - reward_sums - gamma**n_td * values[n_td:]


class ValueCritic:
    """Bias-free squared-output network over goal-centered coordinates."""

    sign = -1.0

    def __init__(self, in_dim: int, width: int = 16, eps_reg: float = 1e-3,
                 weight_box: float = 100.0):
        self.in_dim = in_dim
        self.width = width
        self.eps_reg = eps_reg
        self.weight_box = weight_box
        self.n_params = width * in_dim + width

    def unpack(self, w: np.ndarray):
        W1 = w[: self.width * self.in_dim].reshape(self.width, self.in_dim)
        w_out = w[self.width * self.in_dim:]
        return W1, w_out

    def clamp(self, w: np.ndarray) -> np.ndarray:
        return np.clip(w, -self.weight_box, self.weight_box)

    def init_weights(self, rng: np.random.Generator, z0: np.ndarray) -> np.ndarray:
        """Random start rescaled so tanh inputs are O(1) at the initial point."""
        scale = max(1.0, float(np.linalg.norm(z0)))
        W1 = rng.standard_normal((self.width, self.in_dim)) / (
            np.sqrt(self.in_dim) * scale
        )
        w_out = rng.standard_normal(self.width) / np.sqrt(self.width)
        return self.clamp(np.concatenate([W1.ravel(), w_out]))

    def _h(self, w, Z):
        W1, w_out = self.unpack(w)
        return np.tanh(Z @ W1.T) @ w_out

    def value(self, w: np.ndarray, z: np.ndarray):
        """Critic value at goal-centered coordinates; <= 0 always."""
        z = np.asarray(z, dtype=float)
        Z = np.atleast_2d(z)
        h = self._h(w, Z)
        out = self.sign * (h**2 + self.eps_reg * np.sum(Z**2, axis=1))
        return float(out[0]) if z.ndim == 1 else out

    def td_loss_and_grad(self, w, Z, rewards, gamma, n_td):
        """Squared N-step TD loss and its analytic gradient in w."""
        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        W1, w_out = self.unpack(w)
        TH = np.tanh(Z @ W1.T)  # (T, width)
        h = TH @ w_out  # (T,)
        vals = self.sign * (h**2 + self.eps_reg * np.sum(Z**2, axis=1))
        res = td_residuals(vals, rewards, gamma, n_td)
        loss = float(np.sum(res**2))
        # dL/dvals
        T, n_res = len(vals), len(res)
        c = np.zeros(T)
        np.add.at(c, np.arange(n_res), 2.0 * res)
        np.add.at(c, np.arange(n_res) + n_td, -2.0 * gamma**n_td * res)
        # dvals/dw through h only (the eps term is w-free)
        ch = c * (self.sign * 2.0 * h)  # (T,)
        g_out = TH.T @ ch
        A = (ch[:, None] * (1.0 - TH**2)) * w_out[None, :]  # (T, width)
        g_W1 = A.T @ Z
        return loss, np.concatenate([g_W1.ravel(), g_out])

    def td_loss(self, w, Z, rewards, gamma, n_td) -> float:
        return self.td_loss_and_grad(w, Z, rewards, gamma, n_td)[0]


class QCritic(ValueCritic):
    """State-action variant: positive sign, input is [z, a] concatenated."""

    sign = 1.0

    def __init__(self, z_dim: int, action_dim: int, width: int = 16,
                 eps_reg: float = 1e-3, weight_box: float = 100.0):
        super().__init__(z_dim + action_dim, width, eps_reg, weight_box)
        self.z_dim = z_dim
        self.action_dim = action_dim

    def value(self, w, u):
        """Q at pre-concatenated input u = [z, a] (single or batch)."""
        u = np.asarray(u, dtype=float)
        U = np.atleast_2d(u)
        h = self._h(w, U)
        out = self.sign * (h**2 + self.eps_reg * np.sum(U[:, : self.z_dim] ** 2, axis=1))
        return float(out[0]) if u.ndim == 1 else out

    def value_sa(self, w, z, a):
        z = np.asarray(z, dtype=float)
        a = np.asarray(a, dtype=float)
        return self.value(w, np.concatenate([z, a], axis=-1))

    def td_loss_and_grad(self, w, U, rewards, gamma, n_td):
        U = np.atleast_2d(np.asarray(U, dtype=float))
        W1, w_out = self.unpack(w)
        TH = np.tanh(U @ W1.T)
        h = TH @ w_out
        vals = h**2 + self.eps_reg * np.sum(U[:, : self.z_dim] ** 2, axis=1)
        res = td_residuals(-vals, rewards, gamma, n_td)
        loss = float(np.sum(res**2))
        T, n_res = len(vals), len(res)
        c = np.zeros(T)
        np.add.at(c, np.arange(n_res), 2.0 * res)
        np.add.at(c, np.arange(n_res) + n_td, -2.0 * gamma**n_td * res)
        ch = c * (-2.0 * h)  # d(-vals)/dh = -2h
        g_out = TH.T @ ch
        A = (ch[:, None] * (1.0 - TH**2)) * w_out[None, :]
        g_W1 = A.T @ U
        return loss, np.concatenate([g_W1.ravel(), g_out])


def critic_value(model, w, z):
    return model.value(w, z)


def td_loss(model, w, Z, rewards, gamma, n_td):
    return model.td_loss(w, Z, rewards, gamma, n_td)


def sandwich_ok_value(v: float, z_norm: float, bounds: KappaBounds) -> bool:
    """-kappa_up(||z||) <= V <= -kappa_low(||z||)."""
    return (-bounds.up(z_norm) <= v) and (v <= -bounds.low(z_norm))


def sandwich_ok_q(q: float, z_norm: float, bounds: KappaBounds) -> bool:
    """kappa_low(||z||) <= Q <= kappa_up(||z||)."""
    return (bounds.low(z_norm) <= q) and (q <= bounds.up(z_norm))


def rescale_to_sandwich(model, w: np.ndarray, u0: np.ndarray, z0_norm: float,
                        bounds: KappaBounds) -> np.ndarray:
    """Scale the output layer so the sandwich holds at the initial point.

    ``u0`` is the model input there (z, or [z, a] for the Q variant).  Raises
    when no output scaling can satisfy the bounds.
    """
    if z0_norm == 0.0:
        return w  # sandwich reads 0 <= 0 <= 0 and holds for any h(0) = 0 input
    lo = bounds.low(z0_norm)
    up = bounds.up(z0_norm)
    reg = model.eps_reg * z0_norm**2
    # need lo <= h^2 + reg <= up after scaling h by alpha
    if reg > up:
        raise ConfigurationError(
            "sandwich infeasible at the initial state: regularization term "
            f"{reg:.3g} exceeds the upper bound {up:.3g}"
        )
    W1, w_out = model.unpack(w)
    h0 = float(model._h(w, np.atleast_2d(u0))[0])
    # keep the squared-network term a small perturbation of the quadratic
    # regularizer: the level sets of a freshly random h are arbitrary, and a
    # large h^2 share would hand the greedy actor a rutted landscape
    target = min(max(1.1 * reg, lo), up)
    need = target - reg
    if need <= 0.0:
        need = max((lo - reg), 0.0)  # smallest h^2 that still meets the bounds
    if h0 == 0.0:
        if lo <= reg <= up:
            return w
        raise ConfigurationError(
            "sandwich infeasible: zero hidden output at the initial state"
        )
    alpha = np.sqrt(need) / abs(h0) if need > 0 else 0.0
    w2 = np.concatenate([W1.ravel(), model.clamp(alpha * w_out)])
    # clamping may have truncated alpha; verify
    v = abs(model.value(w2, u0))
    if not (lo <= v <= up):
        raise ConfigurationError(
            "sandwich infeasible at the initial state under the weight box"
        )
    return w2


@dataclass
class CriticState:
    """Live and certified weights plus the certification bookkeeping."""

    live_w: np.ndarray
    cert_w: np.ndarray
    cert_value: float  # V(anchor) under cert_w (V-space; -Q for the Q variant)
    anchor_z: np.ndarray
    anchor_action: Optional[np.ndarray]
    nu_bar: float
    bounds: KappaBounds
    buffer: deque = field(default_factory=lambda: deque(maxlen=33))
    lambda0: float = 0.0  # -V(s0) at the epoch start; the budget numerator
    acceptances: int = 0

    def budget(self) -> float:
        return max((self.lambda0 - self.nu_bar) / self.nu_bar, 0.0)


def new_critic_state(model, rng, z0, bounds, t_replay,
                     a0: Optional[np.ndarray] = None,
                     nu_bar: Optional[float] = None,
                     nu_floor: float = 1e-8,
                     horizon: int = 1000,
                     budget_frac: float = 4.0) -> CriticState:
    """Initialize weights satisfying the sandwich at the epoch's first state.

    When ``nu_bar`` is not given it is sized so the certification budget is
    roughly ``horizon / budget_frac`` acceptances: improvements below the
    per-step progress scale are noise, and an epoch whose budget never runs
    out can postpone the fallback past any finite horizon.
    """
    w = model.init_weights(rng, z0)
    u0 = z0 if a0 is None else np.concatenate([z0, a0])
    w = rescale_to_sandwich(model, w, u0, float(np.linalg.norm(z0)), bounds)
    v0 = model.value(w, u0)
    cert_v = v0 if a0 is None else -v0
    if nu_bar is None:
        nu_bar = max(budget_frac * (-cert_v) / horizon, nu_floor)
    if nu_bar <= 0:
        raise ConfigurationError("nu_bar must be positive")
    return CriticState(
        live_w=w.copy(), cert_w=w.copy(), cert_value=cert_v,
        anchor_z=np.asarray(z0, dtype=float).copy(),
        anchor_action=None if a0 is None else np.asarray(a0, dtype=float).copy(),
        nu_bar=nu_bar, bounds=bounds,
        buffer=deque(maxlen=t_replay + 1), lambda0=-cert_v, acceptances=0,
    )


def _gradient_steps(model, state: CriticState, u_t, gamma, n_td, lr, k_steps,
                    grad_clip=1.0):
    """K clamped gradient-descent steps on the TD loss over the ring buffer.

    The window is the buffered (input, reward) transitions of the current
    episode followed by the newly observed input ``u_t``.  When the window is
    still shorter than the TD order the live weights are returned unchanged.
    Gradients are clipped by global norm: raw TD gradients scale with the
    squared reward magnitude, which differs by five orders across the
    benchmark systems.
    """
    buf = state.buffer
    if len(buf) < n_td:
        return state.live_w.copy()
    Z = np.vstack([np.stack([item[0] for item in buf]), np.asarray(u_t, dtype=float)])
    rewards = np.array([item[1] for item in buf])
    w = state.live_w.copy()
    for _ in range(k_steps):
        _, g = model.td_loss_and_grad(w, Z, rewards, gamma, n_td)
        if grad_clip is not None:
            gn = float(np.linalg.norm(g))
            if gn > grad_clip:
                g = g * (grad_clip / gn)
        w = model.clamp(w - lr * g)
    return w


def try_critic_update(state: CriticState, model: ValueCritic, z_t: np.ndarray,
                      gamma: float = 1.0, n_td: int = 1, lr: float = 1e-2,
                      k_steps: int = 1, grad_clip: float = 1.0,
                      learn: bool = True) -> bool:
    """One certification attempt for the state-valued critic.

    Produces a candidate by gradient descent from the live weights, then
    accepts iff the candidate's value at the new state improves on the
    certified anchor value by at least nu_bar and sits inside the sandwich.
    The live weights take the candidate either way; the certified pair is
    touched only on acceptance.
    """
    w_star = _gradient_steps(model, state, z_t, gamma, n_td, lr, k_steps,
                             grad_clip) if learn else state.live_w.copy()
    v_new = model.value(w_star, z_t)
    z_norm = float(np.linalg.norm(z_t))
    accepted = (v_new - state.cert_value >= state.nu_bar) and sandwich_ok_value(
        v_new, z_norm, state.bounds
    )
    state.live_w = w_star
    if accepted:
        state.cert_w = w_star.copy()
        state.cert_value = v_new
        state.anchor_z = np.asarray(z_t, dtype=float).copy()
        state.acceptances += 1
    return accepted


def try_critic_update_q(state: CriticState, model: QCritic, z_t: np.ndarray,
                        a_t: np.ndarray, gamma: float = 1.0, n_td: int = 1,
                        lr: float = 1e-2, k_steps: int = 1,
                        grad_clip: float = 1.0, learn: bool = True) -> bool:
    """Certification attempt for the state-action critic (decrease condition)."""
    u_t = np.concatenate([z_t, a_t])
    w_star = _gradient_steps(model, state, u_t, gamma, n_td, lr, k_steps,
                             grad_clip) if learn else state.live_w.copy()
    q_new = model.value(w_star, u_t)
    q_cert = -state.cert_value
    z_norm = float(np.linalg.norm(z_t))
    accepted = (q_new - q_cert <= -state.nu_bar) and sandwich_ok_q(
        q_new, z_norm, state.bounds
    )
    state.live_w = w_star
    if accepted:
        state.cert_w = w_star.copy()
        state.cert_value = -q_new
        state.anchor_z = np.asarray(z_t, dtype=float).copy()
        state.anchor_action = np.asarray(a_t, dtype=float).copy()
        state.acceptances += 1
    return accepted
