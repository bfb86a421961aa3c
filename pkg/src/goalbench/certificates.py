"""Post-hoc certificates: update budget, Hoeffding bounds, q-Pochhammer,
exponential convergence envelopes.

Everything here operates on recorded logs; nothing feeds back into training.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .env_core import ConfigurationError


@dataclass(frozen=True)
class ReachingStats:
    n_runs: int
    n_reached: int
    delta: float  # confidence parameter in (0, 1)

    def __post_init__(self):
        if self.n_runs < 1:
            raise ConfigurationError("need at least one run")
        if not (0 <= self.n_reached <= self.n_runs):
            raise ConfigurationError("reached count out of range")
        if not (0.0 < self.delta < 1.0):
            raise ConfigurationError("delta must lie in (0, 1)")


@dataclass(frozen=True)
class ExpEnvelope:
    """d_t <= C * d_0 * exp(-lam * t) for every sample point, t in steps."""

    C: float
    lam: float
    log_C: float = None  # kept for exact replay checks in log space

    def bound(self, d0: float, t) -> np.ndarray:
        return self.C * d0 * np.exp(-self.lam * np.asarray(t, dtype=float))


def update_budget(lambda_dagger_0: float, nu_bar: float) -> float:
    """Largest possible number of certified critic updates in one epoch."""
    if nu_bar <= 0:
        raise ConfigurationError("nu_bar must be positive")
    return max((lambda_dagger_0 - nu_bar) / nu_bar, 0.0)


def hoeffding_lower_bound(stats: ReachingStats) -> float:
    """One-sided lower confidence bound on the goal-reaching probability."""
    frac = stats.n_reached / stats.n_runs
    bound = frac - math.sqrt(math.log(1.0 / stats.delta) / (2.0 * stats.n_runs))
    return max(0.0, bound)


def q_pochhammer(c: float, q: float) -> float:
    """(c; q)_infinity = prod_{i >= 0} (1 - c q^i) for 0 <= c <= 1, 0 <= q < 1.

    The product is truncated once the running factor exceeds 1 - 1e-16.
    c = 1 is admitted (the product is exactly zero) so that reaching bounds
    with an empty relax-free tail evaluate to zero rather than erroring.
    """
    if not (0.0 <= c <= 1.0) or not (0.0 <= q < 1.0):
        raise ConfigurationError("need 0 <= c <= 1 and 0 <= q < 1")
    prod = 1.0
    i = 0
    while True:
        cqi = c * q**i
        if cqi < 1e-16:
            return prod
        prod *= 1.0 - cqi
        i += 1


def reaching_probability_bound(eta: float, relax_factor: float,
                               t_relax: int) -> float:
    """(1 - eta) * (relax_factor**t_relax ; relax_factor)_infinity."""
    if not (0.0 <= eta <= 1.0):
        raise ConfigurationError("eta must lie in [0, 1]")
    if not (0.0 <= relax_factor < 1.0):
        raise ConfigurationError("relax_factor must lie in [0, 1)")
    if t_relax < 0:
        raise ConfigurationError("t_relax must be non-negative")
    return (1.0 - eta) * q_pochhammer(relax_factor**t_relax, relax_factor)


DEFAULT_LAMBDA_GRID = np.geomspace(1e-4, 1.0, 64)


def fit_exp_envelope(trajectories, c_cap: float = 100.0,
                     lambda_grid: np.ndarray = None) -> ExpEnvelope:
    """Fit the steepest exponential envelope covering every sample point.

    For each grid decay rate the minimal C is the max over points of
    d_t e^{lam t} / d_0 (computed in log space to avoid overflow); the
    selected rate is the largest grid value whose C stays within ``c_cap``,
    falling back to the smallest grid rate when none qualifies.  Trajectories
    with non-positive initial distance are skipped with a warning.
    """
    if lambda_grid is None:
        lambda_grid = DEFAULT_LAMBDA_GRID
    usable = []
    skipped = 0
    for d in trajectories:
        d = np.asarray(d, dtype=float)
        if d.size == 0 or not d[0] > 0.0:
            skipped += 1
            continue
        usable.append(d)
    if skipped:
        warnings.warn(f"skipped {skipped} trajectories with non-positive "
                      "initial distance")
    if not usable:
        raise ConfigurationError("no usable trajectories to fit")

    log_caps = np.full(len(lambda_grid), -np.inf)
    with np.errstate(divide="ignore"):
        for d in usable:
            t = np.arange(len(d), dtype=float)
            logs = np.log(d) - np.log(d[0])  # -inf where d_t == 0, harmless
            log_caps = np.maximum(log_caps,
                                  (logs[None, :] + lambda_grid[:, None] * t).max(axis=1))
    ok = log_caps <= math.log(c_cap)
    idx = int(np.max(np.flatnonzero(ok))) if np.any(ok) else 0
    return ExpEnvelope(C=float(np.exp(log_caps[idx])), lam=float(lambda_grid[idx]),
                       log_C=float(log_caps[idx]))


def envelope_covers(env: ExpEnvelope, trajectories) -> bool:
    """Exact replay of the fit inequality in log space."""
    for d in trajectories:
        d = np.asarray(d, dtype=float)
        if d.size == 0 or not d[0] > 0.0:
            continue
        t = np.arange(len(d), dtype=float)
        with np.errstate(divide="ignore"):
            lhs = np.log(d) - np.log(d[0]) + env.lam * t
        if np.any(lhs > env.log_C):
            return False
    return True
