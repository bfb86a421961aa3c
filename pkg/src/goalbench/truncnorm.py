"""Self-contained truncated-normal sampling and densities.

The standard normal CDF is evaluated through a Taylor series for small
arguments and a Lentz continued fraction for the tail; the quantile uses the
Acklam rational approximation refined by one Halley step.  Absolute error of
both is far below the 1e-7 contract, verified in the tests against an
independent reference.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_SQRT2 = np.sqrt(2.0)
_INV_SQRT_PI = 1.0 / np.sqrt(np.pi)
_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


def _erf_series(x):
    """erf by Maclaurin series; accurate and fast for |x| <= 1.5."""
    x = np.asarray(x, dtype=float)
    term = x.copy()
    acc = x.copy()
    x2 = x * x
    for n in range(1, 40):
        term = term * (-x2) / n
        acc = acc + term / (2 * n + 1)
    return 2.0 * _INV_SQRT_PI * acc


def _erfc_cf(x, depth: int = 80):
    """erfc via the Laplace continued fraction, for x >= 1.5.

    erfc(x) = (1/sqrt(pi)) e^{-x^2} / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))),
    evaluated bottom-up at fixed depth.
    """
    x = np.asarray(x, dtype=float)
    f = np.zeros_like(x)
    for k in range(depth, 0, -1):
        f = (k / 2.0) / (x + f)
    return _INV_SQRT_PI * np.exp(-x * x) / (x + f)


def erf(x):
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    ax = np.abs(xa)
    out = np.empty_like(ax)
    small = ax <= 1.5
    if np.any(small):
        out[small] = _erf_series(ax[small])
    if np.any(~small):
        out[~small] = 1.0 - _erfc_cf(ax[~small])
    out = np.where(xa < 0, -out, out)
    return float(out[0]) if np.asarray(x).ndim == 0 else out


def norm_cdf(x):
    """Standard normal CDF Phi(x)."""
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    ax = np.abs(xa) / _SQRT2
    tail = np.empty_like(ax)  # Phi(-|x|)
    small = ax <= 1.5
    if np.any(small):
        tail[small] = 0.5 * (1.0 - _erf_series(ax[small]))
    if np.any(~small):
        tail[~small] = 0.5 * _erfc_cf(ax[~small])
    out = np.where(xa < 0, tail, 1.0 - tail)
    return float(out[0]) if np.asarray(x).ndim == 0 else out


def norm_pdf(x):
    x = np.asarray(x, dtype=float)
    return _INV_SQRT_2PI * np.exp(-0.5 * x * x)


# Acklam's rational approximation to the normal quantile.
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)
_P_LOW = 0.02425


def _ppf_raw(p):
    p = np.asarray(p, dtype=float)
    x = np.empty_like(p)
    lo = p < _P_LOW
    hi = p > 1.0 - _P_LOW
    mid = ~(lo | hi)
    if np.any(mid):
        q = p[mid] - 0.5
        r = q * q
        num = ((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]
        den = ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
        x[mid] = num * q / den
    for mask, sign in ((lo, 1.0), (hi, -1.0)):
        if np.any(mask):
            pp = p[mask] if sign > 0 else 1.0 - p[mask]
            q = np.sqrt(-2.0 * np.log(pp))
            num = ((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]
            den = (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
            x[mask] = sign * num / den
    return x


def norm_ppf(p):
    """Normal quantile; Acklam polynomial plus one Halley refinement."""
    p = np.asarray(p, dtype=float)
    scalar = p.ndim == 0
    p = np.atleast_1d(p)
    x = _ppf_raw(p)
    # Halley's method on f(x) = Phi(x) - p
    e = norm_cdf(x) - p
    u = e * np.sqrt(2.0 * np.pi) * np.exp(0.5 * x * x)
    x = x - u / (1.0 + 0.5 * x * u)
    return float(x[0]) if scalar else x


@dataclass(frozen=True)
class TruncatedNormal:
    """Normal(mu, sigma^2) truncated to [lo, hi], componentwise."""

    lo: np.ndarray
    hi: np.ndarray
    sigma: np.ndarray

    def _z(self, mu):
        alpha = (self.lo - mu) / self.sigma
        beta = (self.hi - mu) / self.sigma
        return alpha, beta, norm_cdf(alpha), norm_cdf(beta)

    def sample(self, rng: np.random.Generator, mu: np.ndarray) -> np.ndarray:
        """Inverse-CDF sampling; always lands inside [lo, hi]."""
        mu = np.asarray(mu, dtype=float)
        alpha, beta, ca, cb = self._z(mu)
        u = rng.uniform(size=mu.shape)
        p = np.clip(ca + u * (cb - ca), 1e-300, 1.0 - 1e-16)
        x = mu + self.sigma * norm_ppf(p)
        return np.clip(x, self.lo, self.hi)  # guards fp rounding at the box edge

    def log_pdf(self, x: np.ndarray, mu: np.ndarray) -> float:
        """Joint log-density over components; finite for in-box x."""
        mu = np.asarray(mu, dtype=float)
        x = np.asarray(x, dtype=float)
        alpha, beta, ca, cb = self._z(mu)
        zed = (x - mu) / self.sigma
        comp = (-0.5 * zed**2 - 0.5 * np.log(2.0 * np.pi) - np.log(self.sigma)
                - np.log(cb - ca))
        return float(np.sum(comp, axis=-1))

    def dlogpdf_dmu(self, x: np.ndarray, mu: np.ndarray) -> np.ndarray:
        """Gradient of log_pdf in the mean, componentwise."""
        mu = np.asarray(mu, dtype=float)
        x = np.asarray(x, dtype=float)
        alpha, beta, ca, cb = self._z(mu)
        return (x - mu) / self.sigma**2 - (norm_pdf(alpha) - norm_pdf(beta)) / (
            self.sigma * (cb - ca)
        )

    def mean(self, mu: np.ndarray) -> np.ndarray:
        """Analytic mean of the truncated distribution."""
        mu = np.asarray(mu, dtype=float)
        alpha, beta, ca, cb = self._z(mu)
        return mu + self.sigma * (norm_pdf(alpha) - norm_pdf(beta)) / (cb - ca)
