"""Univariate ARIMA(p, d, q): differencing, conditional-sum-of-squares
estimation, and multi-step forecasting.

Estimation is deterministic: a Hannan-Rissanen two-stage least-squares
initializer (long autoregression to proxy the innovations) followed by
Nelder-Mead refinement of the conditional sum of squared residuals.
Pre-sample residuals are fixed at zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.signal import lfilter

from .errors import DegenerateFit, SeedMismatch, SeriesTooShort


@dataclass(frozen=True)
class ArimaOrder:
    p: int
    d: int
    q: int

    def __post_init__(self):
        if min(self.p, self.d, self.q) < 0:
            raise ValueError("orders must be non-negative")


@dataclass
class FitConfig:
    include_intercept: bool = True
    max_iterations: int = 2000
    min_obs_factor: int = 10       # differenced length must be >= factor*(p+q+1)


@dataclass
class ArimaModel:
    order: ArimaOrder
    ar_coeffs: np.ndarray
    ma_coeffs: np.ndarray
    intercept: float
    noise_variance: float
    diff_seeds: list        # first value removed at each differencing level
    level_tails: list       # last value of the series at each level 0..d-1
    obs_tail: np.ndarray    # last p differenced observations (oldest first)
    resid_tail: np.ndarray  # last q residuals (oldest first)
    css: float
    converged: bool = True
    ar_stationary: bool = True


def difference(series, d: int):
    """Apply first differencing d times; returns (differenced, seeds) where
    seeds hold the leading value removed at each level so inversion is exact."""
    x = np.asarray(series, dtype=np.float64)
    if len(x) <= d:
        raise SeriesTooShort(f"series of length {len(x)} cannot be differenced {d} times")
    seeds = []
    for _ in range(d):
        seeds.append(float(x[0]))
        x = np.diff(x)
    return x, seeds


def inverse_difference(differenced, seeds):
    """Exact inverse of :func:`difference`; seeds must come from the matching
    forward call."""
    x = np.asarray(differenced, dtype=np.float64)
    if not isinstance(seeds, (list, tuple)):
        raise SeedMismatch("seeds must be the list produced by difference()")
    for seed in reversed(seeds):
        x = np.concatenate(([seed], seed + np.cumsum(x)))
    return x


def _css_residuals(z: np.ndarray, ar: np.ndarray, ma: np.ndarray, intercept: float) -> np.ndarray:
    """Conditional residuals of the ARMA recursion on z; entries before
    max(p, q) are zero."""
    p, q = len(ar), len(ma)
    n = len(z)
    m = max(p, q)
    w = np.zeros(n)
    if n <= m:
        return w
    a = z[m:] - intercept
    for j in range(p):
        a = a - ar[j] * z[m - 1 - j : n - 1 - j]
    if q:
        # w_t = a_t - sum_k ma[k] * w_{t-k}: IIR filter with zero initial state
        w[m:] = lfilter([1.0], np.concatenate(([1.0], ma)), a)
    else:
        w[m:] = a
    return w


def _css(z: np.ndarray, ar: np.ndarray, ma: np.ndarray, intercept: float) -> float:
    w = _css_residuals(z, ar, ma, intercept)
    m = max(len(ar), len(ma))
    return float(np.dot(w[m:], w[m:]))


def _hannan_rissanen(z: np.ndarray, p: int, q: int, include_intercept: bool):
    """Two-stage least-squares starting values for (ar, ma, intercept)."""
    n = len(z)
    if p + q == 0:
        c = float(z.mean()) if include_intercept else 0.0
        return np.zeros(0), np.zeros(0), c

    # stage 1: long AR to proxy the innovations
    m_long = max(20, 2 * (p + q))
    m_long = min(m_long, n // 2)
    if m_long < 1:
        raise SeriesTooShort("series too short for the long autoregression")
    cols = [np.ones(n - m_long)] + [z[m_long - 1 - j : n - 1 - j] for j in range(m_long)]
    X = np.column_stack(cols)
    y = z[m_long:]
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    w_hat = np.zeros(n)
    w_hat[m_long:] = y - X @ coef

    # stage 2: regress z on its own lags and the proxied innovation lags
    t0 = max(p, q) + m_long
    if t0 >= n - (p + q + 1):
        t0 = max(p, q)
    cols = []
    if include_intercept:
        cols.append(np.ones(n - t0))
    for j in range(p):
        cols.append(z[t0 - 1 - j : n - 1 - j])
    for k in range(q):
        cols.append(w_hat[t0 - 1 - k : n - 1 - k])
    X2 = np.column_stack(cols)
    y2 = z[t0:]
    coef2, _, rank, _ = np.linalg.lstsq(X2, y2, rcond=None)
    if rank < X2.shape[1]:
        raise DegenerateFit("singular least-squares system in the initializer")
    i = 0
    c = 0.0
    if include_intercept:
        c = float(coef2[0])
        i = 1
    ar = np.asarray(coef2[i : i + p], dtype=np.float64)
    ma = np.asarray(coef2[i + p : i + p + q], dtype=np.float64)
    return ar, ma, c


def _check_stationary(ar: np.ndarray) -> bool:
    if len(ar) == 0:
        return True
    roots = np.roots(np.concatenate(([1.0], -ar)))
    return bool(np.all(np.abs(roots) < 1.0))


def fit_arima(series, order: ArimaOrder, config: FitConfig | None = None) -> ArimaModel:
    """Fit ARIMA(p, d, q) by minimizing the conditional sum of squares on the
    d-times-differenced series."""
    config = config or FitConfig()
    p, d, q = order.p, order.d, order.q

    x = np.asarray(series, dtype=np.float64)
    z, seeds = difference(x, d)
    n = len(z)
    if n < config.min_obs_factor * (p + q + 1):
        raise SeriesTooShort(
            f"differenced length {n} below floor {config.min_obs_factor * (p + q + 1)}"
        )

    ar0, ma0, c0 = _hannan_rissanen(z, p, q, config.include_intercept)

    def unpack(theta):
        ar = theta[:p]
        ma = theta[p : p + q]
        c = theta[p + q] if config.include_intercept else 0.0
        return ar, ma, c

    converged = True
    if p + q + int(config.include_intercept) > 0:
        theta0 = np.concatenate([ar0, ma0, [c0] if config.include_intercept else []])

        def objective(theta):
            return _css(z, *unpack(theta))

        if len(theta0):
            with np.errstate(over="ignore", invalid="ignore"):
                res = minimize(
                    objective,
                    theta0,
                    method="Nelder-Mead",
                    options={"maxiter": config.max_iterations,
                             "xatol": 1e-8, "fatol": 1e-10},
                )
            converged = bool(res.success)
            # refinement must never worsen the initializer
            theta = res.x if res.fun <= objective(theta0) else theta0
        else:
            theta = theta0
        ar, ma, c = unpack(theta)
        ar = np.asarray(ar, dtype=np.float64)
        ma = np.asarray(ma, dtype=np.float64)
    else:
        ar, ma, c = np.zeros(0), np.zeros(0), 0.0

    w = _css_residuals(z, ar, ma, c)
    m = max(p, q)
    css = float(np.dot(w[m:], w[m:]))
    dof = max(n - p - q - 1, 1)
    level_tails = []
    lvl = x
    for _ in range(d):
        level_tails.append(float(lvl[-1]))
        lvl = np.diff(lvl)

    return ArimaModel(
        order=order,
        ar_coeffs=ar,
        ma_coeffs=ma,
        intercept=float(c),
        noise_variance=css / dof,
        diff_seeds=seeds,
        level_tails=level_tails,
        obs_tail=z[n - p :].copy() if p else np.zeros(0),
        resid_tail=w[n - q :].copy() if q else np.zeros(0),
        css=css,
        converged=converged,
        ar_stationary=_check_stationary(ar),
    )


def _forecast_differenced(
    ar: np.ndarray, ma: np.ndarray, intercept: float,
    obs_tail: np.ndarray, resid_tail: np.ndarray, horizon: int,
) -> np.ndarray:
    """Iterate the ARMA recursion with future innovations at their zero
    expectation, feeding forecasts back as pseudo-observations."""
    p, q = len(ar), len(ma)
    z_hist = list(obs_tail)
    w_hist = list(resid_tail)
    out = np.empty(horizon)
    for h in range(horizon):
        val = intercept
        for j in range(p):
            val += ar[j] * z_hist[-1 - j]
        for k in range(q):
            if k < len(w_hist):
                val += ma[k] * w_hist[-1 - k]
        out[h] = val
        z_hist.append(val)
        w_hist.append(0.0)
    return out


def arima_forecast(model: ArimaModel, horizon: int) -> np.ndarray:
    """Forecast `horizon` steps ahead in original units."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    f = _forecast_differenced(
        model.ar_coeffs, model.ma_coeffs, model.intercept,
        model.obs_tail, model.resid_tail, horizon,
    )
    for tail in reversed(model.level_tails):
        f = tail + np.cumsum(f)
    return f


def rolling_forecast(model: ArimaModel, series, start: int, horizon: int) -> np.ndarray:
    """Re-anchored multi-step forecasts over a longer series using the fitted
    coefficients: one `horizon`-step forecast per origin i in
    [start, len(series) - horizon], predicting series[i : i + horizon].

    Returns a (num_origins, horizon) matrix in original units.
    """
    x = np.asarray(series, dtype=np.float64)
    p, d, q = model.order.p, model.order.d, model.order.q
    n = len(x)
    if start < max(d + p, d + 1) or start + horizon > n:
        raise ValueError("start must leave room for lags and horizon")

    levels = [x]
    for _ in range(d):
        levels.append(np.diff(levels[-1]))
    z = levels[d]
    w = _css_residuals(z, model.ar_coeffs, model.ma_coeffs, model.intercept)

    num = n - horizon - start + 1
    out = np.empty((num, horizon))
    for r in range(num):
        i = start + r                      # first index being predicted
        zi = i - d                         # differenced values z[:zi] are known
        obs_tail = z[max(zi - p, 0) : zi]
        resid_tail = w[max(zi - q, 0) : zi]
        f = _forecast_differenced(
            model.ar_coeffs, model.ma_coeffs, model.intercept, obs_tail, resid_tail, horizon
        )
        # invert differencing: last known value at level k is levels[k][i-k-1]
        for k in range(d - 1, -1, -1):
            f = levels[k][i - k - 1] + np.cumsum(f)
        out[r] = f
    return out
