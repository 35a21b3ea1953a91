"""Fit an ARIMA model to a synthetic process and forecast from it.

We simulate an ARMA(1,1) with known coefficients, difference it once so the
model has some integration work to undo, fit by conditional sum of squares,
and check that the estimates land near the truth. Then we run the rolling
24-step forecast the benchmark harness uses for test scoring.
"""

import numpy as np

from weathertune.arima import (
    ArimaOrder,
    arima_forecast,
    difference,
    fit_arima,
    inverse_difference,
    rolling_forecast,
)

rng = np.random.default_rng(7)

# ARMA(1,1): x_t = 0.5 x_{t-1} + e_t + 0.3 e_{t-1}, then integrate once
n = 3000
e = rng.normal(size=n)
x = np.zeros(n)
for t in range(1, n):
    x[t] = 0.5 * x[t - 1] + e[t] + 0.3 * e[t - 1]
integrated = np.cumsum(x)

print(f"simulated ARMA(1,1) with alpha=0.5, beta=0.3, then cumulative-summed")
print(f"series length {n}\n")

# differencing is exactly invertible because we keep the removed seeds
z, seeds = difference(integrated, 1)
back = inverse_difference(z, seeds)
print(f"differencing round-trip max error: {np.max(np.abs(back - integrated)):.2e}")

model = fit_arima(integrated, ArimaOrder(p=1, d=1, q=1))
print(f"fitted AR coefficient : {model.ar_coeffs[0]:+.3f}  (true +0.500)")
print(f"fitted MA coefficient : {model.ma_coeffs[0]:+.3f}  (true +0.300)")
print(f"innovation variance   : {model.noise_variance:.3f}  (true 1.000)")
print(f"conditional sum of squares: {model.css:.1f}")
print(f"AR part stationary    : {model.ar_stationary}\n")

# forecast the next 24 steps past the end of the series
path = arima_forecast(model, horizon=24)
print("24-step forecast from the series end (first 6 shown):")
print("  " + "  ".join(f"{v:.2f}" for v in path[:6]))

# the harness scores models by re-anchored 24-step forecasts at every origin
holdout_start = n - 200
preds = rolling_forecast(model, integrated, start=holdout_start, horizon=24)
actuals = np.stack([integrated[i : i + 24] for i in range(holdout_start, n - 24 + 1)])
mse = float(np.mean((preds - actuals) ** 2))
print(f"\nrolling 24-step forecasts over the last {preds.shape[0]} origins:")
print(f"  prediction matrix shape {preds.shape}, MSE {mse:.2f}")
