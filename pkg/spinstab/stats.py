# (C) Copyright 2024- spinstab developers.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.

import math

import numpy as np
from scipy import stats as _stats

from .errors import SamplingError

__all__ = [
    "batch_means",
    "autocorrelation",
    "integrated_autocorrelation_time",
    "delta_method",
    "fit_power_law",
    "fit_through_origin",
    "fit_linear",
]


def batch_means(series, n_batches=16):
    """
    Mean and batch-means standard error of a correlated time series.

    Trailing samples that do not fill a batch are dropped from the error
    estimate but kept in the mean.
    """
    x = np.asarray(series, dtype=np.float64)
    if x.size < n_batches:
        raise SamplingError(
            "%d samples are not enough for %d batches" % (x.size, n_batches)
        )
    size = x.size // n_batches
    batches = x[: size * n_batches].reshape(n_batches, size).mean(axis=1)
    mean = float(np.mean(x))
    if np.all(batches == batches[0]):
        return mean, 0.0
    return mean, float(np.std(batches, ddof=1) / math.sqrt(n_batches))


def autocorrelation(series):
    """
    Normalized autocorrelation function via FFT.
    """
    x = np.asarray(series, dtype=np.float64)
    x = x - x.mean()
    n = x.size
    f = np.fft.rfft(x, n=2 * n)
    acov = np.fft.irfft(f * np.conj(f))[:n] / n
    if acov[0] == 0:
        out = np.zeros(n)
        out[0] = 1.0
        return out
    return acov / acov[0]


def integrated_autocorrelation_time(series, window_factor=5.0):
    """
    tau_int = 1 + 2 sum_t rho(t) with Sokal's self-consistent window, so
    that uncorrelated data give tau_int close to 1.
    """
    rho = autocorrelation(series)
    tau = 1.0
    for w in range(1, rho.size):
        tau += 2.0 * rho[w]
        if w >= window_factor * tau:
            break
    return max(tau, 1.0 / rho.size)


def delta_method(fn, samples, step=1e-6):
    """
    Value and standard error of ``fn(mean of samples)``.

    ``samples`` has one row per independent realization. The gradient of
    ``fn`` is taken by central differences at the sample mean and each row is
    mapped to its linear influence, which gives the paired-difference error
    when several quantities come from the same realizations.
    """
    x = np.atleast_2d(np.asarray(samples, dtype=np.float64))
    n, k = x.shape
    mu = np.array([math.fsum(col) for col in x.T]) / n
    value = float(fn(mu))
    if n < 2:
        return value, 0.0
    grad = np.empty(k)
    for i in range(k):
        h = step * max(1.0, abs(mu[i]))
        up = mu.copy()
        down = mu.copy()
        up[i] += h
        down[i] -= h
        grad[i] = (fn(up) - fn(down)) / (2.0 * h)
    influence = (x - mu) @ grad
    if np.all(influence == 0.0):
        return value, 0.0
    return value, float(np.std(influence, ddof=1) / math.sqrt(n))


def fit_power_law(x, y):
    """
    Fit |y| = A x^(-exponent) on a log-log scale. Returns None when some
    value vanishes.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.abs(np.asarray(y, dtype=np.float64))
    if np.any(y <= 0.0) or x.size < 2:
        return None
    res = _stats.linregress(np.log(x), np.log(y))
    return {
        "exponent": float(-res.slope),
        "prefactor": float(math.exp(res.intercept)),
        "r_value": float(res.rvalue),
        "exponent_stderr": float(res.stderr),
    }


def fit_through_origin(x, y):
    """
    Least-squares slope of y = c x.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    slope = float(np.dot(x, y) / np.dot(x, x))
    residual = float(np.sqrt(np.mean((y - slope * x) ** 2)))
    return {"slope": slope, "intercept": 0.0, "residual": residual}


def fit_linear(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    res = _stats.linregress(x, y)
    residual = float(np.sqrt(np.mean((y - res.intercept - res.slope * x) ** 2)))
    return {
        "slope": float(res.slope),
        "intercept": float(res.intercept),
        "residual": residual,
    }
