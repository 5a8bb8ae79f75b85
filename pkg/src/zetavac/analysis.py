"""Convergence-series bookkeeping and exponential rate fits."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFit, ZeroReference

__all__ = [
    "ConvergenceSeries",
    "ExponentialFit",
    "WindowedFit",
    "relative_errors",
    "fit_exponential",
    "fit_exponential_window",
]


@dataclass(frozen=True)
class ConvergenceSeries:
    """Sequence of values on increasing resolutions plus a reference value.

    ``abscissa`` is the resolution axis (basis size or qubit count),
    ``values`` the quantity computed at each resolution, ``reference``
    the same quantity at the reference resolution the errors are
    measured against.
    """

    abscissa: np.ndarray
    values: np.ndarray
    reference: float

    def __post_init__(self):
        a = np.asarray(self.abscissa)
        v = np.asarray(self.values, dtype=float)
        if a.shape != v.shape or a.ndim != 1:
            raise ValueError(f"abscissa {a.shape} and values {v.shape} must be equal-length 1-d")
        if a.size and np.any(np.diff(a) <= 0):
            raise ValueError("abscissa must be strictly increasing")
        object.__setattr__(self, "abscissa", a)
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class ExponentialFit:
    """Least-squares fit of errors to a*exp(-b*x) in log space."""

    amplitude: float
    rate: float
    r_squared: float


def relative_errors(series: ConvergenceSeries) -> np.ndarray:
    """|value - reference| / |reference| for each resolution."""
    if series.reference == 0.0:
        raise ZeroReference("reference value is zero; relative error undefined")
    return np.abs(series.values - series.reference) / abs(series.reference)


@dataclass(frozen=True)
class WindowedFit:
    """Exponential fit restricted to the detected exponential regime.

    ``start``/``stop`` index the input arrays (half-open) and
    ``achieved_residual`` is the largest absolute log-space residual
    inside the window.
    """

    fit: ExponentialFit
    start: int
    stop: int
    achieved_residual: float


def fit_exponential(abscissa, errors) -> ExponentialFit:
    """Fit errors ~ a*exp(-b*x) by ordinary least squares on log(errors).

    Zero errors are clipped to 1e-300 before the log.  Fewer than three
    positive-error points, or an all-equal error vector, cannot pin the
    two parameters and raise DegenerateFit.
    """
    x = np.asarray(abscissa, dtype=float)
    e = np.asarray(errors, dtype=float)
    if x.shape != e.shape or x.ndim != 1:
        raise ValueError(f"abscissa {x.shape} and errors {e.shape} must be equal-length 1-d")
    if np.count_nonzero(e > 0.0) < 3:
        raise DegenerateFit(f"need at least 3 positive errors, got {np.count_nonzero(e > 0.0)}")
    y = np.log(np.clip(e, 1e-300, None))
    if np.allclose(y, y[0]):
        raise DegenerateFit("errors are constant; rate is undetermined")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / ss_tot
    return ExponentialFit(amplitude=float(np.exp(intercept)), rate=float(-slope), r_squared=float(r2))


def fit_exponential_window(
    abscissa, errors, min_points: int = 5, max_log_residual: float = 0.15
) -> WindowedFit:
    """Rate of the longest stretch of the series that is actually exponential.

    Convergence series measured against a finite reference typically show
    a faster pre-asymptotic transient at small resolutions and bend again
    near the end, where the distance to the reference value eats into the
    measured error; a straight log-linear fit over all points then reports
    a rate biased by both ends.  This fit scans every contiguous window of
    at least ``min_points`` points, keeps those whose log-errors a
    decaying line explains to within ``max_log_residual`` at every point,
    and fits on the longest such window, preferring the right-most (the
    asymptotic regime) and then the smallest residual on ties.  If no
    window qualifies, the tolerance is doubled until one does, so a fit is
    always returned.  Series shorter than ``min_points`` fall back to the
    plain full-range fit.
    """
    x = np.asarray(abscissa, dtype=float)
    e = np.asarray(errors, dtype=float)
    if x.shape != e.shape or x.ndim != 1:
        raise ValueError(f"abscissa {x.shape} and errors {e.shape} must be equal-length 1-d")
    if min_points < 3:
        raise ValueError(f"min_points must be at least 3, got {min_points}")
    if x.size < min_points:
        fit = fit_exponential(x, e)
        y = np.log(np.clip(e, 1e-300, None))
        resid = np.abs(y - (np.log(fit.amplitude) - fit.rate * x)).max()
        return WindowedFit(fit, 0, int(x.size), float(resid))
    y = np.log(np.clip(e, 1e-300, None))
    candidates = []
    for i in range(x.size - min_points + 1):
        for j in range(i + min_points, x.size + 1):
            if np.any(e[i:j] <= 0.0):
                continue
            slope, intercept = np.polyfit(x[i:j], y[i:j], 1)
            if slope >= 0.0:  # not a decaying stretch
                continue
            resid = float(np.abs(y[i:j] - (slope * x[i:j] + intercept)).max())
            candidates.append((j - i, j, -resid, i))
    if not candidates:
        raise DegenerateFit("no decaying window of the requested length")
    tol = max_log_residual
    while True:
        windows = [c for c in candidates if -c[2] <= tol]
        if windows:
            break
        tol *= 2.0
    _, j, neg_resid, i = max(windows)
    return WindowedFit(fit_exponential(x[i:j], e[i:j]), i, j, -neg_resid)
