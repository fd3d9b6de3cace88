"""Least-squares AR(p) fitting without intercept, with a stationarity projection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .stability import DEFAULT_MARGIN, as_coef, is_stationary, project_into_hull
from .timeseries import GrowthSeries


class RankDeficientError(np.linalg.LinAlgError):
    pass


def _values(series) -> np.ndarray:
    if isinstance(series, GrowthSeries):
        return series.values
    return np.asarray(series, dtype=float)


@dataclass(frozen=True)
class Design:
    """Lagged design matrix.

    Row ``i`` (0-based) is ``(x[p-1+i+s], ..., x[i+s])`` and predicts
    ``Y[i] = x[p+i+s]``, where ``s = first_target - p`` is the number of
    leading targets skipped to align designs of different orders.
    """

    X: np.ndarray
    Y: np.ndarray
    p: int
    n: int
    first_target: int

    @property
    def rows(self) -> int:
        return self.Y.shape[0]


def build_design(series, p: int, first_target: int | None = None) -> Design:
    """Stack lags ``1..p`` of the series against the current value.

    ``first_target`` is the 0-based index of the first target; it defaults to
    ``p`` (every usable row) and must be at least ``p``.
    """
    x = _values(series)
    n = x.shape[0]
    if p < 1:
        raise ValueError(f"order must be >= 1, got {p}")
    if n <= p:
        raise ValueError(f"series of length {n} is too short for order {p}")
    start = p if first_target is None else int(first_target)
    if start < p or start >= n:
        raise ValueError(f"first_target={start} outside [{p}, {n - 1}]")
    rows = n - start
    X = np.empty((rows, p))
    for lag in range(1, p + 1):
        X[:, lag - 1] = x[start - lag : n - lag]
    Y = x[start:].copy()
    return Design(X, Y, p, n, start)


def ols_fit(design: Design, rcond: float = 1e-10) -> np.ndarray:
    """Minimize ``||Y - X phi||^2`` by SVD-based least squares."""
    X, Y = design.X, design.Y
    if X.shape[0] < X.shape[1]:
        raise RankDeficientError(f"{X.shape[0]} rows cannot identify {X.shape[1]} coefficients")
    s = np.linalg.svd(X, compute_uv=False)
    if s[0] == 0 or s[-1] <= rcond * s[0]:
        cond = np.inf if s[-1] == 0 else s[0] / s[-1]
        raise RankDeficientError(f"design is rank deficient (condition estimate {cond:.3g})")
    coef, *_ = np.linalg.lstsq(X, Y, rcond=None)
    return coef


def truncated_loss(residuals, cap: float) -> np.ndarray:
    return np.minimum(np.square(residuals), cap)


@dataclass(frozen=True)
class FittedAR:
    p: int
    coef: np.ndarray
    sigma2: float
    rss: float
    train_error: float
    stationary_before_projection: bool
    ols_coef: np.ndarray
    n_rows: int
    cap: float
    margin: float
    mean: float = 0.0


def fit_stationary(series, p: int, cap: float, margin: float = DEFAULT_MARGIN,
                   first_target: int | None = None, center: bool = False) -> FittedAR:
    """OLS fit, radially shrunk into the stationary region when needed.

    Residual statistics are computed from the (possibly shrunk) coefficients.
    ``train_error`` is the mean squared residual truncated at ``cap``.
    With ``center`` the sample mean is removed first and kept on the fit.
    """
    if cap <= 0:
        raise ValueError("loss cap must be positive")
    x = _values(series)
    mean = float(np.mean(x)) if center else 0.0
    design = build_design(x - mean, p, first_target)
    ols = ols_fit(design)
    was_stationary = is_stationary(ols, margin)
    coef = project_into_hull(ols, margin=margin)
    resid = design.Y - design.X @ coef
    rss = float(resid @ resid)
    rows = design.rows
    return FittedAR(
        p=p,
        coef=coef,
        sigma2=rss / rows,
        rss=rss,
        train_error=float(np.mean(truncated_loss(resid, cap))),
        stationary_before_projection=bool(was_stationary),
        ols_coef=ols,
        n_rows=rows,
        cap=cap,
        margin=margin,
        mean=mean,
    )


def predict(fit, history) -> float:
    """One-step forecast from the last ``p`` values of ``history`` (oldest first)."""
    coef = fit.coef if isinstance(fit, FittedAR) else as_coef(fit)
    mean = fit.mean if isinstance(fit, FittedAR) else 0.0
    h = np.asarray(history, dtype=float)
    p = coef.size
    if h.shape[0] < p:
        raise ValueError(f"history of length {h.shape[0]} is shorter than order {p}")
    lags = h[-1 : -p - 1 : -1] - mean
    return float(lags @ coef + mean)


def one_step_predictions(coef, x, start: int, mean: float = 0.0) -> np.ndarray:
    """Forecasts of ``x[start:]``, each from the ``p`` values before it."""
    d = build_design(np.asarray(x, dtype=float) - mean, as_coef(coef).size, start)
    return d.X @ coef + mean
