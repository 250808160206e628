"""Comparator screening statistics: SIRS, DC-SIS and parametric marginal EL."""

import numpy as np

from .el import el_logratio
from .screening import build_report, collect, guarded, map_features

BASELINES = ("sirs", "dcsis", "parametric_el")


def sirs_stat(xj, y):
    """Sure independent ranking screening statistic.

    ``mean_k (mean_i x_ij * 1{y_i < y_k})^2`` with ``x_j`` standardized.
    """
    xj = np.asarray(xj, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    return float(sirs_stats(xj[:, None], y)[0])


def sirs_stats(x, y):
    """Vectorized :func:`sirs_stat` over the columns of ``x``."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = y.size
    sd = x.std(axis=0)
    ok = sd > 0
    xt = np.zeros_like(x)
    xt[:, ok] = (x[:, ok] - x[:, ok].mean(axis=0)) / sd[ok]
    order = np.argsort(y, kind="stable")
    ys = y[order]
    csum = np.vstack([np.zeros(x.shape[1]), np.cumsum(xt[order], axis=0)])
    # rows with y_i < y_k are the first searchsorted(ys, y_k, 'left') sorted rows
    below = np.searchsorted(ys, y, side="left")
    inner = csum[below] / n
    out = np.mean(inner**2, axis=0)
    out[~ok] = 0.0
    return out


def _centered_distances(a):
    d = np.abs(a[:, None] - a[None, :])
    return d - d.mean(axis=0) - d.mean(axis=1)[:, None] + d.mean()


def dcsis_stat(xj, y):
    """Squared sample distance correlation between ``xj`` and ``y``."""
    xj = np.asarray(xj, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if xj.size < 4:
        raise ValueError("distance correlation needs n >= 4")
    A = _centered_distances(xj)
    B = _centered_distances(y)
    dcov = np.mean(A * B)
    dvar = np.mean(A * A) * np.mean(B * B)
    if dvar <= 0.0:
        return 0.0
    return float(min(max(dcov / np.sqrt(dvar), 0.0), 1.0))


def parametric_el_stat(xj, y):
    """Marginal EL log ratio for ``E[x_j * y] = 0``."""
    xj = np.asarray(xj, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    return el_logratio(xj * y).logratio


def baseline_screen(d, method, selection, threads=1):
    """Rank the predictors of ``d`` by one of the baseline statistics."""
    if method not in BASELINES:
        raise ValueError(f"unknown baseline {method!r}")
    p = d.p
    nan = np.full(p, np.nan)
    zeros = np.zeros(p, dtype=np.int64)
    if method == "sirs":
        stats = sirs_stats(d.x, d.y)
        return build_report(stats, nan, nan, zeros, d.feature_names, selection, method)
    if method == "dcsis":
        B = _centered_distances(np.asarray(d.y))
        bb = np.mean(B * B)

        def one(j):
            A = _centered_distances(d.x[:, j])
            aa = np.mean(A * A)
            if aa * bb <= 0.0:
                return (0.0, np.nan, 0, np.nan)
            return (min(max(np.mean(A * B) / np.sqrt(aa * bb), 0.0), 1.0), np.nan, 0, np.nan)
    else:

        def one(j):
            return (parametric_el_stat(d.x[:, j], d.y), np.nan, 0, np.nan)

    results = map_features(guarded(one), p, threads)
    stats, _, _, _, diag = collect(results, p)
    return build_report(stats, nan, nan, zeros, d.feature_names, selection, method, diag)
