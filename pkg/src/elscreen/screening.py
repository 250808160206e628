"""Local empirical-likelihood screening of individual predictors.

For predictor ``j`` the local statistic at ``x0`` is the EL log ratio of
``v_i = K_h(x_ij - x0) * y_i``; the feature statistic is its maximum over a
set of evaluation points, and features are ranked by that maximum.
"""

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numba
import numpy as np

from .el import NOT_CONVERGED, SolverError, el_core
from .kernel import KernelConfig, _kern, resolve_bandwidth

log = logging.getLogger(__name__)

EVAL_POLICIES = ("observed_points", "uniform_grid")

# Screening bandwidths are cross-validated over 2x-5x the reference-rule
# pilot.  Smaller bandwidths cut each column into many short, nearly
# independent windows, and the maximum over them inflates the statistics of
# inactive features.
SCREENING_CV_SPAN = (2.0, 5.0)
MIN_SUPPORT = 10


def screening_kernel(**kw):
    """Kernel configuration used by the screens unless overridden."""
    kw.setdefault("cv_grid_span", SCREENING_CV_SPAN)
    return KernelConfig(**kw)


@dataclass(frozen=True)
class Selection:
    """``top_d`` keeps the ``value`` largest statistics, ``threshold`` keeps
    every statistic ``>= value``."""

    kind: str = "top_d"
    value: float = 20

    def __post_init__(self):
        if self.kind == "top_d":
            if int(self.value) != self.value or self.value < 1:
                raise ValueError(f"top_d needs an integer d >= 1, got {self.value}")
        elif self.kind == "threshold":
            if not self.value > 0:
                raise ValueError(f"threshold must be > 0, got {self.value}")
        else:
            raise ValueError(f"unknown selection rule {self.kind!r}")


def top_d(d):
    return Selection("top_d", int(d))


def threshold(gamma_n):
    return Selection("threshold", float(gamma_n))


@dataclass(frozen=True)
class ScreeningConfig:
    kernel: KernelConfig = field(default_factory=screening_kernel)
    eval_policy: str = "observed_points"
    grid_size: int = 100
    min_support: int = MIN_SUPPORT
    selection: Selection = field(default_factory=Selection)
    tol: float = 1e-10
    max_iter: int = 100

    def __post_init__(self):
        if self.eval_policy not in EVAL_POLICIES:
            raise ValueError(f"unknown eval_policy {self.eval_policy!r}")
        if self.min_support < 2:
            raise ValueError("min_support must be >= 2")
        if self.grid_size < 1:
            raise ValueError("grid_size must be >= 1")


class FeatureStat(NamedTuple):
    stat: float
    argmax_point: float
    skipped: int
    h: float


@dataclass(frozen=True, eq=False)
class ScreeningReport:
    """Per-feature statistics with ranks (1 = largest) and the selected set.

    ``selected`` lists feature indices (0-based) in rank order.
    """

    stats: np.ndarray
    argmax_point: np.ndarray
    ranks: np.ndarray
    selected: tuple[int, ...]
    bandwidths: np.ndarray
    skipped_points: np.ndarray
    feature_names: tuple[str, ...]
    method: str = "el"
    diagnostics: dict = field(default_factory=dict)

    @property
    def p(self):
        return self.stats.shape[0]

    @property
    def order(self):
        """Feature indices sorted by rank."""
        return np.argsort(self.ranks, kind="stable")

    def selected_mask(self):
        mask = np.zeros(self.p, dtype=bool)
        mask[list(self.selected)] = True
        return mask


def rank_features(stats):
    """Ranks with +inf above every finite value and ties broken by index."""
    stats = np.asarray(stats, dtype=np.float64)
    order = np.lexsort((np.arange(stats.size), -stats))
    ranks = np.empty(stats.size, dtype=np.int64)
    ranks[order] = np.arange(1, stats.size + 1)
    return ranks, order


def apply_selection(stats, order, selection):
    if selection.kind == "top_d":
        return tuple(int(j) for j in order[: int(selection.value)])
    return tuple(int(j) for j in order if stats[j] >= selection.value)


def build_report(stats, argmax_point, bandwidths, skipped, feature_names,
                 selection, method="el", diagnostics=None):
    stats = np.asarray(stats, dtype=np.float64)
    ranks, order = rank_features(stats)
    return ScreeningReport(
        stats=stats,
        argmax_point=np.asarray(argmax_point, dtype=np.float64),
        ranks=ranks,
        selected=apply_selection(stats, order, selection),
        bandwidths=np.asarray(bandwidths, dtype=np.float64),
        skipped_points=np.asarray(skipped, dtype=np.int64),
        feature_names=tuple(feature_names),
        method=method,
        diagnostics=dict(diagnostics or {}),
    )


@numba.njit(cache=True, nogil=True)
def _window(xs, x0, h, compact):
    if not compact:
        return 0, xs.shape[0]
    # nonzero Epanechnikov weight needs |x - x0| < h strictly
    lo = np.searchsorted(xs, x0 - h, side="right")
    hi = np.searchsorted(xs, x0 + h, side="left")
    return lo, hi


@numba.njit(cache=True, nogil=True)
def _scan(xs, vals, points, h, code, compact, min_support, tol, max_iter):
    """Max over ``points`` of the EL log ratio of ``K((xs - x0)/h) * vals``.

    ``xs`` must be sorted.  Returns ``(best, argmax, skipped, status)`` where
    ``status`` is ``NOT_CONVERGED`` if any solve failed.
    """
    best = -1.0
    best_pt = np.nan
    skipped = 0
    buf = np.empty(xs.shape[0])
    for m in range(points.shape[0]):
        x0 = points[m]
        lo, hi = _window(xs, x0, h, compact)
        support = 0
        for k in range(lo, hi):
            w = _kern(code, (xs[k] - x0) / h)
            if w > 0.0:
                support += 1
            buf[k - lo] = w * vals[k]
        if support < min_support:
            skipped += 1
            continue
        if best == np.inf:
            # the max is settled; keep counting skipped points only
            continue
        logratio, lam, status, it = el_core(buf[: hi - lo], tol, max_iter)
        if status == NOT_CONVERGED:
            return np.nan, x0, skipped, NOT_CONVERGED
        if logratio > best:
            best = logratio
            best_pt = x0
    if best < 0.0:
        return 0.0, np.nan, skipped, 0
    return best, best_pt, skipped, 0


def _sorted_pair(x, v):
    # lexsort on (x, v) so the summation order does not depend on row order
    order = np.lexsort((v, x))
    return np.ascontiguousarray(x[order]), np.ascontiguousarray(v[order])


def evaluation_points(xs_sorted, cfg):
    if cfg.eval_policy == "observed_points":
        return xs_sorted
    return np.linspace(xs_sorted[0], xs_sorted[-1], cfg.grid_size)


def scan_local_el(x, v, h, points, kcfg, min_support, tol=1e-10, max_iter=100):
    """Maximize the local EL statistic of ``v`` localized in ``x`` over ``points``.

    Returns ``(stat, argmax_point, skipped)``.  Shared by the plain and the
    varying-coefficient screens.
    """
    xs, vs = _sorted_pair(np.asarray(x, dtype=np.float64), np.asarray(v, dtype=np.float64))
    points = np.ascontiguousarray(points, dtype=np.float64)
    best, pt, skipped, status = _scan(
        xs, vs, points, float(h), kcfg.code, kcfg.compact, int(min_support),
        float(tol), int(max_iter),
    )
    if status == NOT_CONVERGED:
        raise SolverError(f"EL solver failed at evaluation point {pt}", (pt,))
    return float(best), float(pt), int(skipped)


def local_el_stat(xj, y, h, x0, cfg):
    """Local EL statistic at ``x0``; ``None`` when fewer than
    ``cfg.min_support`` observations carry nonzero kernel weight."""
    if not h > 0:
        raise ValueError(f"bandwidth must be > 0, got {h}")
    best, _, skipped = scan_local_el(
        xj, y, h, np.array([x0], dtype=np.float64), cfg.kernel, cfg.min_support,
        cfg.tol, cfg.max_iter,
    )
    if skipped == 1:
        return None
    return best


def feature_stat(xj, y, cfg):
    """Maximum local EL statistic for one predictor.

    A constant column, or one whose every evaluation point is skipped, gets
    statistic 0.
    """
    xj = np.asarray(xj, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = xj.size
    if np.ptp(xj) == 0.0:
        return FeatureStat(0.0, np.nan, n, np.nan)
    h = resolve_bandwidth(xj, y, cfg.kernel)
    points = evaluation_points(np.sort(xj), cfg)
    stat, pt, skipped = scan_local_el(
        xj, y, h, points, cfg.kernel, cfg.min_support, cfg.tol, cfg.max_iter
    )
    return FeatureStat(stat, pt, skipped, h)


def map_features(fn, p, threads=1):
    """Apply ``fn(j)`` for ``j in range(p)``; results come back in index order."""
    if threads is None or threads <= 1 or p == 1:
        return [fn(j) for j in range(p)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(p)))


def collect(results, p):
    """Split ``(FeatureStat | Exception)`` results into report columns."""
    stats = np.zeros(p)
    pts = np.full(p, np.nan)
    hs = np.full(p, np.nan)
    skipped = np.zeros(p, dtype=np.int64)
    diagnostics = {}
    for j, r in enumerate(results):
        if isinstance(r, Exception):
            diagnostics[j] = f"{type(r).__name__}: {r}"
            continue
        stats[j], pts[j], skipped[j], hs[j] = r
    return stats, pts, hs, skipped, diagnostics


def guarded(fn):
    """Wrap a per-feature function so one failure does not abort the screen."""

    def run(j):
        try:
            return fn(j)
        except (SolverError, ValueError, FloatingPointError) as exc:
            log.warning("feature %d failed: %s", j, exc)
            return exc

    return run


def screen(d, cfg=None, threads=1):
    """Rank every predictor of ``d`` by its maximum local EL statistic."""
    cfg = cfg or ScreeningConfig()
    x = np.asarray(d.x)
    y = np.asarray(d.y)
    results = map_features(guarded(lambda j: feature_stat(x[:, j], y, cfg)), d.p, threads)
    stats, pts, hs, skipped, diag = collect(results, d.p)
    return build_report(
        stats, pts, hs, skipped, d.feature_names, cfg.selection, "el", diag
    )


REPORT_COLUMNS = (
    "feature", "stat", "argmax_point", "rank", "selected", "bandwidth", "skipped_points",
)


def _fmt(v):
    v = float(v)
    if np.isposinf(v):
        return "inf"
    return repr(v)


def write_report(report, path, extra_columns=None):
    """Write one CSV row per feature.  ``extra_columns`` maps a column name to
    per-feature values appended after the standard columns."""
    extra_columns = dict(extra_columns or {})
    mask = report.selected_mask()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(REPORT_COLUMNS) + list(extra_columns))
        for j in range(report.p):
            row = [
                report.feature_names[j],
                _fmt(report.stats[j]),
                _fmt(report.argmax_point[j]),
                int(report.ranks[j]),
                int(mask[j]),
                _fmt(report.bandwidths[j]),
                int(report.skipped_points[j]),
            ]
            row += [v[j] if isinstance(v[j], str) else _fmt(v[j]) for v in extra_columns.values()]
            w.writerow(row)


def read_report(path):
    """Parse a report CSV back into a dict of column arrays."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    out = {"feature": [r["feature"] for r in rows]}
    for col in ("stat", "argmax_point", "bandwidth"):
        out[col] = np.array([float(r[col]) for r in rows])
    for col in ("rank", "selected", "skipped_points"):
        out[col] = np.array([int(r[col]) for r in rows])
    return out
