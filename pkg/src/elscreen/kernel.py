"""Second-order kernels, Nadaraya-Watson smoothing and bandwidth selection."""

from dataclasses import dataclass

import numba
import numpy as np

FAMILIES = ("epanechnikov", "gaussian")
POLICIES = ("loo_cv", "reference_rule")

_EPAN = 0
_GAUSS = 1
_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


class InvalidBandwidthError(ValueError):
    pass


class DegenerateColumnError(ValueError):
    """Raised when a bandwidth is requested for a constant column."""


@dataclass(frozen=True)
class KernelConfig:
    """Kernel family and bandwidth policy.

    ``bandwidth`` set to a positive number overrides ``policy``.  The CV grid
    has ``cv_grid_size`` log-spaced points spanning ``cv_grid_span`` times the
    reference-rule pilot bandwidth.
    """

    family: str = "epanechnikov"
    bandwidth: float | None = None
    policy: str = "loo_cv"
    cv_grid_size: int = 20
    cv_grid_span: tuple[float, float] = (0.2, 5.0)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}")
        if self.policy not in POLICIES:
            raise ValueError(f"unknown bandwidth policy {self.policy!r}")
        if self.bandwidth is not None and not self.bandwidth > 0:
            raise InvalidBandwidthError(f"bandwidth must be > 0, got {self.bandwidth}")
        if self.cv_grid_size < 1:
            raise ValueError("cv_grid_size must be >= 1")
        lo, hi = self.cv_grid_span
        if not (0 < lo <= hi):
            raise ValueError(f"bad cv_grid_span {self.cv_grid_span}")

    @property
    def code(self):
        return _EPAN if self.family == "epanechnikov" else _GAUSS

    @property
    def compact(self):
        return self.family == "epanechnikov"

    def describe(self):
        if self.bandwidth is not None:
            return f"{self.family}, h={self.bandwidth:g}"
        return f"{self.family}, {self.policy}"


def kernel_eval(cfg, u):
    """Evaluate the kernel at ``u`` (scalar or array)."""
    u = np.asarray(u, dtype=np.float64)
    if cfg.family == "epanechnikov":
        out = np.where(np.abs(u) <= 1.0, 0.75 * (1.0 - u * u), 0.0)
    else:
        out = _INV_SQRT_2PI * np.exp(-0.5 * u * u)
    return out if out.ndim else float(out)


@numba.njit(cache=True, nogil=True, inline="always")
def _kern(code, u):
    if code == _EPAN:
        if u <= -1.0 or u >= 1.0:
            # u == +-1 gives weight 0 either way
            return 0.0
        return 0.75 * (1.0 - u * u)
    return _INV_SQRT_2PI * np.exp(-0.5 * u * u)


def nw_estimate(xcol, y, h, x0, cfg):
    """Nadaraya-Watson estimate of ``E[y | x = x0]``.

    Returns ``None`` when every kernel weight at ``x0`` vanishes, which can
    only happen for the compact Epanechnikov kernel.  The common factor
    ``1/h`` cancels and is not applied.
    """
    if not h > 0:
        raise InvalidBandwidthError(f"bandwidth must be > 0, got {h}")
    xcol = np.asarray(xcol, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if xcol.shape != y.shape:
        raise ValueError("xcol and y lengths differ")
    u = (xcol - x0) / h
    if cfg.compact:
        w = kernel_eval(cfg, u)
    else:
        # shift the exponent so the nearest point has weight 1; the ratio is
        # unchanged and far-away x0 no longer underflows to 0/0
        w = np.exp(-0.5 * (u * u - np.min(u * u)))
    den = w.sum()
    if den <= 0.0:
        return None
    return float(np.dot(w, y) / den)


@numba.njit(cache=True, nogil=True)
def nw_fitted(xs, ys, h, code, fallback):
    """In-sample NW fit at every ``xs[i]``; ``fallback`` where the window is empty."""
    n = xs.shape[0]
    out = np.empty(n)
    for i in range(n):
        num = 0.0
        den = 0.0
        for k in range(n):
            w = _kern(code, (xs[k] - xs[i]) / h)
            num += w * ys[k]
            den += w
        out[i] = num / den if den > 0.0 else fallback
    return out


def reference_rule_bandwidth(xcol):
    """Normal-reference plug-in ``1.06 * min(sd, IQR/1.34) * n^(-1/5)``."""
    xcol = np.asarray(xcol, dtype=np.float64)
    n = xcol.size
    if n < 2:
        raise DegenerateColumnError("need at least two observations")
    sd = xcol.std(ddof=1)
    q75, q25 = np.percentile(xcol, [75, 25])
    spread = min(sd, (q75 - q25) / 1.34)
    if not spread > 0:
        # IQR can vanish on heavily tied columns while sd does not
        spread = sd
    if not spread > 0:
        raise DegenerateColumnError("column is constant")
    return 1.06 * spread * n ** (-0.2)


def bandwidth_grid(xcol, cfg):
    pilot = reference_rule_bandwidth(xcol)
    lo, hi = cfg.cv_grid_span
    return np.geomspace(lo * pilot, hi * pilot, cfg.cv_grid_size)


@numba.njit(cache=True, nogil=True)
def _loo_cv_errors(xs, ys, grid, code):
    # xs sorted ascending; returns squared LOO errors, one row per bandwidth
    n = xs.shape[0]
    errors = np.zeros((grid.shape[0], n))
    for g in range(grid.shape[0]):
        h = grid[g]
        for i in range(n):
            num = 0.0
            den = 0.0
            if code == _EPAN:
                k = i - 1
                while k >= 0 and xs[i] - xs[k] < h:
                    w = _kern(code, (xs[k] - xs[i]) / h)
                    num += w * ys[k]
                    den += w
                    k -= 1
                k = i + 1
                while k < n and xs[k] - xs[i] < h:
                    w = _kern(code, (xs[k] - xs[i]) / h)
                    num += w * ys[k]
                    den += w
                    k += 1
            else:
                for k in range(n):
                    if k != i:
                        w = _kern(code, (xs[k] - xs[i]) / h)
                        num += w * ys[k]
                        den += w
            pred = num / den if den > 0.0 else 0.0
            r = ys[i] - pred
            errors[g, i] = r * r
    return errors


def loo_cv_errors(xcol, y, grid, cfg):
    """Squared leave-one-out errors, shape ``(len(grid), n)``.

    Observations with an empty leave-one-out window are predicted by 0.
    """
    xcol = np.asarray(xcol, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    order = np.lexsort((y, xcol))
    return _loo_cv_errors(
        np.ascontiguousarray(xcol[order]),
        np.ascontiguousarray(y[order]),
        np.asarray(grid, dtype=np.float64),
        cfg.code,
    )


def loo_cv_curve(xcol, y, grid, cfg):
    """Leave-one-out sum of squared prediction errors at each bandwidth."""
    return loo_cv_errors(xcol, y, grid, cfg).sum(axis=1)


def loo_cv_bandwidth(xcol, y, cfg):
    """Grid bandwidth chosen by LOO-CV; ties go to the larger h."""
    xcol = np.asarray(xcol, dtype=np.float64)
    if xcol.size < 3:
        raise DegenerateColumnError("LOO-CV needs at least three observations")
    grid = bandwidth_grid(xcol, cfg)
    scores = loo_cv_curve(xcol, y, grid, cfg)
    best = len(grid) - 1 - int(np.argmin(scores[::-1]))
    return float(grid[best])


def resolve_bandwidth(xcol, y, cfg):
    if cfg.bandwidth is not None:
        return float(cfg.bandwidth)
    if cfg.policy == "reference_rule":
        return reference_rule_bandwidth(xcol)
    return loo_cv_bandwidth(xcol, y, cfg)
