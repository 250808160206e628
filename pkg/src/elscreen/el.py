"""Univariate empirical likelihood ratio for a single zero-mean constraint.

The log ratio for constraint values ``v`` is ``2 * sum(log(1 + lam * v))``
where ``lam`` is the root of ``sum(v / (1 + lam * v)) = 0``.  When zero lies
outside the convex hull of the nonzero ``v`` the ratio is ``+inf``.

The solver works on ``v / sqrt(max(v+) * max(v-))`` so the statistic is
invariant to rescaling ``v`` and both ends of the feasible interval for the
multiplier stay finite.
"""

from dataclasses import dataclass

import numba
import numpy as np
from scipy import optimize

CONVERGED = 0
INFINITE_HULL = 1
ALL_ZERO = 2
NOT_CONVERGED = 3

STATUS_NAMES = {
    CONVERGED: "converged",
    INFINITE_HULL: "infinite_hull",
    ALL_ZERO: "all_zero",
}

# relative shrink of the feasible lambda interval, keeps 1 + lam*v > 0
_MARGIN = 1e-12


class SolverError(RuntimeError):
    """Newton/bisection failed to converge; carries the last bracket."""

    def __init__(self, message, bracket):
        super().__init__(message)
        self.bracket = bracket


@dataclass(frozen=True)
class ELOutcome:
    logratio: float
    lam: float
    status: str
    iterations: int

    @property
    def finite(self):
        return np.isfinite(self.logratio)


@numba.njit(cache=True, nogil=True)
def _midpoint(lo, hi):
    # geometric split when the bracket spans orders of magnitude on one side
    # of zero; lam = O(1) is the natural scale after normalization
    a, b = abs(lo), abs(hi)
    if lo >= 0.0 or hi <= 0.0:
        small, big = min(a, b), max(a, b)
        small = max(small, 1.0)
        if big > 4.0 * small:
            m = np.sqrt(big) * np.sqrt(small)
            return m if hi > 0.0 else -m
    return 0.5 * (lo + hi)


@numba.njit(cache=True, nogil=True, error_model="numpy")
def _solve_normalized(u, tol, max_iter):
    """Solve the EL dual for nonzero ``u`` scaled so that ``lam = O(1)``.

    Safeguarded Newton on the strictly decreasing score; a bisection step is
    forced whenever two consecutive steps fail to halve the bracket.
    Returns ``(logratio, lam, status, iterations, lo, hi)``.
    """
    umin = np.inf
    umax = -np.inf
    for k in range(u.shape[0]):
        if u[k] < umin:
            umin = u[k]
        if u[k] > umax:
            umax = u[k]
    if umin >= 0.0 or umax <= 0.0:
        return np.inf, np.nan, INFINITE_HULL, 0, np.nan, np.nan

    lo0 = -1.0 / umax
    hi0 = -1.0 / umin
    width0 = hi0 - lo0
    lo = lo0 + _MARGIN * width0
    hi = hi0 - _MARGIN * width0
    stop_width = tol * width0

    lam = 0.0
    it = 0
    width = hi - lo
    stalls = 0
    while it < max_iter:
        it += 1
        score = 0.0
        slope = 0.0
        mass = 0.0
        for k in range(u.shape[0]):
            x = lam * u[k]
            if np.isfinite(x):
                t = u[k] / (1.0 + x)
            else:
                t = 1.0 / (lam + 1.0 / u[k])
            score += t
            slope -= t * t
            mass += abs(t)
        # relative to the current terms: near a far-out root they are all tiny
        if abs(score) <= tol * mass:
            break
        if score > 0.0:
            lo = lam
        else:
            hi = lam
        if hi - lo <= stop_width:
            break
        if hi - lo > 0.5 * width:
            stalls += 1
        else:
            stalls = 0
        width = hi - lo
        step = lam - score / slope if slope < 0.0 else np.nan
        # also catches nan/inf from an underflowed slope
        if stalls >= 2 or not (lo < step < hi):
            step = _midpoint(lo, hi)
            stalls = 0
        lam = step
    else:
        return np.nan, lam, NOT_CONVERGED, it, lo, hi

    total = 0.0
    for k in range(u.shape[0]):
        x = lam * u[k]
        if np.isfinite(x):
            total += np.log1p(x)
        else:
            # 1 + lam*u > 0 and too large to represent
            total += np.log(abs(lam)) + np.log(abs(u[k]))
    return 2.0 * total, lam, CONVERGED, it, lo, hi


@numba.njit(cache=True, nogil=True)
def el_core(v, tol, max_iter):
    """Compiled entry point: ``(logratio, lam, status, iterations)``.

    ``lam`` is returned on the original scale of ``v``.
    """
    pos = 0.0
    neg = 0.0
    count = 0
    for k in range(v.shape[0]):
        if v[k] > 0.0:
            count += 1
            pos = max(pos, v[k])
        elif v[k] < 0.0:
            count += 1
            neg = max(neg, -v[k])
    if count == 0:
        return 0.0, 0.0, ALL_ZERO, 0
    # balanced scale: both ends of the lambda interval stay finite even when
    # pos/neg is beyond the double range
    if pos > 0.0 and neg > 0.0:
        scale = np.sqrt(pos) * np.sqrt(neg)
    else:
        scale = max(pos, neg)
    u = np.empty(count)
    j = 0
    for k in range(v.shape[0]):
        if v[k] != 0.0:
            u[j] = v[k] / scale
            j += 1
    logratio, lam, status, it, lo, hi = _solve_normalized(u, tol, max_iter)
    if status == NOT_CONVERGED:
        # bracket is reported on the normalized scale
        return np.nan, lo, status, it
    return logratio, lam / scale, status, it


def el_logratio(v, tol=1e-10, max_iter=100):
    """Empirical likelihood log ratio for ``H0: E[v] = 0``.

    Parameters
    ----------
    v : array_like, shape (n,)
        Constraint values, for example ``K_h(x_i - x0) * y_i``.
    tol : float
        Relative tolerance on the score and on the bracket width.
    max_iter : int
        Newton/bisection iteration cap.

    Returns
    -------
    ELOutcome
        ``lam`` is on the scale of ``v`` and may overflow to ``+-inf`` when
        the positive and negative parts of ``v`` differ by more than the
        double range; the log ratio is still finite.
    """
    v = np.ascontiguousarray(v, dtype=np.float64).ravel()
    if v.size < 1:
        raise ValueError("el_logratio needs at least one value")
    if not np.all(np.isfinite(v)):
        raise ValueError("el_logratio received non-finite values")
    logratio, lam, status, it = el_core(v, tol, max_iter)
    if status == NOT_CONVERGED:
        raise SolverError(
            f"EL solver did not converge in {max_iter} iterations", (lam, it)
        )
    if status == INFINITE_HULL:
        return ELOutcome(np.inf, np.nan, STATUS_NAMES[status], it)
    return ELOutcome(max(float(logratio), 0.0), float(lam), STATUS_NAMES[status], it)


def el_logratio_bruteforce(v, grid=4001):
    """Grid-search oracle for :func:`el_logratio` on small inputs.

    Maximizes the concave dual ``2 * sum(log(1 + lam * v))`` over a dense
    grid of the feasible interval, then polishes the best cell with a bounded
    scalar search.  Shares no code with the Newton solver.
    """
    v = np.asarray(v, dtype=np.float64).ravel()
    nz = v[v != 0.0]
    if nz.size == 0:
        return 0.0
    if nz.min() > 0.0 or nz.max() < 0.0:
        return np.inf
    nz = nz / (np.sqrt(nz.max()) * np.sqrt(-nz.min()))
    lo, hi = -1.0 / nz.max(), -1.0 / nz.min()
    pad = 1e-12 * (hi - lo)
    lams = np.linspace(lo + pad, hi - pad, grid)

    def logs(prod, lam):
        with np.errstate(over="ignore", invalid="ignore"):
            out = np.log1p(prod)
        big = ~np.isfinite(prod)
        if np.any(big):
            mag = np.log(np.abs(np.broadcast_to(lam, prod.shape)))
            out = np.where(big, mag + np.log(np.abs(nz)), out)
        return out

    def dual(lam):
        with np.errstate(over="ignore"):
            prod = lam * nz
        return 2.0 * np.sum(logs(prod, lam))

    vals = np.array([dual(t) for t in lams]) if grid <= 50 else None
    if vals is None:
        with np.errstate(over="ignore"):
            prod = np.outer(lams, nz)
        vals = 2.0 * logs(prod, lams[:, None]).sum(axis=1)
    best = int(np.argmax(vals))
    a = lams[max(best - 1, 0)]
    b = lams[min(best + 1, grid - 1)]
    res = optimize.minimize_scalar(
        lambda t: -dual(t), bounds=(a, b), method="bounded",
        options={"xatol": 1e-14 * max(1.0, abs(b - a))},
    )
    return float(max(vals[best], -res.fun, 0.0))
