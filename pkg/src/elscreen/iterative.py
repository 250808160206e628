"""Iterative screening: alternate EL recruitment and sparse additive selection.

Round 1 screens the raw predictors and keeps what the additive selector
retains.  Later rounds screen the remaining predictors after linearly
projecting out the currently selected ones, then re-run the selector on the
union.  The loop stops at a fixed point, at ``max_total`` features or after
``max_rounds`` rounds.
"""

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .additive import SparseAdditiveConfig, fit_sparse_additive
from .screening import ScreeningConfig, screen, top_d


@dataclass(frozen=True)
class IterativeConfig:
    per_round_recruit: int = 20
    max_total: int = 20
    max_rounds: int = 10
    selector: SparseAdditiveConfig = field(default_factory=SparseAdditiveConfig)

    def __post_init__(self):
        if self.per_round_recruit < 1:
            raise ValueError("per_round_recruit must be >= 1")
        if self.max_total < self.per_round_recruit:
            raise ValueError("max_total must be >= per_round_recruit")
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be >= 1")

    @classmethod
    def default_for(cls, n, **kw):
        """``per_round_recruit = round(n / log n)`` capped at 20."""
        recruit = max(1, min(20, int(round(n / math.log(n)))))
        kw.setdefault("max_total", recruit)
        return cls(per_round_recruit=recruit, **kw)


@dataclass
class RoundRecord:
    round: int
    recruited: tuple[int, ...]
    selected: tuple[int, ...]
    note: str = ""


def residualize_feature(xj, x_selected):
    """OLS residual of ``xj`` on ``[1, x_selected]`` (minimum-norm solution)."""
    xj = np.asarray(xj, dtype=np.float64)
    return residualize(xj[:, None], x_selected)[:, 0]


def residualize(x, x_selected):
    """Column-wise OLS residuals of ``x`` on ``[1, x_selected]``."""
    x = np.asarray(x, dtype=np.float64)
    xs = np.asarray(x_selected, dtype=np.float64)
    if xs.ndim == 1:
        xs = xs[:, None]
    design = np.column_stack([np.ones(x.shape[0]), xs])
    coef, *_ = np.linalg.lstsq(design, x, rcond=None)
    return x - design @ coef


def _select(d, candidates, icfg, rng):
    fit = fit_sparse_additive(d.x[:, candidates], d.y, icfg.selector, rng)
    kept = [candidates[k] for k in fit.retained]
    return kept[: icfg.max_total]


def iterative_screen(d, scfg=None, icfg=None, seed=0, threads=1):
    """Run the recruit/select loop on ``d``.

    Returns ``(final, trace)`` where ``final`` is a sorted tuple of feature
    indices and ``trace`` a list of :class:`RoundRecord`.
    """
    scfg = scfg or ScreeningConfig()
    icfg = icfg or IterativeConfig.default_for(d.n)
    seed_key = seed if isinstance(seed, (tuple, list)) else (seed,)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([*map(int, seed_key), 7])))
    scfg = replace(scfg, selection=top_d(icfg.per_round_recruit))

    rep = screen(d, scfg, threads)
    recruited = list(rep.selected)
    selected = _select(d, recruited, icfg, rng)
    note = ""
    if not selected:
        selected = recruited[:1]
        note = "selector empty; kept top recruit"
    trace = [RoundRecord(1, tuple(recruited), tuple(sorted(selected)), note)]

    for k in range(2, icfg.max_rounds + 1):
        if len(selected) >= icfg.max_total:
            break
        rest = np.array([j for j in range(d.p) if j not in set(selected)])
        if rest.size == 0:
            break
        pseudo = d.replace(
            x=residualize(d.x[:, rest], d.x[:, selected]),
            feature_names=tuple(d.feature_names[j] for j in rest),
        )
        rep = screen(pseudo, scfg, threads)
        recruited = [int(rest[j]) for j in rep.selected]
        union = list(dict.fromkeys(selected + recruited))
        new = _select(d, union, icfg, rng)
        note = ""
        if not new:
            new = list(dict.fromkeys(selected + recruited[:1]))[: icfg.max_total]
            note = "selector empty; kept previous set plus top recruit"
        trace.append(RoundRecord(k, tuple(recruited), tuple(sorted(new)), note))
        if set(new) == set(selected):
            selected = new
            break
        selected = new

    return tuple(sorted(selected)), trace


def write_trace(trace, path):
    """One row per phase: ``round, phase, features`` (semicolon-joined, 1-based)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["round", "phase", "features"])
        for rec in trace:
            w.writerow([rec.round, "recruit", ";".join(str(j + 1) for j in rec.recruited)])
            w.writerow([rec.round, "select", ";".join(str(j + 1) for j in rec.selected)])
