"""Screening for varying-coefficient models.

The response is first residualized on the index variable ``z`` by a
Nadaraya-Watson fit; predictor ``j`` is then scored by the local EL
statistic of ``x_ij * (y_i - E[y | z_i])`` localized in ``z``.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .kernel import KernelConfig, nw_fitted, resolve_bandwidth
from .screening import (
    MIN_SUPPORT,
    FeatureStat,
    Selection,
    build_report,
    collect,
    evaluation_points,
    guarded,
    map_features,
    scan_local_el,
    screening_kernel,
    write_report,
)


class ConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class VCConfig:
    # EL localization in z; the nuisance fit E[y|z] has its own kernel
    kernel_z: KernelConfig = field(default_factory=screening_kernel)
    kernel_nuisance: KernelConfig = field(default_factory=KernelConfig)
    eval_policy: str = "observed_points"
    grid_size: int = 100
    min_support: int = MIN_SUPPORT
    selection: Selection = field(default_factory=Selection)
    tol: float = 1e-10
    max_iter: int = 100


def estimate_nuisance(z, y, cfg=None):
    """In-sample NW estimate of ``E[y | z]`` at each observed ``z_i``.

    Empty windows (compact kernel only) fall back to the mean of ``y``.
    """
    cfg = cfg or VCConfig()
    z = np.asarray(z, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if np.ptp(z) == 0.0:
        raise ConfigurationError("index variable z is constant")
    kcfg = cfg.kernel_nuisance
    if z.size < 3 and kcfg.bandwidth is None and kcfg.policy == "loo_cv":
        # leave-one-out needs three points; use the pilot bandwidth instead
        kcfg = replace(kcfg, policy="reference_rule")
    h = resolve_bandwidth(z, y, kcfg)
    return nw_fitted(z, y, h, kcfg.code, float(y.mean()))


def localization_bandwidth(z, v, cfg):
    """Bandwidth in ``z`` for the EL step.

    Under ``loo_cv`` it is chosen per feature by cross-validating the
    regression of ``v = x_j * (y - E[y|z])`` on ``z``; otherwise it depends on
    ``z`` alone.
    """
    return resolve_bandwidth(z, v, cfg.kernel_z)


def vc_feature_stat(xj, y, z, cfg=None, nuisance=None, h=None):
    """Maximum over ``z`` evaluation points of the residualized local EL statistic.

    ``nuisance`` overrides the estimated ``E[y | z_i]`` values (for instance
    with the true conditional mean) and ``h`` overrides the localization
    bandwidth.
    """
    cfg = cfg or VCConfig()
    xj = np.asarray(xj, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if nuisance is None:
        nuisance = estimate_nuisance(z, y, cfg)
    v = xj * (y - nuisance)
    if h is None:
        h = localization_bandwidth(z, v, cfg)
    points = evaluation_points(np.sort(z), cfg)
    stat, pt, skipped = scan_local_el(
        z, v, h, points, cfg.kernel_z, cfg.min_support, cfg.tol, cfg.max_iter
    )
    return FeatureStat(stat, pt, skipped, float(h))


def vc_screen(d, cfg=None, threads=1):
    """Rank predictors of ``d`` (which must carry ``z``) by the VC statistic."""
    cfg = cfg or VCConfig()
    if d.z is None:
        raise ConfigurationError("varying-coefficient screening needs an index variable z")
    y = np.asarray(d.y)
    z = np.asarray(d.z)
    nuisance = estimate_nuisance(z, y, cfg)
    kz = cfg.kernel_z
    # shared across features unless it is cross-validated per feature
    h = None if (kz.bandwidth is None and kz.policy == "loo_cv") else resolve_bandwidth(z, y, kz)
    x = np.asarray(d.x)
    results = map_features(
        guarded(lambda j: vc_feature_stat(x[:, j], y, z, cfg, nuisance, h)), d.p, threads
    )
    stats, pts, hs, skipped, diag = collect(results, d.p)
    return build_report(stats, pts, hs, skipped, d.feature_names, cfg.selection, "vc_el", diag)


def write_vc_report(report, path):
    write_report(report, path, {"index_point": report.argmax_point})
