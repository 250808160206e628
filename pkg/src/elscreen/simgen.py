"""Data generators for the five simulation designs and the
frequency-of-selection experiment.

Every replication draws from its own Philox stream keyed by
``(seed, example_id, rep_index, stream)``, so replications are independent
of each other and of execution order.

Meaning of ``noise`` per example:

=====  ====================================================  =======
id     model                                                 noise
=====  ====================================================  =======
1      additive, Unif(0,1) predictors                        sigma^2
2      additive, heteroscedastic (or homogeneous) error      sigma^2
3      correlated Gaussian linear model                      sigma
4      scaled Gaussian bump, N(0,1) predictors               sigma
5      varying coefficients in Z ~ Unif(0,1)                 var(eps)
=====  ====================================================  =======
"""

import csv
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np

from .dataset import Dataset

METHODS = ("el", "sirs", "dcsis", "parametric_el", "vc_el", "iterative_el")
ACTIVE = (0, 1, 2, 3)
DEFAULT_NOISE = {1: 1.0, 2: 0.5, 3: 1.0, 4: 0.5, 5: 0.1}
BUMP_SCALES = (0.8, 0.9, 1.0, 1.1)
CALIBRATION_DRAWS = 1_000_000
CALIBRATION_SEED = 20160401


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SimulationSpec:
    example_id: int
    n: int
    p: int
    noise: float | None = None
    reps: int = 100
    seed: int = 0
    method: str = "el"
    top_d: int = 20
    heterogeneous: bool = True

    def __post_init__(self):
        if self.example_id not in (1, 2, 3, 4, 5):
            raise ConfigError(f"example_id must be 1..5, got {self.example_id}")
        if self.n < 10 or self.p < 5 or self.reps < 1:
            raise ConfigError(f"need n >= 10, p >= 5, reps >= 1; got {self.n}, {self.p}, {self.reps}")
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}")
        if self.method == "vc_el" and self.example_id != 5:
            raise ConfigError("vc_el needs the index variable of example 5")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must fit in 64 bits")

    @property
    def noise_level(self):
        return DEFAULT_NOISE[self.example_id] if self.noise is None else float(self.noise)


def rng_for(seed, example_id, rep_index, stream=0):
    """Counter-based generator for one (seed, example, replication, stream)."""
    ss = np.random.SeedSequence([int(seed), int(example_id), int(rep_index), int(stream)])
    return np.random.Generator(np.random.Philox(ss))


# --- example designs -------------------------------------------------------

def g1(x):
    return x


def g2(x):
    return (2 * x - 1) ** 2


def g3(x):
    s = np.sin(2 * np.pi * x)
    return s / (2 - s)


def g4(x):
    s, c = np.sin(2 * np.pi * x), np.cos(2 * np.pi * x)
    return 0.1 * s + 0.2 * c + 0.3 * s**2 + 0.4 * c**3 + 0.5 * s**3


def h1(x):
    return (2 * x - 1) ** 2


def h2(x):
    return np.cos(2 * np.pi * x) / (2 + np.sin(2 * np.pi * x))


def h3(x):
    c = np.cos(2 * np.pi * x)
    return c / (2 - c)


def h4(x):
    return np.cos((2 * x - 1) * np.pi)


def beta1(z):
    return np.sin(2 * np.pi * z + np.pi / 4)


def beta2(z):
    return np.sin(2 * np.pi * z)


def beta3(z):
    return np.cos(2 * np.pi * z)


def beta4(z):
    return np.sin(2 * np.pi * z + 3 * np.pi / 4)


EX3_BETA = np.array([2.0, 2.0, 2.0, -3.0 * np.sqrt(2.0)])


def gaussian_bump(x4):
    """Unscaled single-index signal of example 4 on the first four columns."""
    s = np.asarray(BUMP_SCALES)
    return np.exp(-0.5 * np.sum((x4 / s) ** 2, axis=-1))


@lru_cache(maxsize=None)
def bump_calibration():
    """Monte Carlo mean and sd of the example-4 bump under N(0, I_4)."""
    rng = rng_for(CALIBRATION_SEED, 4, 0, stream=99)
    m = gaussian_bump(rng.standard_normal((CALIBRATION_DRAWS, 4)))
    return float(m.mean()), float(m.std())


@lru_cache(maxsize=None)
def ex2_homogeneous_variance():
    """Monte Carlo ``E[4 / (X1^2 + ... + X4^2)]`` for Unif(0,1) predictors."""
    rng = rng_for(CALIBRATION_SEED, 2, 0, stream=99)
    u = rng.random((CALIBRATION_DRAWS, 4))
    return float(np.mean(4.0 / np.sum(u**2, axis=1)))


def _ex1(rng, n, p, noise):
    x = rng.random((n, p))
    eps = rng.standard_normal(n)
    y = 5 * g1(x[:, 0]) + 3 * g2(x[:, 1]) + 4 * g3(x[:, 2]) + 6 * g4(x[:, 3])
    return x, y + np.sqrt(noise) * eps, None


def _ex2(rng, n, p, noise, heterogeneous):
    x = rng.random((n, p))
    eps = rng.standard_normal(n)
    if heterogeneous:
        var = 4.0 / np.sum(x[:, :4] ** 2, axis=1)
    else:
        var = ex2_homogeneous_variance()
    eps = eps * np.sqrt(var)
    y = -3 * h1(x[:, 0]) + 2.5 * h2(x[:, 1]) - 2 * h3(x[:, 2]) + 1.5 * h4(x[:, 3])
    return x, y + np.sqrt(noise) * eps, None


def _ex3(rng, n, p, noise):
    # X4 = W;  X_j = (W + E_j)/sqrt(2) gives cov(X_j, X4) = 1/sqrt(2) and
    # cov(X_j, X_k) = 1/2 for j, k != 4, all variances 1
    w = rng.standard_normal(n)
    e = rng.standard_normal((n, p))
    x = (w[:, None] + e) / np.sqrt(2.0)
    x[:, 3] = w
    eps = rng.standard_normal(n)
    return x, x[:, :4] @ EX3_BETA + noise * eps, None


def _ex4(rng, n, p, noise):
    x = rng.standard_normal((n, p))
    eps = rng.standard_normal(n)
    mu, sd = bump_calibration()
    m = (gaussian_bump(x[:, :4]) - mu) / sd
    return x, m + noise * eps, None


def _ex5(rng, n, p, noise):
    x = rng.standard_normal((n, p))
    z = rng.random(n)
    eps = rng.standard_normal(n)
    y = (
        x[:, 0] * beta1(z) + x[:, 1] * beta2(z)
        + x[:, 2] * beta3(z) + x[:, 3] * beta4(z)
    )
    return x, y + np.sqrt(noise) * eps, z


def gen_example(spec, rep_index):
    """One replication of the design in ``spec``; ``y`` is centered."""
    rng = rng_for(spec.seed, spec.example_id, rep_index)
    noise = spec.noise_level
    if spec.example_id == 1:
        x, y, z = _ex1(rng, spec.n, spec.p, noise)
    elif spec.example_id == 2:
        x, y, z = _ex2(rng, spec.n, spec.p, noise, spec.heterogeneous)
    elif spec.example_id == 3:
        x, y, z = _ex3(rng, spec.n, spec.p, noise)
    elif spec.example_id == 4:
        x, y, z = _ex4(rng, spec.n, spec.p, noise)
    else:
        x, y, z = _ex5(rng, spec.n, spec.p, noise)
    return Dataset(
        x=x, y=y - y.mean(), z=z,
        index_name="Z" if z is not None else None,
        response_name="Y",
    )


# --- experiment protocol ---------------------------------------------------

@dataclass
class FrequencyTable:
    """Selection counts of the active features over ``reps`` replications.

    ``inactive_mean`` is the total number of inactive selections divided by
    the number of inactive features, so it is on the same count scale as
    ``counts``.
    """

    spec: SimulationSpec
    counts: dict = field(default_factory=dict)
    inactive_mean: float = 0.0
    runtime_s: float = 0.0
    per_rep: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def as_tuple(self):
        return tuple(self.counts[j] for j in sorted(self.counts))

    def to_rows(self):
        s = self.spec
        base = [s.method, s.example_id, s.n, s.p, s.noise_level]
        rows = [base + [f"X{j + 1}", self.counts[j]] for j in sorted(self.counts)]
        rows.append(base + ["__inactive_mean__", repr(float(self.inactive_mean))])
        return rows

    def write(self, csv_path, json_path=None):
        with open(csv_path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["method", "example", "n", "p", "noise", "feature", "count"])
            w.writerows(self.to_rows())
        if json_path is not None:
            with open(json_path, "w", encoding="utf-8") as fh:
                json.dump(
                    {"spec": asdict(self.spec), "noise_level": self.spec.noise_level,
                     "metadata": self.metadata},
                    fh, indent=2, sort_keys=True,
                )


def select_features(d, spec, rep_index, settings=None):
    """Run ``spec.method`` on ``d`` and return the selected index set."""
    # imported here: these modules import simgen for nothing but keep the
    # dependency graph one-way at import time
    from .baselines import baseline_screen
    from .iterative import IterativeConfig, iterative_screen
    from .screening import ScreeningConfig, screen, top_d
    from .vc import VCConfig, vc_screen

    settings = dict(settings or {})
    sel = top_d(spec.top_d)
    if spec.method == "el":
        cfg = settings.get("screening") or ScreeningConfig()
        return set(screen(d, _with_selection(cfg, sel)).selected)
    if spec.method in ("sirs", "dcsis", "parametric_el"):
        return set(baseline_screen(d, spec.method, sel).selected)
    if spec.method == "vc_el":
        cfg = settings.get("vc") or VCConfig()
        return set(vc_screen(d, _with_selection(cfg, sel)).selected)
    scfg = settings.get("screening") or ScreeningConfig()
    icfg = settings.get("iterative") or IterativeConfig.default_for(d.n)
    final, _ = iterative_screen(d, scfg, icfg, seed=(spec.seed, spec.example_id, rep_index))
    return set(final)


def _with_selection(cfg, sel):
    from dataclasses import replace
    return replace(cfg, selection=sel)


def _run_rep(args):
    spec, r, settings = args
    d = gen_example(spec, r)
    try:
        return sorted(select_features(d, spec, r, settings))
    except Exception as exc:
        raise RuntimeError(f"replication {r} failed: {exc}") from exc


def run_experiment(spec, workers=1, settings=None, progress=None):
    """Frequency-of-selection experiment over ``spec.reps`` replications."""
    t0 = time.perf_counter()
    jobs = [(spec, r, settings) for r in range(spec.reps)]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            picks = list(pool.map(_run_rep, jobs))
    else:
        picks = []
        for job in jobs:
            picks.append(_run_rep(job))
            if progress is not None:
                progress(len(picks), spec.reps)
    counts = {j: 0 for j in ACTIVE}
    inactive = 0
    for sel in picks:
        for j in sel:
            if j in counts:
                counts[j] += 1
            else:
                inactive += 1
    return FrequencyTable(
        spec=spec,
        counts=counts,
        inactive_mean=inactive / (spec.p - len(ACTIVE)),
        runtime_s=time.perf_counter() - t0,
        per_rep=picks,
        metadata={
            "bump_calibration": bump_calibration() if spec.example_id == 4 else None,
            "ex2_homogeneous_variance": (
                ex2_homogeneous_variance()
                if spec.example_id == 2 and not spec.heterogeneous else None
            ),
            "bandwidth_selection": "leave-one-out CV over 2x-5x the reference-rule pilot",
            "selector": "adaptive group-lasso B-spline additive fit" if spec.method == "iterative_el" else None,
        },
    )
