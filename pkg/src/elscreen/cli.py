"""Command-line interface: ``elscreen {screen,simulate,bench-el}``."""

import argparse
import json
import logging
import os
import platform
import sys
import time
from dataclasses import asdict, replace

import numpy as np

from . import __version__
from .baselines import BASELINES, baseline_screen
from .dataset import DataError, load_csv, rescale_features
from .el import el_logratio, el_logratio_bruteforce
from .iterative import IterativeConfig, iterative_screen, write_trace
from .kernel import KernelConfig
from .screening import (
    MIN_SUPPORT,
    ScreeningConfig,
    build_report,
    screen,
    screening_kernel,
    top_d,
    write_report,
)
from .simgen import METHODS, SimulationSpec, run_experiment
from .vc import VCConfig, vc_screen, write_vc_report

log = logging.getLogger("elscreen")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INTERNAL = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _bandwidth(text):
    if text == "auto":
        return None
    try:
        h = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bandwidth must be 'auto' or a number, got {text!r}")
    if not h > 0:
        raise argparse.ArgumentTypeError("bandwidth must be > 0")
    return h


def _threads(args):
    return args.threads or os.cpu_count() or 1


def build_parser():
    p = _Parser(prog="elscreen", description="Marginal empirical-likelihood feature screening")
    p.add_argument("--version", action="version", version=f"elscreen {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("screen", help="screen the predictors of a CSV dataset")
    s.add_argument("--input", required=True)
    s.add_argument("--response", required=True)
    s.add_argument("--index", default=None, help="index column Z (vc_el)")
    s.add_argument("--method", default="el", choices=("el", "vc_el", *BASELINES, "iterative_el"))
    s.add_argument("--top-d", type=int, default=20)
    s.add_argument("--bandwidth", type=_bandwidth, default=None, help="'auto' or a positive number")
    s.add_argument("--kernel", default="epanechnikov", choices=("epanechnikov", "gaussian"))
    s.add_argument("--min-support", type=int, default=MIN_SUPPORT)
    s.add_argument("--rescale", default="none", choices=("none", "minmax", "rank"))
    s.add_argument("--no-center", action="store_true", help="do not center the response")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--threads", type=int, default=None)
    s.add_argument("--out", required=True)

    m = sub.add_parser("simulate", help="frequency-of-selection experiment")
    m.add_argument("--example", type=int, required=True, choices=(1, 2, 3, 4, 5))
    m.add_argument("--n", type=int, required=True)
    m.add_argument("--p", type=int, required=True)
    m.add_argument("--noise", type=float, default=None)
    m.add_argument("--reps", type=int, default=100)
    m.add_argument("--method", default="el", choices=METHODS)
    m.add_argument("--top-d", type=int, default=20)
    m.add_argument("--homogeneous", action="store_true", help="example 2 with constant error variance")
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--threads", type=int, default=None, help="worker processes")
    m.add_argument("--out", required=True)

    b = sub.add_parser("bench-el", help="EL solver oracle check and timing")
    b.add_argument("--n", type=int, default=10)
    b.add_argument("--reps", type=int, default=1000)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", default=None)
    return p


def _metadata(args, extra=None):
    meta = {
        "argv": args._argv,
        "args": {k: v for k, v in vars(args).items() if not k.startswith("_")},
        "seed": args.seed,
        "versions": {
            "elscreen": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
        },
    }
    meta.update(extra or {})
    return meta


def _write_json(obj, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=str)


def cmd_screen(args):
    if args.method == "vc_el" and args.index is None:
        raise UsageError("screen: --method vc_el requires --index")
    if args.top_d < 1:
        raise UsageError("screen: --top-d must be >= 1")
    d = load_csv(args.input, args.response, args.index, center_response=not args.no_center)
    d = rescale_features(d, args.rescale)
    os.makedirs(args.out, exist_ok=True)
    sel = top_d(args.top_d)
    kcfg = screening_kernel(family=args.kernel, bandwidth=args.bandwidth)
    threads = _threads(args)
    report_path = os.path.join(args.out, "report.csv")
    extra = {}

    if args.method == "el":
        cfg = ScreeningConfig(kernel=kcfg, min_support=args.min_support, selection=sel)
        report = screen(d, cfg, threads)
        write_report(report, report_path)
        extra["config"] = asdict(cfg)
    elif args.method == "vc_el":
        cfg = VCConfig(
            kernel_z=kcfg,
            kernel_nuisance=KernelConfig(family=args.kernel),
            min_support=args.min_support, selection=sel,
        )
        report = vc_screen(d, cfg, threads)
        write_vc_report(report, report_path)
        extra["config"] = asdict(cfg)
    elif args.method in BASELINES:
        report = baseline_screen(d, args.method, sel, threads)
        write_report(report, report_path, {"method": [args.method] * d.p})
    else:
        scfg = ScreeningConfig(kernel=kcfg, min_support=args.min_support)
        icfg = IterativeConfig.default_for(d.n, max_total=max(args.top_d, min(20, d.n)))
        final, trace = iterative_screen(d, scfg, icfg, seed=args.seed, threads=threads)
        first = screen(d, replace(scfg, selection=sel), threads)
        report = build_report(
            first.stats, first.argmax_point, first.bandwidths, first.skipped_points,
            d.feature_names, sel, "iterative_el", first.diagnostics,
        )
        report = replace(report, selected=tuple(final))
        write_report(report, report_path)
        write_trace(trace, os.path.join(args.out, "trace.csv"))
        extra["config"] = {"screening": asdict(scfg), "iterative": asdict(icfg)}
        extra["note"] = "stats/ranks are from the first screening round; selected is the final set"

    extra["bandwidths"] = [None if not np.isfinite(h) else float(h) for h in report.bandwidths]
    extra["diagnostics"] = {str(k): v for k, v in report.diagnostics.items()}
    extra["selected"] = [d.feature_names[j] for j in report.selected]
    _write_json(_metadata(args, extra), os.path.join(args.out, "metadata.json"))
    print(f"selected {len(report.selected)} of {d.p}: " + ", ".join(extra["selected"]))
    return EXIT_OK


def cmd_simulate(args):
    spec = SimulationSpec(
        example_id=args.example, n=args.n, p=args.p, noise=args.noise, reps=args.reps,
        seed=args.seed, method=args.method, top_d=args.top_d,
        heterogeneous=not args.homogeneous,
    )
    os.makedirs(args.out, exist_ok=True)
    table = run_experiment(spec, workers=_threads(args))
    table.write(os.path.join(args.out, "frequency.csv"), os.path.join(args.out, "spec.json"))
    _write_json(_metadata(args, {"spec": asdict(spec), "counts": table.counts,
                                 "inactive_mean": table.inactive_mean}),
                os.path.join(args.out, "metadata.json"))
    counts = ", ".join(f"X{j + 1}={c}" for j, c in sorted(table.counts.items()))
    print(f"example {spec.example_id} {spec.method}: {counts}; "
          f"inactive mean {table.inactive_mean:.4f}")
    return EXIT_OK


def bench_el(n, reps, seed):
    """Compare the Newton solver with the grid oracle on random instances."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    hull_mismatch = 0
    t_fast = t_oracle = 0.0
    for _ in range(reps):
        v = rng.standard_normal(n)
        v[rng.random(n) < 0.2] = 0.0
        t0 = time.perf_counter()
        a = el_logratio(v).logratio
        t1 = time.perf_counter()
        b = el_logratio_bruteforce(v)
        t2 = time.perf_counter()
        t_fast += t1 - t0
        t_oracle += t2 - t1
        if np.isfinite(a) != np.isfinite(b):
            hull_mismatch += 1
        elif np.isfinite(a):
            worst = max(worst, abs(a - b))
    return {
        "n": n, "reps": reps, "seed": seed, "max_abs_diff": worst,
        "hull_mismatches": hull_mismatch,
        "solver_us_per_call": 1e6 * t_fast / reps,
        "oracle_us_per_call": 1e6 * t_oracle / reps,
    }


def cmd_bench(args):
    if args.n < 1 or args.n > 20:
        raise UsageError("bench-el: --n must be in 1..20 (oracle is brute force)")
    res = bench_el(args.n, args.reps, args.seed)
    for k, v in res.items():
        print(f"{k}: {v}")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        _write_json(res, os.path.join(args.out, "bench_el.json"))
    return EXIT_OK if res["hull_mismatches"] == 0 and res["max_abs_diff"] <= 1e-6 else EXIT_INTERNAL


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(argv)
        args._argv = argv
        if args.command == "screen":
            return cmd_screen(args)
        if args.command == "simulate":
            return cmd_simulate(args)
        return cmd_bench(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except (DataError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        log.exception("internal failure")
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
