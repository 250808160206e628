"""Shared driver for the frequency-of-selection experiment scripts."""

import argparse
import csv
import os
import sys

from elscreen.simgen import SimulationSpec, run_experiment


def parse(description, n, p, reps):
    ap = argparse.ArgumentParser(description=description)
    ap.add_argument("--n", type=int, default=n)
    ap.add_argument("--p", type=int, default=p)
    ap.add_argument("--reps", type=int, default=reps)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    ap.add_argument("--out", default="results")
    return ap.parse_args()


def run_rows(args, example, methods, **spec_kw):
    """Run every method and return one row per method."""
    rows = []
    for label, method, extra in methods:
        spec = SimulationSpec(example, n=args.n, p=args.p, reps=args.reps, seed=args.seed,
                              method=method, **{**spec_kw, **extra})
        table = run_experiment(spec, workers=args.workers)
        row = [label, *table.as_tuple(), f"{table.inactive_mean:.4f}",
               f"{table.runtime_s:.0f}"]
        print("\t".join(str(v) for v in row), file=sys.stderr, flush=True)
        rows.append(row)
    return rows


def write_rows(args, name, rows):
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, name)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["method", "X1", "X2", "X3", "X4", "inactive_mean", "seconds"])
        w.writerows(rows)
    print(f"wrote {path}")
