"""Example 1: additive model on uniform predictors, four methods."""

from _runner import parse, run_rows, write_rows

METHODS = [
    ("el", "el", {}),
    ("sirs", "sirs", {}),
    ("dcsis", "dcsis", {}),
    ("parametric_el", "parametric_el", {}),
]

if __name__ == "__main__":
    args = parse(__doc__, n=400, p=1000, reps=100)
    write_rows(args, "example1.csv", run_rows(args, 1, METHODS, noise=1.0))
