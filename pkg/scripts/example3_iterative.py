"""Example 3: a marginally independent active predictor; iterative vs one-pass."""

from _runner import parse, run_rows, write_rows

METHODS = [
    ("iterative_el", "iterative_el", {}),
    ("el", "el", {}),
    ("sirs", "sirs", {}),
    ("dcsis", "dcsis", {}),
]

if __name__ == "__main__":
    args = parse(__doc__, n=300, p=1000, reps=100)
    write_rows(args, "example3.csv", run_rows(args, 3, METHODS))
