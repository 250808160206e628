"""Example 5: varying-coefficient model, index-aware screen vs marginal screens."""

from _runner import parse, run_rows, write_rows

METHODS = [
    ("vc_el", "vc_el", {}),
    ("el", "el", {}),
    ("sirs", "sirs", {}),
    ("dcsis", "dcsis", {}),
]

if __name__ == "__main__":
    args = parse(__doc__, n=100, p=1000, reps=100)
    write_rows(args, f"example5_n{args.n}.csv", run_rows(args, 5, METHODS))
