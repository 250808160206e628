"""Example 4: a localized multivariate bump at two noise levels."""

from _runner import parse, run_rows, write_rows

METHODS = [
    (f"{m}/sigma={s}", m, {"noise": s})
    for s in (0.5, 1.0)
    for m in ("el", "sirs", "dcsis", "parametric_el")
]

if __name__ == "__main__":
    args = parse(__doc__, n=100, p=1000, reps=100)
    write_rows(args, "example4.csv", run_rows(args, 4, METHODS))
