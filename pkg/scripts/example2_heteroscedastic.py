"""Example 2: heteroscedastic and homoscedastic errors, four methods."""

from _runner import parse, run_rows, write_rows

METHODS = [
    (f"{m}/{arm}", m, {"heterogeneous": arm == "heteroscedastic"})
    for arm in ("heteroscedastic", "homoscedastic")
    for m in ("el", "sirs", "dcsis", "parametric_el")
]

if __name__ == "__main__":
    args = parse(__doc__, n=100, p=1000, reps=100)
    write_rows(args, "example2.csv", run_rows(args, 2, METHODS, noise=0.5))
