"""Regression datasets: CSV ingestion, validation and feature rescaling."""

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy import stats


class DataError(ValueError):
    """Malformed or insufficient input data."""


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable ``n x p`` design ``x``, response ``y`` and optional index ``z``.

    Arrays are copied and marked read-only on construction.
    """

    x: np.ndarray
    y: np.ndarray
    z: np.ndarray | None = None
    feature_names: tuple[str, ...] = field(default=())
    response_name: str = "y"
    index_name: str | None = None

    def __post_init__(self):
        x = np.array(self.x, dtype=np.float64, ndmin=2)
        y = np.array(self.y, dtype=np.float64).ravel()
        if x.shape[0] != y.shape[0]:
            raise DataError(f"x has {x.shape[0]} rows but y has {y.shape[0]}")
        n, p = x.shape
        if n < 2:
            raise DataError(f"need at least 2 observations, got {n}")
        if p < 1:
            raise DataError("need at least one predictor")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise DataError("x and y must be finite")
        z = None
        if self.z is not None:
            z = np.array(self.z, dtype=np.float64).ravel()
            if z.shape[0] != n:
                raise DataError(f"z has length {z.shape[0]}, expected {n}")
            if not np.all(np.isfinite(z)):
                raise DataError("z must be finite")
            z.flags.writeable = False
        names = tuple(self.feature_names) or tuple(f"X{j + 1}" for j in range(p))
        if len(names) != p:
            raise DataError(f"{len(names)} feature names for {p} columns")
        x.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "feature_names", names)

    @property
    def n(self):
        return self.x.shape[0]

    @property
    def p(self):
        return self.x.shape[1]

    def centered(self):
        return self.replace(y=self.y - self.y.mean())

    def replace(self, **changes):
        kw = dict(
            x=self.x, y=self.y, z=self.z, feature_names=self.feature_names,
            response_name=self.response_name, index_name=self.index_name,
        )
        kw.update(changes)
        return Dataset(**kw)

    def subset(self, columns):
        columns = list(columns)
        return self.replace(
            x=self.x[:, columns],
            feature_names=tuple(self.feature_names[j] for j in columns),
        )


def load_csv(path, response_col, index_col=None, center_response=True):
    """Read a headered numeric CSV.

    ``response_col`` becomes ``y``, ``index_col`` (if given) becomes ``z`` and
    every other column, in header order, becomes a predictor.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        rows = [row for row in reader if row]

    for col in (response_col, index_col):
        if col is not None and col not in header:
            raise DataError(f"{path}: column {col!r} not found in header")
    if index_col is not None and index_col == response_col:
        raise DataError("index column and response column must differ")

    values = np.empty((len(rows), len(header)))
    for i, row in enumerate(rows):
        if len(row) != len(header):
            raise DataError(
                f"{path}: row {i + 2} has {len(row)} fields, expected {len(header)}"
            )
        for j, cell in enumerate(row):
            try:
                values[i, j] = float(cell)
            except ValueError:
                raise DataError(
                    f"{path}: non-numeric value {cell!r} at row {i + 2}, "
                    f"column {header[j]!r}"
                ) from None
    if len(rows) < 2:
        raise DataError(f"{path}: need at least 2 observations, got {len(rows)}")

    yi = header.index(response_col)
    zi = header.index(index_col) if index_col is not None else None
    xcols = [j for j in range(len(header)) if j not in (yi, zi)]
    if not xcols:
        raise DataError(f"{path}: no predictor columns")
    y = values[:, yi]
    if center_response:
        y = y - y.mean()
    return Dataset(
        x=values[:, xcols],
        y=y,
        z=values[:, zi] if zi is not None else None,
        feature_names=tuple(header[j] for j in xcols),
        response_name=response_col,
        index_name=index_col,
    )


def write_csv(d, path):
    """Write ``d`` so that :func:`load_csv` reproduces it bit-for-bit."""
    header = [d.response_name]
    cols = [d.y]
    if d.z is not None:
        header.append(d.index_name or "z")
        cols.append(d.z)
    header.extend(d.feature_names)
    table = np.column_stack(cols + [d.x])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in table:
            w.writerow([repr(float(v)) for v in row])


def rescale_features(d, mode="none"):
    """Rescale every predictor column; ``y`` and ``z`` are untouched.

    ``minmax`` maps columns affinely onto [0, 1] (constant columns become
    0.5); ``rank`` replaces values by ``(rank - 0.5) / n`` with average ranks
    for ties.
    """
    if mode == "none":
        return d
    x = d.x
    if mode == "minmax":
        lo = x.min(axis=0)
        span = x.max(axis=0) - lo
        out = np.full_like(x, 0.5)
        ok = span > 0
        out[:, ok] = (x[:, ok] - lo[ok]) / span[ok]
        # clamp rounding so repeated application is a fixed point
        out = np.clip(out, 0.0, 1.0)
    elif mode == "rank":
        out = (stats.rankdata(x, axis=0) - 0.5) / d.n
    else:
        raise ValueError(f"unknown rescale mode {mode!r}")
    return d.replace(x=out)
