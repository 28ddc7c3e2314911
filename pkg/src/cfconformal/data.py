"""Dataset container and the CSV schema used by the command-line harness.

CSV layout: header `x0,...,x{d-1}[,t],y[,role]`, one sample per row.
`t` is a 0/1 treatment flag, `role` is one of obs|int|test. Floats are
written with round-trip precision and infinities as inf/-inf.
"""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass

import numpy as np

ROLES = ("obs", "int", "test")


@dataclass(frozen=True)
class Dataset:
    """Feature rows with outcomes, optional treatment flags and row roles."""

    X: np.ndarray
    y: np.ndarray
    t: np.ndarray | None = None
    role: np.ndarray | None = None

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        if X.ndim != 2:
            raise ValueError("X must be 2-d")
        if y.ndim != 1 or y.shape[0] != X.shape[0]:
            raise ValueError("y must be 1-d with one outcome per row")
        if not np.isfinite(X).all():
            raise ValueError("features must be finite")
        if not np.isfinite(y).all():
            raise ValueError("outcomes must be finite")
        if self.t is not None:
            t = np.asarray(self.t)
            if t.shape != (X.shape[0],):
                raise ValueError("t must have one flag per row")
            if not np.isin(t, (0, 1)).all():
                raise ValueError("treatment flags must be 0 or 1")
            object.__setattr__(self, "t", t.astype(np.int64))
        if self.role is not None:
            role = np.asarray(self.role)
            if role.shape != (X.shape[0],):
                raise ValueError("role must have one tag per row")
            if not np.isin(role, ROLES).all():
                raise ValueError(f"row roles must be one of {ROLES}")
            object.__setattr__(self, "role", role)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    def take(self, index) -> "Dataset":
        index = np.asarray(index)
        return Dataset(
            self.X[index],
            self.y[index],
            None if self.t is None else self.t[index],
            None if self.role is None else self.role[index],
        )

    def where_role(self, role: str) -> "Dataset":
        if self.role is None:
            raise ValueError("dataset has no role column")
        return self.take(self.role == role)

    def where_treatment(self, t: int) -> "Dataset":
        if self.t is None:
            raise ValueError("dataset has no treatment flags")
        return self.take(self.t == t)


def _format_float(v: float) -> str:
    return repr(float(v))


def _parse_header(header):
    d = 0
    for name in header:
        if re.fullmatch(r"x\d+", name):
            d += 1
        else:
            break
    if d == 0:
        raise ValueError("header must start with feature columns x0, x1, ...")
    expected_x = [f"x{i}" for i in range(d)]
    if header[:d] != expected_x:
        raise ValueError("feature columns must be contiguous x0..x{d-1}")
    rest = header[d:]
    has_t = bool(rest) and rest[0] == "t"
    if has_t:
        rest = rest[1:]
    if not rest or rest[0] != "y":
        raise ValueError("header must contain a y column after the features")
    rest = rest[1:]
    has_role = bool(rest) and rest[0] == "role"
    if has_role:
        rest = rest[1:]
    if rest:
        raise ValueError(f"unexpected columns in header: {rest}")
    return d, has_t, has_role


def load_csv_dataset(path) -> Dataset:
    """Load a dataset, rejecting malformed rows with their line number."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError("empty file") from None
        d, has_t, has_role = _parse_header([h.strip() for h in header])
        width = d + has_t + 1 + has_role
        xs, ys, ts, roles = [], [], [], []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != width:
                raise ValueError(f"line {line_no}: expected {width} fields, got {len(row)}")
            try:
                vals = [float(v) for v in row[: d + has_t + 1]]
            except ValueError:
                raise ValueError(f"line {line_no}: unparseable numeric field") from None
            if any(math.isnan(v) for v in vals):
                raise ValueError(f"line {line_no}: missing or NaN value")
            xs.append(vals[:d])
            if has_t:
                tval = vals[d]
                if tval not in (0.0, 1.0):
                    raise ValueError(f"line {line_no}: treatment flag must be 0 or 1")
                ts.append(int(tval))
            yval = vals[d + has_t]
            if math.isinf(yval):
                raise ValueError(f"line {line_no}: outcome must be finite")
            ys.append(yval)
            if has_role:
                tag = row[-1].strip()
                if tag not in ROLES:
                    raise ValueError(f"line {line_no}: role must be one of {ROLES}")
                roles.append(tag)
    if not xs:
        raise ValueError("no data rows")
    return Dataset(
        np.asarray(xs, dtype=float),
        np.asarray(ys, dtype=float),
        np.asarray(ts, dtype=np.int64) if has_t else None,
        np.asarray(roles) if has_role else None,
    )


def save_csv_dataset(dataset: Dataset, path) -> None:
    """Write a dataset with round-trip float precision."""
    header = [f"x{i}" for i in range(dataset.dim)]
    if dataset.t is not None:
        header.append("t")
    header.append("y")
    if dataset.role is not None:
        header.append("role")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(dataset.n):
            row = [_format_float(v) for v in dataset.X[i]]
            if dataset.t is not None:
                row.append(str(int(dataset.t[i])))
            row.append(_format_float(dataset.y[i]))
            if dataset.role is not None:
                row.append(str(dataset.role[i]))
            writer.writerow(row)
