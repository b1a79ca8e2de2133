"""Dataset container with CSV input/output and centered empirical moments.

All empirical variances and covariances use divisor ``n``.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DataError, MissingColumn, ParseError, TooFewRows

__all__ = [
    "Dataset",
    "CenteredView",
    "from_csv",
    "to_csv",
    "center",
    "empirical_var",
    "empirical_cov",
]


@dataclass(frozen=True, eq=False)
class Dataset:
    """A response vector ``y`` and an ``n x p`` design ``x`` without intercept.

    ``response_name`` labels ``y``; ``names`` labels the design columns.
    """

    y: np.ndarray
    x: np.ndarray
    names: tuple = field(default=())
    response_name: str = "y"

    def __post_init__(self):
        y = np.array(self.y, dtype=float).reshape(-1)
        x = np.array(self.x, dtype=float)
        if x.ndim == 1:
            x = x.reshape(-1, 1)
        if x.ndim != 2 or x.shape[0] != y.shape[0]:
            raise DataError(
                f"design shape {x.shape} does not match response length {y.shape[0]}"
            )
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(x))):
            raise DataError("dataset contains non-finite values")
        names = tuple(self.names) or tuple(f"x{j + 1}" for j in range(x.shape[1]))
        if len(names) != x.shape[1]:
            raise DataError("number of names does not match number of columns")
        y.flags.writeable = False
        x.flags.writeable = False
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "names", names)

    @property
    def n(self):
        return self.y.shape[0]

    @property
    def p(self):
        return self.x.shape[1]

    def require_rows(self):
        """Raise :class:`TooFewRows` unless ``n >= p + 2``."""
        if self.n < self.p + 2:
            raise TooFewRows(f"need at least p + 2 = {self.p + 2} rows, got {self.n}")
        return self

    def drop_column(self, j):
        keep = [k for k in range(self.p) if k != j]
        return Dataset(
            self.y,
            self.x[:, keep],
            tuple(self.names[k] for k in keep),
            self.response_name,
        )

    def column(self, name):
        try:
            return self.names.index(name)
        except ValueError:
            raise MissingColumn(f"no column named {name!r}") from None


@dataclass(frozen=True, eq=False)
class CenteredView:
    y0: np.ndarray
    x0: np.ndarray
    means: np.ndarray  # response mean first, then the p column means


def center(d):
    x_mean = d.x.mean(axis=0)
    y_mean = d.y.mean()
    x0 = d.x - x_mean
    y0 = d.y - y_mean
    return CenteredView(y0=y0, x0=x0, means=np.concatenate([[y_mean], x_mean]))


def empirical_var(v):
    v = np.asarray(v, dtype=float)
    return empirical_cov(v, v)


def empirical_cov(u, v):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return float(np.mean((u - u.mean()) * (v - v.mean())))


def _open_text(source):
    if isinstance(source, (str, os.PathLike)):
        return open(source, newline="", encoding="utf-8"), True
    return source, False


def from_csv(source, response_column, *, require_rows=True):
    """Read a Dataset from a headed, comma-separated file.

    ``response_column`` becomes ``y`` and every other column becomes a design
    column, in header order.  With ``require_rows`` the ``n >= p + 2`` floor
    needed by the joint fit is enforced; marginal procedures such as
    screening pass ``False``.
    """
    handle, owned = _open_text(source)
    try:
        reader = csv.reader(handle)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ParseError("empty file", row=0) from None
        if response_column not in header:
            raise MissingColumn(f"response column {response_column!r} not in header")
        rows = []
        for i, record in enumerate(reader, start=1):
            if not record or all(not c.strip() for c in record):
                continue
            if len(record) != len(header):
                raise ParseError(
                    f"row {i}: expected {len(header)} fields, got {len(record)}", row=i
                )
            values = []
            for name, cell in zip(header, record):
                try:
                    values.append(float(cell))
                except ValueError:
                    raise ParseError(
                        f"row {i}, column {name!r}: cannot parse {cell!r} as a number",
                        row=i,
                        column=name,
                    ) from None
            rows.append(values)
    finally:
        if owned:
            handle.close()
    table = np.array(rows, dtype=float).reshape(len(rows), len(header))
    if not np.all(np.isfinite(table)):
        bad = int(np.argwhere(~np.isfinite(table))[0, 0]) + 1
        raise ParseError(f"row {bad}: non-finite value", row=bad)
    r = header.index(response_column)
    names = tuple(h for k, h in enumerate(header) if k != r)
    x = np.delete(table, r, axis=1)
    if table.shape[0] < 3:
        raise TooFewRows(f"need at least 3 rows, got {table.shape[0]}")
    d = Dataset(table[:, r], x, names, response_column)
    return d.require_rows() if require_rows else d


def to_csv(d, target=None):
    """Write ``d`` with the response first, 17 significant digits per value.

    Returns the text when ``target`` is None.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([d.response_name, *d.names])
    table = np.column_stack([d.y, d.x])
    for row in table:
        writer.writerow([format(v, ".17g") for v in row])
    text = buf.getvalue()
    if target is None:
        return text
    if isinstance(target, (str, os.PathLike)):
        with open(target, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
    else:
        target.write(text)
    return None
