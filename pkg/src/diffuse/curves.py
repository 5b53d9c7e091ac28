"""Sampled curves: the exchange format between analytic, simulated and report layers."""
from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

__all__ = ["CurveSeries", "write_csv_atomic", "fmt"]


def fmt(x):
    """Serialize a float with 17 significant digits."""
    return f"{float(x):.17g}"


def write_csv_atomic(path, header_comments, columns, rows):
    """Write ``# key=value`` comment lines, a column header and rows via temp + rename."""
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w") as fh:
        for line in header_comments:
            fh.write(f"# {line}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")
    os.replace(tmp, path)


@dataclass
class CurveSeries:
    """Ordered ``(x, y)`` samples with axis names and free-form metadata.

    ``x_name``/``y_name`` are ``"t"``/``"s"`` for adoption curves and
    ``"s"``/``"t"`` for timing functions.
    """

    x: np.ndarray
    y: np.ndarray
    x_name: str = "t"
    y_name: str = "s"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.x.shape != self.y.shape or self.x.ndim != 1:
            raise ValueError("x and y must be 1-d arrays of equal length")
        if len(self.x) > 1 and not np.all(np.diff(self.x) > 0):
            raise ValueError("abscissas must be strictly increasing")

    def __len__(self):
        return len(self.x)

    def __call__(self, x):
        """Linear interpolation inside the sampled range; NaN outside."""
        return np.interp(x, self.x, self.y, left=np.nan, right=np.nan)

    def shifted(self, dx):
        return CurveSeries(self.x + dx, self.y.copy(), self.x_name, self.y_name, dict(self.meta))

    def swapped(self):
        """Exchange axes; valid when ``y`` is strictly increasing."""
        return CurveSeries(self.y.copy(), self.x.copy(), self.y_name, self.x_name, dict(self.meta))

    def to_csv(self, path):
        header = [" ".join(f"{k}={v}" for k, v in self.meta.items())] if self.meta else []
        rows = ((fmt(a), fmt(b)) for a, b in zip(self.x, self.y))
        write_csv_atomic(path, header, [self.x_name, self.y_name], rows)

    @classmethod
    def from_csv(cls, path):
        meta = {}
        with open(path) as fh:
            line = fh.readline()
            while line.startswith("#"):
                for item in line[1:].split():
                    if "=" in item:
                        key, value = item.split("=", 1)
                        meta[key] = value
                line = fh.readline()
            x_name, y_name = line.strip().split(",")
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
        return cls(data[:, 0], data[:, 1], x_name, y_name, meta)
