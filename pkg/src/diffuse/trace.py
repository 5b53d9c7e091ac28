"""Event log of an adoption run and the timing quantities derived from it."""
from __future__ import annotations

import math

import numpy as np

from .curves import CurveSeries, fmt, write_csv_atomic
from .errors import InsufficientAdoptionsError

__all__ = ["AdoptionTrace", "ADOPT", "REMOVE", "delta", "adoption_curve", "count_for"]

ADOPT = 0
REMOVE = 1
_KIND_NAMES = {ADOPT: "adopt", REMOVE: "remove"}


def count_for(fraction, n):
    """Adopter count ``ceil(fraction * n)``, robust to float noise like 0.07*100."""
    return max(1, math.ceil(round(fraction * n, 9)))


class AdoptionTrace:
    """Time-ordered events ``(time, node, kind)`` of one run on ``n`` nodes.

    The first event is the initial adoption at time 0, so ``T(1) == 0``.
    """

    def __init__(self, n, times, nodes, kinds, meta=None):
        self.n = int(n)
        self.times = np.asarray(times, dtype=np.float64)
        self.nodes = np.asarray(nodes, dtype=np.int64)
        self.kinds = np.asarray(kinds, dtype=np.int8)
        self.meta = dict(meta or {})
        self._adopt_times = self.times[self.kinds == ADOPT]

    def __repr__(self):
        return f"AdoptionTrace(n={self.n}, events={len(self.times)}, adopted={self.n_adopted})"

    @property
    def n_adopted(self):
        return len(self._adopt_times)

    @property
    def adoption_times(self):
        """``T(x)`` for ``x = 1..n_adopted`` as an array (index ``x - 1``)."""
        return self._adopt_times

    def T(self, x):
        """Time of the ``x``-th adoption (1-based)."""
        if not 1 <= x <= self.n_adopted:
            raise InsufficientAdoptionsError(
                f"trace has {self.n_adopted} adoptions, asked for T({x})"
            )
        return float(self._adopt_times[x - 1])

    def gaps(self):
        """Inter-adoption times ``tau_i = T(i+1) - T(i)``."""
        return np.diff(self._adopt_times)

    def delta(self, alpha, gamma):
        return delta(self, alpha, gamma)

    def time_to_fraction(self, s):
        """Linearly interpolated time at which ``S(t)/n`` first reaches ``s``."""
        x = s * self.n
        if x > self.n_adopted:
            raise InsufficientAdoptionsError(f"trace never reaches s={s}")
        counts = np.arange(1, self.n_adopted + 1)
        return float(np.interp(x, counts, self._adopt_times))

    def to_csv(self, path, header=()):
        rows = (
            (fmt(t), str(v), _KIND_NAMES[k])
            for t, v, k in zip(self.times, self.nodes.tolist(), self.kinds.tolist())
        )
        comments = [f"n={self.n} " + " ".join(f"{k}={v}" for k, v in self.meta.items())]
        write_csv_atomic(path, [*comments, *header], ["time", "node", "kind"], rows)

    @classmethod
    def from_csv(cls, path):
        n = None
        times, nodes, kinds = [], [], []
        names = {v: k for k, v in _KIND_NAMES.items()}
        with open(path) as fh:
            for line in fh:
                if line.startswith("#"):
                    for item in line[1:].split():
                        if item.startswith("n=") and n is None:
                            n = int(item[2:])
                    continue
                if line.startswith("time,"):
                    continue
                t, v, k = line.strip().split(",")
                times.append(float(t))
                nodes.append(int(v))
                kinds.append(names[k])
        return cls(n, times, nodes, kinds)


def delta(trace, alpha, gamma):
    """``T(ceil(gamma n)) - T(ceil(alpha n))``."""
    if not 0 < alpha <= gamma < 1:
        raise ValueError(f"need 0 < alpha <= gamma < 1, got {alpha}, {gamma}")
    return trace.T(count_for(gamma, trace.n)) - trace.T(count_for(alpha, trace.n))


def adoption_curve(trace, grid):
    """Right-continuous samples of ``S(t)/n`` on a sorted time grid.

    ``S(t)`` counts every adoption up to ``t``; SIR removals do not lower it.
    """
    grid = np.asarray(grid, dtype=float)
    if len(grid) > 1 and np.any(np.diff(grid) < 0):
        raise ValueError("grid must be sorted")
    counts = np.searchsorted(trace.adoption_times, grid, side="right")
    return CurveSeries(grid, counts / trace.n, "t", "s", {"n": trace.n})
