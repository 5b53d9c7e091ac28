"""Graph families used by the adoption simulations.

Three representations share one :class:`Graph` type:

* ``explicit`` -- CSR adjacency built from an edge list (configuration-model
  multigraphs and their simple/connected rejection samples);
* ``complete`` and ``cycle`` -- implicit, answered arithmetically so that very
  large instances need no adjacency storage.

Each neighbour entry of a node is a *slot* (a clone, or half-edge).  For
explicit graphs ``reverse[s]`` is the slot at the other end of the same edge,
which lets the simulators update adopter/non-adopter boundaries in O(degree).
"""
from __future__ import annotations

import math
import os
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import DegreeSequenceError, SamplingError

__all__ = [
    "DegreeSpec",
    "Graph",
    "pair_configuration",
    "sample_simple_connected",
    "complete_graph",
    "cycle_graph",
    "check",
    "from_edges",
    "write_edgelist",
    "read_edgelist",
    "as_rng",
]

_ODD_RESAMPLE_BUDGET = 100


def as_rng(seed):
    """Return a ``numpy.random.Generator`` for an int, SeedSequence or Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class DegreeSpec:
    """Degree specification: ``regular(k)``, ``distribution([(d, p_d), ...])``
    or ``explicit([d_0, d_1, ...])``."""

    kind: str
    k: int | None = None
    degrees: tuple = ()
    probs: tuple = ()
    sequence: tuple = ()

    @classmethod
    def regular(cls, k):
        k = int(k)
        if k < 1:
            raise DegreeSequenceError(f"k must be >= 1, got {k}")
        return cls("regular", k=k, degrees=(k,), probs=(1.0,))

    @classmethod
    def distribution(cls, entries):
        entries = sorted((int(d), float(p)) for d, p in entries if float(p) > 0)
        if not entries:
            raise DegreeSequenceError("empty degree distribution")
        degrees = tuple(d for d, _ in entries)
        probs = tuple(p for _, p in entries)
        if len(set(degrees)) != len(degrees):
            raise DegreeSequenceError("duplicate degree in distribution")
        if min(degrees) < 1:
            raise DegreeSequenceError("all degrees must be >= 1")
        if abs(math.fsum(probs) - 1.0) > 1e-12:
            raise DegreeSequenceError(f"probabilities sum to {math.fsum(probs)!r}, not 1")
        return cls("distribution", degrees=degrees, probs=probs)

    @classmethod
    def explicit(cls, sequence):
        seq = tuple(int(d) for d in sequence)
        if not seq or min(seq) < 1:
            raise DegreeSequenceError("explicit degrees must all be >= 1")
        vals, counts = np.unique(seq, return_counts=True)
        return cls(
            "explicit",
            sequence=seq,
            degrees=tuple(int(v) for v in vals),
            probs=tuple(float(c) / len(seq) for c in counts),
        )

    @classmethod
    def parse(cls, text):
        """Parse ``"5"`` (regular) or ``"4:0.5,6:0.5"`` (distribution)."""
        text = text.strip()
        if ":" not in text:
            return cls.regular(int(text))
        entries = []
        for part in text.split(","):
            d, p = part.split(":")
            entries.append((int(d), float(p)))
        return cls.distribution(entries)

    @property
    def is_regular(self):
        return len(self.degrees) == 1

    @property
    def min_degree(self):
        return min(self.degrees)

    @property
    def mean_degree(self):
        return math.fsum(d * p for d, p in zip(self.degrees, self.probs))

    def label(self):
        if self.kind == "regular":
            return f"regular({self.k})"
        return "+".join(f"{p:g}*{d}" for d, p in zip(self.degrees, self.probs))

    def realize(self, n, seed=None):
        """Draw a per-node degree sequence of length ``n`` with even sum.

        Distribution specs whose draw has odd sum are redrawn in full (up to
        100 times) so that the empirical degree law is not tilted.
        """
        if self.kind == "regular":
            if (n * self.k) % 2:
                raise DegreeSequenceError(f"n*k = {n}*{self.k} is odd")
            return np.full(n, self.k, dtype=np.int64)
        if self.kind == "explicit":
            if len(self.sequence) != n:
                raise DegreeSequenceError(
                    f"explicit sequence has {len(self.sequence)} entries, n={n}"
                )
            seq = np.asarray(self.sequence, dtype=np.int64)
            if seq.sum() % 2:
                raise DegreeSequenceError("explicit degree sequence has odd sum")
            return seq
        rng = as_rng(seed)
        degrees = np.asarray(self.degrees, dtype=np.int64)
        for _ in range(_ODD_RESAMPLE_BUDGET):
            seq = rng.choice(degrees, size=n, p=np.asarray(self.probs))
            if seq.sum() % 2 == 0:
                return seq
        raise DegreeSequenceError(
            f"no even-sum degree sequence in {_ODD_RESAMPLE_BUDGET} draws"
        )


class Graph:
    """Undirected (multi)graph on nodes ``0..n-1``.

    Do not construct directly; use the generators in this module.  Arrays are
    read-only and a Graph is safe to share between threads.
    """

    def __init__(self, n, kind, *, edges=None, is_simple=None, is_connected=None, info=None):
        self.n = int(n)
        self.kind = kind
        self.is_simple = is_simple
        self.is_connected = is_connected
        self.info = dict(info or {})
        self._edges = None
        if kind == "explicit":
            edges = np.ascontiguousarray(edges, dtype=np.int64).reshape(-1, 2)
            edges.setflags(write=False)
            self._edges = edges

    def __repr__(self):
        return (
            f"Graph(n={self.n}, kind={self.kind!r}, edges={self.n_edges}, "
            f"simple={self.is_simple}, connected={self.is_connected})"
        )

    # -- structure ---------------------------------------------------------

    @property
    def edges(self):
        """(m, 2) array of edges.  Materialized for implicit kinds."""
        if self.kind == "explicit":
            return self._edges
        if self.kind == "cycle":
            u = np.arange(self.n, dtype=np.int64)
            return np.column_stack([u, (u + 1) % self.n])
        iu, ju = np.triu_indices(self.n, k=1)
        return np.column_stack([iu, ju]).astype(np.int64)

    @property
    def n_edges(self):
        if self.kind == "explicit":
            return len(self._edges)
        if self.kind == "cycle":
            return self.n
        return self.n * (self.n - 1) // 2

    def degree(self, v):
        if self.kind == "complete":
            return self.n - 1
        if self.kind == "cycle":
            return 2
        return int(self.offsets[v + 1] - self.offsets[v])

    def degrees(self):
        if self.kind == "complete":
            return np.full(self.n, self.n - 1, dtype=np.int64)
        if self.kind == "cycle":
            return np.full(self.n, 2, dtype=np.int64)
        return np.diff(self.offsets)

    def neighbor_count(self, v):
        return self.degree(v)

    def neighbors(self, v):
        """Neighbour entries of ``v`` (with multiplicity for multigraphs)."""
        if self.kind == "complete":
            others = np.arange(self.n - 1, dtype=np.int64)
            others[v:] += 1
            return others
        if self.kind == "cycle":
            return np.array([(v - 1) % self.n, (v + 1) % self.n], dtype=np.int64)
        return self.nbrs[self.offsets[v]:self.offsets[v + 1]]

    def _csr(self):
        if self.kind == "complete":
            raise TypeError("complete graphs are implicit; no slot structure")
        edges = self.edges
        m = len(edges)
        src = np.concatenate([edges[:, 0], edges[:, 1]])
        dst = np.concatenate([edges[:, 1], edges[:, 0]])
        order = np.argsort(src, kind="stable")
        offsets = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=self.n), out=offsets[1:])
        pos = np.empty(2 * m, dtype=np.int64)
        pos[order] = np.arange(2 * m)
        reverse = np.empty(2 * m, dtype=np.int64)
        reverse[pos[:m]] = pos[m:]
        reverse[pos[m:]] = pos[:m]
        nbrs = dst[order]
        for a in (offsets, nbrs, reverse):
            a.setflags(write=False)
        return offsets, nbrs, reverse

    @cached_property
    def _slots(self):
        return self._csr()

    @property
    def offsets(self):
        return self._slots[0]

    @property
    def nbrs(self):
        return self._slots[1]

    @property
    def reverse(self):
        return self._slots[2]

    def component_sizes(self):
        if self.kind != "explicit":
            return [self.n]
        _, labels = _components(self.n, self._edges)
        return sorted(np.bincount(labels).tolist(), reverse=True)


def from_edges(n, edges, *, is_simple=None, is_connected=None, info=None):
    """Build an explicit graph from an ``(m, 2)`` edge array."""
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if len(edges) and (edges.min() < 0 or edges.max() >= n):
        raise ValueError("edge endpoint out of range")
    return Graph(n, "explicit", edges=edges, is_simple=is_simple,
                 is_connected=is_connected, info=info)


def complete_graph(n):
    if n < 2:
        raise ValueError(f"complete graph needs n >= 2, got {n}")
    return Graph(n, "complete", is_simple=True, is_connected=True)


def cycle_graph(n):
    if n < 3:
        raise ValueError(f"cycle needs n >= 3, got {n}")
    return Graph(n, "cycle", is_simple=True, is_connected=True)


def _pair(degrees, rng):
    stubs = np.repeat(np.arange(len(degrees), dtype=np.int64), degrees)
    rng.shuffle(stubs)
    return stubs.reshape(-1, 2)


def pair_configuration(spec, n, seed=None):
    """Uniform configuration-model pairing of the clones of a degree sequence.

    The result may contain self-loops and multi-edges; ``is_simple`` and
    ``is_connected`` are left unknown (``None``).
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    rng = as_rng(seed)
    degrees = spec.realize(n, rng)
    return from_edges(n, _pair(degrees, rng))


def _is_simple(n, edges):
    u, v = edges[:, 0], edges[:, 1]
    if np.any(u == v):
        return False
    key = np.minimum(u, v) * n + np.maximum(u, v)
    key.sort()
    return not np.any(key[1:] == key[:-1])


def _components(n, edges):
    m = len(edges)
    adj = coo_matrix((np.ones(m, dtype=np.int8), (edges[:, 0], edges[:, 1])), shape=(n, n))
    return connected_components(adj, directed=False)


def check(graph):
    """Return ``(is_simple, is_connected)`` by scanning the graph."""
    if graph.kind != "explicit":
        return True, True
    edges = graph.edges
    ncomp, _ = _components(graph.n, edges)
    return _is_simple(graph.n, edges), ncomp == 1


def sample_simple_connected(spec, n, seed=None, max_tries=10_000):
    """Uniform sample from simple connected graphs with a realized degree sequence.

    Configuration pairings are redrawn until one is simple (cheap scan, done
    first) and connected (traversal).  ``graph.info`` records the number of
    rejections of each kind.  A connected 2-regular graph is a cycle, so
    ``regular(2)`` is routed to :func:`cycle_graph` with a warning.
    """
    if max_tries < 1:
        raise ValueError("max_tries must be >= 1")
    if spec.kind == "regular" and spec.k == 2:
        warnings.warn("connected 2-regular graph is the cycle; returning cycle_graph(n)",
                      stacklevel=2)
        return cycle_graph(n)
    rng = as_rng(seed)
    degrees = spec.realize(n, rng)
    nonsimple = disconnected = 0
    for _ in range(max_tries):
        edges = _pair(degrees, rng)
        if not _is_simple(n, edges):
            nonsimple += 1
            continue
        if _components(n, edges)[0] != 1:
            disconnected += 1
            continue
        return from_edges(n, edges, is_simple=True, is_connected=True,
                          info={"rejected_nonsimple": nonsimple,
                                "rejected_disconnected": disconnected})
    raise SamplingError(
        f"no simple connected graph in {max_tries} tries "
        f"({nonsimple} non-simple, {disconnected} disconnected)",
        nonsimple=nonsimple, disconnected=disconnected,
    )


def _flag(value):
    return "1" if value else "0"


def write_edgelist(graph, path):
    """Write ``# n=<n> simple=<0|1> connected=<0|1>`` then one ``u v`` per line."""
    simple, connected = graph.is_simple, graph.is_connected
    if simple is None or connected is None:
        simple, connected = check(graph)
    lines = [f"# n={graph.n} simple={_flag(simple)} connected={_flag(connected)}"]
    lines.extend(f"{u} {v}" for u, v in graph.edges.tolist())
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    os.replace(tmp, path)


def read_edgelist(path):
    with open(path) as fh:
        header = fh.readline()
        if not header.startswith("#"):
            raise ValueError(f"{path}: missing '# n=...' header")
        fields = dict(item.split("=") for item in header[1:].split())
        edges = np.loadtxt(fh, dtype=np.int64, ndmin=2, comments="#")
    n = int(fields["n"])
    return from_edges(n, edges.reshape(-1, 2),
                      is_simple=fields.get("simple") == "1",
                      is_connected=fields.get("connected") == "1")
