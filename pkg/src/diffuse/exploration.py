"""Graph-free coupled process: configuration-model exploration driven by contact clocks.

Clones are sleeping (their node has not been reached), active (their node is
awake but the clone is unpaired) or dead (paired).  One iteration kills a
uniformly chosen active clone and pairs it with a clone drawn uniformly from
the other unpaired clones; drawing a sleeping clone wakes its node, which in
the coupled process is an adoption.  With per-clone contact rate ``w`` an
iteration takes an exponential time of rate ``w * A``, because contacts along
already-paired clones never change anything.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .analytic import f_sleep
from .curves import fmt, write_csv_atomic
from .errors import ComponentDeathError
from .graphs import DegreeSpec, as_rng
from .model import Clock, ModelParams, Variant
from .trace import AdoptionTrace

__all__ = [
    "ExplorationState",
    "ExplorationHistory",
    "initial_state",
    "wake_probability",
    "innovator_probability",
    "explore_step",
    "explore",
    "coupled_run",
    "coupled_run_innovators",
    "fluid_deviation",
    "tree_check",
]


@dataclass(frozen=True)
class ExplorationState:
    """Counts after ``j`` iterations, one entry per degree class."""

    n: int
    degrees: tuple
    N: tuple  # sleeping nodes
    A: tuple  # active clones
    j: int = 0
    t: float = 0.0

    @property
    def L(self):
        """Living (unpaired) clones."""
        return sum(d * x for d, x in zip(self.degrees, self.N)) + sum(self.A)

    @property
    def sleeping(self):
        return sum(self.N)

    @property
    def active(self):
        return sum(self.A)

    @property
    def adopted(self):
        return self.n - self.sleeping


def _class_counts(spec, n, rng):
    if spec.kind == "regular":
        if (n * spec.k) % 2:
            raise ValueError(f"n*k = {n}*{spec.k} is odd")
        return np.array([n], dtype=np.int64)
    seq = spec.realize(n, rng)
    index = np.searchsorted(np.asarray(spec.degrees), seq)
    return np.bincount(index, minlength=len(spec.degrees)).astype(np.int64)


def _pick(weights, u):
    """Index chosen with probability proportional to ``weights`` for ``u ~ U[0,1)``."""
    cum = np.cumsum(weights)
    return int(min(np.searchsorted(cum, u * cum[-1], side="right"), len(cum) - 1))


def initial_state(n, spec, seed=None):
    """Wake one uniformly chosen node; all of its clones become active."""
    rng = as_rng(seed)
    counts = _class_counts(spec, n, rng)
    c = _pick(counts, rng.random())
    N = counts.copy()
    N[c] -= 1
    A = np.zeros(len(counts), dtype=np.int64)
    A[c] = spec.degrees[c]
    return ExplorationState(n, tuple(spec.degrees), tuple(N.tolist()), tuple(A.tolist()))


def wake_probability(state, *, exclude_self=True):
    """Chance that the next partner clone is sleeping.

    The partner is uniform over the ``L - 1`` unpaired clones other than the
    initiating one.  ``exclude_self=False`` gives the large-n form
    ``sum_d d N_d / L`` instead.
    """
    sleeping_clones = sum(d * x for d, x in zip(state.degrees, state.N))
    L = state.L - 1 if exclude_self else state.L
    return sleeping_clones / L


def innovator_probability(N, A, k, beta=1.0, beta_prime=0.0):
    """Chance that the next event is a spontaneous wake-up rather than a pairing.

    Sleeping nodes wake at ``beta_prime`` each; active clones ring at ``beta / k``.
    """
    innov = beta_prime * N
    return innov / (innov + beta * A / k)


def explore_step(state, rng, clock=Clock.EDGE):
    """One pairing iteration.

    The initiating active clone is uniform (``Clock.EDGE``) or weighted by
    ``1/degree`` (``Clock.NODE``, every node contacting at the same rate).
    """
    A = np.array(state.A, dtype=np.int64)
    N = np.array(state.N, dtype=np.int64)
    deg = np.array(state.degrees, dtype=np.int64)
    if A.sum() == 0:
        raise ComponentDeathError(
            f"no active clones at iteration {state.j}", state.j, state.adopted)
    weights = A / deg if Clock(clock) is Clock.NODE else A.astype(float)
    c = _pick(weights, rng.random())
    A[c] -= 1
    living = int((deg * N).sum() + A.sum())
    x = int(rng.random() * living)
    sleeping_cum = np.cumsum(deg * N)
    if x < sleeping_cum[-1]:
        d = int(np.searchsorted(sleeping_cum, x, side="right"))
        N[d] -= 1
        A[d] += deg[d] - 1
    else:
        e = int(np.searchsorted(np.cumsum(A), x - sleeping_cum[-1], side="right"))
        A[e] -= 1
    return replace(state, N=tuple(N.tolist()), A=tuple(A.tolist()), j=state.j + 1)


@dataclass
class ExplorationHistory:
    """Per-event record of an exploration run (row 0 is the initial wake-up)."""

    n: int
    degrees: tuple
    j: np.ndarray
    N: np.ndarray
    A: np.ndarray
    t: np.ndarray
    woke: np.ndarray
    N_by_class: np.ndarray
    first_cycle: int

    @property
    def L(self):
        return self.A + self.N_by_class @ np.asarray(self.degrees)

    def to_csv(self, path):
        rows = ((str(a), str(b), str(c), fmt(d)) for a, b, c, d in
                zip(self.j.tolist(), self.N.tolist(), self.A.tolist(), self.t))
        header = [f"n={self.n} degrees={','.join(map(str, self.degrees))}"]
        write_csv_atomic(path, header, ["j", "N", "A", "t"], rows)


def _weights(spec, params):
    d = np.asarray(spec.degrees, dtype=float)
    return np.array([params.clone_rate(x, spec.mean_degree) for x in d]) * params.p


def _run(n, spec, params, seed, *, count=None, t_max=None, iterations=None, record=False,
         allow_low_degree=False):
    if spec.kind == "regular" and spec.k < 3:
        raise ValueError("coupled exploration needs k >= 3")
    if spec.min_degree < 3:
        if not allow_low_degree:
            raise ValueError("degrees below 3 need allow_low_degree=True (raw exploration)")
        warnings.warn("degree classes below 3: connectivity premises fail; "
                      "results are raw exploration only", stacklevel=3)
    if n < 2:
        raise ValueError("need at least 2 nodes")
    rng = as_rng(seed)
    counts = _class_counts(spec, n, rng)
    init = _pick(counts, rng.random())
    deg = np.asarray(spec.degrees, dtype=np.int64)
    max_iter = int((deg * counts).sum() // 2)
    if iterations is not None:
        max_iter = min(max_iter, int(iterations))
    max_adopt = n if count is None else int(count)
    limit = math.inf if t_max is None else float(t_max)
    status, adopt_times, j, first_cycle, hist = _kernels.explore_run(
        deg, counts, init, _weights(spec, params), float(params.innovation_rate), rng,
        max_adopt, limit, max_iter, bool(record))
    history = None
    if record:
        history = ExplorationHistory(n, tuple(spec.degrees), *hist, first_cycle=first_cycle)
    return status, adopt_times, j, first_cycle, history


def explore(n, spec, seed=None, *, iterations=None, params=None, record=True):
    """Run the exploration for up to ``iterations`` pairings; return its history.

    Stops early if every node is awake or the active clones run out.
    """
    params = params or ModelParams()
    _, _, _, first_cycle, history = _run(n, spec, params, seed, iterations=iterations,
                                         record=True, allow_low_degree=True)
    return history


def coupled_run(n, spec, params=None, seed=None, *, count=None, t_max=None, record=False,
                allow_low_degree=False):
    """Adoption trace of the coupled process on a random graph with degree law ``spec``.

    Node ids in the trace are adoption ranks (nodes are exchangeable).  With
    ``record=True`` the per-event ``(j, N, A, t)`` history is attached as
    ``trace.history``.  Raises :class:`ComponentDeathError` if the active
    clones run out before the stop condition.
    """
    params = params or ModelParams()
    if params.variant is Variant.SIR:
        raise ValueError("SIR is simulated on explicit graphs only (diffuse.simulate)")
    if isinstance(spec, int):
        spec = DegreeSpec.regular(spec)
    status, adopt_times, j, first_cycle, history = _run(
        n, spec, params, seed, count=count, t_max=t_max, record=record,
        allow_low_degree=allow_low_degree)
    if status == _kernels.DEAD:
        raise ComponentDeathError(
            f"exploration died at iteration {j} with {len(adopt_times)} adoptions",
            j, len(adopt_times))
    m = len(adopt_times)
    meta = {"graph": f"exploration[{spec.label()}]", "beta": params.beta,
            "beta_prime": params.beta_prime, "variant": params.variant.value,
            "clock": params.clock.value}
    trace = AdoptionTrace(n, adopt_times, np.arange(m), np.zeros(m, dtype=np.int8), meta)
    trace.history = history
    trace.first_cycle = first_cycle
    trace.iterations = j
    return trace


def coupled_run_innovators(n, k, beta=1.0, beta_prime=0.0, seed=None, *, count=None,
                           t_max=None, record=False):
    """Coupled run where every sleeping node also wakes on its own at rate ``beta_prime``.

    An innovator wake-up activates all ``k`` clones and performs no pairing.
    """
    params = ModelParams(beta=beta, beta_prime=beta_prime, variant=Variant.SI_INNOVATORS)
    return coupled_run(n, DegreeSpec.regular(k), params, seed, count=count, t_max=t_max,
                       record=record)


def fluid_deviation(n, k, seed=None, eps0=0.05):
    """``max_j |N(j)/n - f(j/n)|`` over ``j <= (k/2 - eps0) n`` for one exploration run."""
    if k < 3:
        raise ValueError("k must be >= 3")
    horizon = math.floor((k / 2 - eps0) * n)
    history = explore(n, DegreeSpec.regular(k), seed, iterations=horizon)
    if history.j[-1] < horizon:
        raise ComponentDeathError(
            f"exploration stopped at iteration {history.j[-1]} before {horizon}",
            int(history.j[-1]), int(n - history.N[-1]))
    return float(np.max(np.abs(history.N / n - f_sleep(history.j / n, k))))


def tree_check(history, j=None):
    """True iff the first ``j`` iterations (default: all) never paired two active clones."""
    first = history.first_cycle if isinstance(history, ExplorationHistory) else history
    if j is None:
        return first < 0
    return first < 0 or first >= j
