"""Exact continuous-time simulation of the adoption process on a graph.

Two engines produce identically distributed sample paths:

``"boundary"``
    Gillespie race over the adopter->non-adopter slots only.  A contact along
    any other slot cannot change the state, so dropping it from the race is an
    exact thinning; the cost is O(degree) bookkeeping per adoption.
``"contact"``
    Every contact is simulated, wasted ones included.  Used for complete
    graphs (neighbours are drawn arithmetically, no adjacency stored) and as an
    independent cross-check of the boundary engine.
"""
from __future__ import annotations

import math

import numpy as np

from . import _kernels
from .analytic import complete_rate
from .errors import UnreachableNodesError
from .graphs import as_rng, check
from .model import Clock, ModelParams, Variant
from .trace import AdoptionTrace

__all__ = ["simulate", "simulate_complete_exact"]

_NO_LIMIT = np.iinfo(np.int64).max


def _meta(graph, params, method):
    return {
        "graph": graph.kind,
        "beta": params.beta,
        "p": params.p,
        "beta_prime": params.beta_prime,
        "variant": params.variant.value,
        "clock": params.clock.value,
        "engine": method,
    }


def _check_reachable(graph, params, count, t_max):
    if params.variant is not Variant.SI or count is not None or t_max is not None:
        return
    connected = graph.is_connected
    if connected is None:
        connected = check(graph)[1]
    if not connected:
        sizes = graph.component_sizes()
        raise UnreachableNodesError(
            f"graph is disconnected (component sizes {sizes[:10]}); "
            "SI cannot reach every node", sizes)


def _boundary_inputs(graph, params):
    degrees = graph.degrees()
    if params.clock is Clock.NODE:
        classes, node_class = np.unique(degrees, return_inverse=True)
        weight = np.array([params.clone_rate(d, None) * params.p if d > 0 else 0.0
                           for d in classes])
    else:
        classes = np.array([0])
        node_class = np.zeros(graph.n, dtype=np.int64)
        weight = np.array([params.clone_rate(None, degrees.mean()) * params.p])
    capacity = np.bincount(node_class, weights=degrees, minlength=len(classes))
    class_start = np.concatenate([[0], np.cumsum(capacity)[:-1]]).astype(np.int64)
    return node_class.astype(np.int64), weight.astype(np.float64), class_start


def simulate(graph, params=None, seed=None, *, count=None, t_max=None, initial=None,
             method="auto"):
    """Run the adoption process once.

    Parameters
    ----------
    graph : Graph
    params : ModelParams, optional
        Defaults to ``ModelParams()`` (SI, beta=1, p=1, node clocks).
    seed : int, SeedSequence or Generator
    count : int, optional
        Stop at the ``count``-th adoption.
    t_max : float, optional
        Stop before the first event later than ``t_max``.
    initial : int, optional
        First adopter; uniform over nodes when omitted.
    method : {"auto", "boundary", "contact"}

    With neither ``count`` nor ``t_max`` the run continues until no event can
    change the state (every node adopted for SI on a connected graph).
    """
    params = params or ModelParams()
    n = graph.n
    if n < 2:
        raise ValueError("need at least 2 nodes")
    if count is not None and not 1 <= count <= n:
        raise ValueError(f"count must lie in [1, {n}], got {count}")
    _check_reachable(graph, params, count, t_max)
    rng = as_rng(seed)
    if initial is None:
        initial = int(rng.integers(n))
    elif not 0 <= initial < n:
        raise ValueError(f"initial node {initial} out of range")
    max_adopt = n if count is None else int(count)
    limit = math.inf if t_max is None else float(t_max)

    if method == "auto":
        method = "contact" if graph.kind == "complete" else "boundary"
    if method == "boundary":
        if graph.kind == "complete":
            raise ValueError("boundary engine needs an explicit or cycle graph")
        node_class, weight, class_start = _boundary_inputs(graph, params)
        times, nodes, kinds = _kernels.boundary_run(
            graph.offsets, graph.nbrs, graph.reverse, node_class, weight, class_start,
            params.innovation_rate, params.removal_rate, rng, initial, max_adopt, limit)
    elif method == "contact":
        complete = graph.kind == "complete"
        degrees = np.full(1, n - 1) if complete else graph.degrees()
        if params.clock is Clock.NODE:
            node_rate = params.beta
        else:
            if degrees.min() != degrees.max():
                raise ValueError("contact engine with edge clocks needs a regular graph")
            node_rate = params.clone_rate(None, float(degrees[0])) * degrees[0]
        if complete:
            offsets = nbrs = np.zeros(1, dtype=np.int64)
        else:
            offsets, nbrs = graph.offsets, graph.nbrs
        times, nodes, kinds = _kernels.contact_run(
            n, complete, offsets, nbrs, float(node_rate), params.p,
            params.innovation_rate, params.removal_rate, rng, initial, max_adopt, limit)
    else:
        raise ValueError(f"unknown method {method!r}")
    return AdoptionTrace(n, times, nodes, kinds, _meta(graph, params, method))


def simulate_complete_exact(n, beta=1.0, seed=None, *, count=None, t_max=None):
    """Jump chain of SI on the complete graph.

    The ``i -> i+1`` holding time is exponential with rate
    ``beta * i * (n - i) / (n - 1)``; adopter identities are a uniform random
    order of the nodes, which is exact because nodes are exchangeable.
    """
    if n < 2:
        raise ValueError("need at least 2 nodes")
    if not beta > 0:
        raise ValueError(f"beta must be > 0, got {beta}")
    m = n if count is None else int(count)
    if not 1 <= m <= n:
        raise ValueError(f"count must lie in [1, {n}], got {count}")
    rng = as_rng(seed)
    nodes = rng.permutation(n)[:m]
    rates = complete_rate(np.arange(1, m), n, beta)
    times = np.concatenate([[0.0], np.cumsum(rng.standard_exponential(m - 1) / rates)])
    if t_max is not None:
        keep = int(np.searchsorted(times, t_max, side="right"))
        times, nodes = times[:keep], nodes[:keep]
    meta = {"graph": "complete", "beta": beta, "engine": "jump-chain"}
    return AdoptionTrace(n, times, nodes, np.zeros(len(times), dtype=np.int8), meta)
