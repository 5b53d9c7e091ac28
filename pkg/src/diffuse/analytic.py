"""Closed-form limits, finite-n expectations and the general-degree ODE.

Timing functions map an adopter fraction ``s`` to a time and are centred so
that ``s = 1/2`` sits at ``t = 0``:

* complete graph: ``theta(s) = log(s / (1 - s)) / beta``, inverse logistic;
* random k-regular graph: ``theta_tilde``, inverse ``s_tilde``, solving
  ``ds/dt = beta * (1 - (1 - s)**(1 - 2/k)) * (1 - s)``.

Written as a difference of two logs, both log arguments of ``theta_tilde``
are negative for every ``k >= 3``, so it is evaluated as the log of their
ratio ``((1 - s)**(2/k - 1) - 1) / (2**(1 - 2/k) - 1)``.
"""
from __future__ import annotations

import math
import warnings

import numpy as np
from scipy.optimize import brentq
from scipy.special import expit

from .curves import CurveSeries
from .errors import ODEStepError
from .model import Clock

__all__ = [
    "theta",
    "logistic_s",
    "theta_tilde",
    "s_tilde",
    "mean_field_theta",
    "mean_field_rate",
    "complete_rate",
    "bass_rhs",
    "genbass_rhs",
    "f_sleep",
    "g_active",
    "j_alpha",
    "sleeping_profile",
    "adopted_fraction",
    "ode_generalized",
    "expected_delta_complete",
    "expected_early_time",
    "cycle_limit",
    "large_k_limit_check",
    "timing_curve",
    "limit_curve",
]


def _open_unit(s, name="s"):
    s = np.asarray(s, dtype=float)
    if np.any(~((s > 0) & (s < 1))):
        raise ValueError(f"{name} must lie in (0, 1)")
    return s


def _check_k(k):
    if int(k) != k or k < 3:
        raise ValueError(f"k must be an integer >= 3, got {k}")
    return int(k)


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


# -- complete graph ---------------------------------------------------------

def theta(s, beta=1.0):
    s = _open_unit(s)
    return _scalar(np.log(s / (1 - s)) / beta)


def logistic_s(t, beta=1.0):
    return _scalar(expit(beta * np.asarray(t, dtype=float)))


def complete_rate(i, n, beta=1.0):
    """Rate of the ``i -> i+1`` adoption on ``K_n``: ``beta i (n-i) / (n-1)``."""
    i = np.asarray(i, dtype=float)
    return _scalar(beta * i * (n - i) / (n - 1))


def bass_rhs(s, beta=1.0):
    s = np.asarray(s, dtype=float)
    return _scalar(beta * s * (1 - s))


# -- random regular graph ---------------------------------------------------

def theta_tilde(s, k, beta=1.0):
    k = _check_k(k)
    s = _open_unit(s)
    num = np.expm1((2.0 / k - 1.0) * np.log1p(-s))
    den = math.expm1((1.0 - 2.0 / k) * math.log(2.0))
    return _scalar(k / (beta * (k - 2)) * np.log(num / den))


def s_tilde(t, k, beta=1.0):
    k = _check_k(k)
    t = np.asarray(t, dtype=float)
    log_c = math.log(math.expm1((1.0 - 2.0 / k) * math.log(2.0)))
    z = np.logaddexp(0.0, log_c + beta * (k - 2) * t / k)
    return _scalar(-np.expm1(-k / (k - 2) * z))


def genbass_rhs(s, k, beta=1.0):
    s = np.asarray(s, dtype=float)
    return _scalar(beta * (1 - (1 - s) ** (1 - 2.0 / k)) * (1 - s))


def mean_field_theta(s, k, beta=1.0):
    """Logistic timing with the contact rate scaled by ``(k-1)/k``."""
    s = _open_unit(s)
    return _scalar(k / ((k - 1) * beta) * np.log(s / (1 - s)))


def mean_field_rate(i, n, k, beta=1.0):
    i = np.asarray(i, dtype=float)
    if np.any((i < 1) | (i > n - 1)):
        raise ValueError(f"i must lie in [1, n-1] = [1, {n - 1}]")
    return _scalar(beta * (k - 1) / k * i * (n - i) / (n - 2))


def f_sleep(x, k):
    """Fluid limit of the sleeping-node fraction after ``x n`` iterations."""
    x = np.asarray(x, dtype=float)
    if np.any((x < 0) | (x > k / 2)):
        raise ValueError(f"x must lie in [0, k/2] = [0, {k / 2}]")
    return _scalar((1 - 2 * x / k) ** (k / 2))


def g_active(x, k):
    """Fluid limit of the active-clone count over ``n``."""
    return _scalar(k * (1 - np.asarray(f_sleep(x, k))) - 2 * np.asarray(x, dtype=float))


def j_alpha(alpha, k):
    """Iterations (over ``n``) until a fraction ``alpha`` of nodes is awake."""
    alpha = _open_unit(alpha, "alpha")
    return _scalar(k / 2 * -np.expm1(2.0 / k * np.log1p(-alpha)))


# -- general degree distributions --------------------------------------------

def sleeping_profile(spec, x):
    """``nu_d(x) = p_d (1 - 2x / dbar)**(d/2)`` for each degree class (rows)."""
    x = np.asarray(x, dtype=float)
    dbar = spec.mean_degree
    d = np.asarray(spec.degrees, dtype=float)[:, None]
    p = np.asarray(spec.probs)[:, None]
    base = np.clip(1 - 2 * np.atleast_1d(x) / dbar, 0.0, None)[None, :]
    out = p * base ** (d / 2)
    return out[:, 0] if x.ndim == 0 else out


def adopted_fraction(spec, x):
    """``s(x) = 1 - sum_d nu_d(x)``: awake fraction after ``x n`` iterations."""
    return _scalar(1 - sleeping_profile(spec, x).sum(axis=0))


def _clone_weights(spec, beta, clock, edge_rate):
    d = np.asarray(spec.degrees, dtype=float)
    if Clock(clock) is Clock.NODE:
        return beta / d
    r = beta / spec.mean_degree if edge_rate is None else edge_rate
    return np.full(len(d), float(r))


def _initial_mix(spec, w):
    """Composition of the active clones while the awake set is vanishingly small."""
    d = np.asarray(spec.degrees, dtype=float)
    p = np.asarray(spec.probs)
    b = d * (d - 1) * p / spec.mean_degree
    growth = b.sum() - 1
    if len(d) == 1:
        return np.ones(1), growth
    total = lambda W: (b / (growth + w / W)).sum() - 1.0  # noqa: E731
    W = brentq(total, 1e-12 * w.min(), 1e12 * w.max(), xtol=1e-15, rtol=1e-15)
    c = b / (growth + w / W)
    return c / c.sum(), growth


def _make_rhs(spec, w):
    d = np.asarray(spec.degrees, dtype=float)
    p = np.asarray(spec.probs)
    dbar = spec.mean_degree

    def da_dx(x, a):
        ell = dbar - 2 * x
        nu = p * (ell / dbar) ** (d / 2)
        wa = w * a
        q = wa / wa.sum()
        return -q + (d - 1) * d * nu / ell - a / ell

    return da_dx


def _rk4(fun, y, t0, t1, steps):
    h = (t1 - t0) / steps
    t = t0
    for _ in range(steps):
        k1 = fun(t, y)
        k2 = fun(t + h / 2, y + h / 2 * k1)
        k3 = fun(t + h / 2, y + h / 2 * k2)
        k4 = fun(t + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
    return y


def _integrate_grid(fun, y0, grid, h):
    """Values at each time in ``grid`` (sorted, starting the march at 0)."""
    out = np.empty((len(grid), len(y0)))
    for sign, idx in ((1, np.flatnonzero(grid >= 0)), (-1, np.flatnonzero(grid < 0)[::-1])):
        y, t = y0.copy(), 0.0
        for i in idx:
            span = grid[i] - t
            steps = max(1, math.ceil(abs(span) / h))
            y = _rk4(fun, y, t, grid[i], steps) if span else y
            t = grid[i]
            out[i] = y
    return out


def ode_generalized(spec, beta=1.0, clock=Clock.NODE, s0=0.01, t_grid=None, *,
                    edge_rate=None, steps=10_000, tol=1e-9):
    """Adoption curve on a random graph with the given degree law, as ``s(t)``.

    The sleeping fractions have the closed form of :func:`sleeping_profile`;
    the active-clone fractions ``a_d`` follow, per iteration ``x``,

        da_d/dx = -q_d + d (d-1) nu_d / (dbar - 2x) - a_d / (dbar - 2x),

    where ``q_d`` is the chance that the contacting clone has degree ``d``
    (proportional to its per-clone rate times ``a_d``), and iterations happen
    at rate ``sum_d w_d a_d`` per node.  The curve is anchored so that
    ``s(0) = s0``.  RK4 with fixed steps is used twice (step ``h`` and
    ``h/2``); the half-step result is returned and :class:`ODEStepError` is
    raised if the two disagree by more than ``tol``.
    """
    if spec.min_degree < 3:
        raise ValueError("ode_generalized needs minimum degree >= 3")
    if not 0 < s0 < 1:
        raise ValueError("s0 must lie in (0, 1)")
    if t_grid is None:
        t_grid = np.linspace(0.0, 20.0, 401)
    grid = np.asarray(t_grid, dtype=float)
    if len(grid) > 1 and np.any(np.diff(grid) <= 0):
        raise ValueError("t_grid must be strictly increasing")
    w = _clone_weights(spec, beta, clock, edge_rate)
    da_dx = _make_rhs(spec, w)
    dbar = spec.mean_degree

    x_anchor = brentq(lambda x: adopted_fraction(spec, x) - s0, 0.0, dbar / 2,
                      xtol=1e-15, rtol=1e-15)
    mix, growth = _initial_mix(spec, w)
    x0 = x_anchor * 1e-7
    a_anchor = _rk4(da_dx, mix * growth * x0, x0, x_anchor, steps)

    def dy_dt(t, y):
        x, a = y[0], y[1:]
        rate = float(w @ a)
        return rate * np.concatenate([[1.0], da_dx(x, a)])

    y0 = np.concatenate([[x_anchor], a_anchor])
    span = max(abs(grid[0]), abs(grid[-1]), 1e-9)
    h = span / steps
    coarse = _integrate_grid(dy_dt, y0, grid, h)
    fine = _integrate_grid(dy_dt, y0, grid, h / 2)
    if not np.all(np.isfinite(fine)) or np.any(fine[:, 0] > dbar / 2):
        raise ODEStepError("integration left the domain; refine the grid or steps")
    s_coarse = adopted_fraction(spec, coarse[:, 0])
    s_fine = adopted_fraction(spec, fine[:, 0])
    err = float(np.max(np.abs(s_coarse - s_fine))) if len(grid) else 0.0
    if err > tol:
        raise ODEStepError(f"half-step disagreement {err:.3g} exceeds {tol:g}")
    meta = {"model": "ode", "degrees": spec.label(), "beta": beta,
            "clock": Clock(clock).value, "anchor": s0}
    return CurveSeries(grid, np.atleast_1d(s_fine), "t", "s", meta)


# -- finite-n expectations ----------------------------------------------------

def _count(fraction, n):
    return max(1, math.ceil(round(fraction * n, 9)))


def expected_delta_complete(n, alpha, gamma, beta=1.0):
    """``E[T(ceil(gamma n)) - T(ceil(alpha n))]`` on ``K_n``: a sum of ``1/rate_i``."""
    if not 0 < alpha <= gamma <= 1:
        raise ValueError(f"need 0 < alpha <= gamma <= 1, got {alpha}, {gamma}")
    lo, hi = _count(alpha, n), _count(gamma, n)
    if hi > n:
        raise ValueError("gamma * n exceeds n")
    i = np.arange(lo, hi)
    return math.fsum(1.0 / np.asarray(complete_rate(i, n, beta), dtype=float).ravel())


def expected_early_time(n, m, k=None, beta=1.0):
    """Expected time of the ``m``-th adoption (``T(1) = 0``) while the awake set is a tree.

    Complete graph (``k=None``): ``sum_{i<m} (n-1) / (beta i (n-i))``.
    Random k-regular graph: with ``i`` adopters forming a tree, ``(k-2) i + 2``
    edges leave the set, each firing at ``beta/k``, so the sum is
    ``sum_{i<m} k / (beta ((k-2) i + 2))``.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if m >= math.sqrt(n):
        warnings.warn(f"m={m} >= sqrt(n); the tree approximation is not justified",
                      stacklevel=2)
    i = np.arange(1, m, dtype=float)
    if k is None:
        if m > n:
            raise ValueError("m exceeds n")
        return math.fsum(1.0 / np.asarray(complete_rate(i, n, beta), dtype=float).ravel())
    return math.fsum(k / (beta * ((k - 2) * i + 2)))


def cycle_limit(alpha, gamma, beta=1.0):
    """Limit of ``Delta(alpha n, gamma n) / n`` on the cycle."""
    if not 0 < alpha <= gamma < 1:
        raise ValueError(f"need 0 < alpha <= gamma < 1, got {alpha}, {gamma}")
    return (gamma - alpha) / beta


def large_k_limit_check(s, k):
    """``|1 - (1-s)**(1-2/k) - s|``: distance of the regular-graph factor from ``s``."""
    s = _open_unit(s)
    return _scalar(np.abs((1 - s) * np.expm1(-2.0 / k * np.log1p(-s))))


# -- curve builders ------------------------------------------------------------

_TIMING = {
    "bass": lambda s, k, beta: theta(s, beta),
    "genbass": lambda s, k, beta: theta_tilde(s, k, beta),
    "meanfield": lambda s, k, beta: mean_field_theta(s, k, beta),
}


def timing_curve(model, s_grid, k=None, beta=1.0, anchor=0.5):
    """``(s, t)`` table of a timing function shifted so that ``t(anchor) = 0``."""
    if model not in _TIMING:
        raise ValueError(f"model must be one of {sorted(_TIMING)}")
    fn = _TIMING[model]
    s_grid = _open_unit(s_grid)
    t = np.atleast_1d(fn(s_grid, k, beta)) - fn(anchor, k, beta)
    meta = {"model": model, "k": k, "beta": beta, "anchor": anchor}
    return CurveSeries(np.atleast_1d(s_grid), t, "s", "t", meta)


def limit_curve(model, t_grid, k=None, beta=1.0, anchor=0.01, spec=None, clock=Clock.NODE):
    """``(t, s)`` adoption curve with ``s(0) = anchor``."""
    t_grid = np.asarray(t_grid, dtype=float)
    if model == "bass":
        s = logistic_s(t_grid + theta(anchor, beta), beta)
    elif model == "genbass":
        s = s_tilde(t_grid + theta_tilde(anchor, k, beta), k, beta)
    elif model == "meanfield":
        rate = beta * (k - 1) / k
        s = logistic_s(t_grid + theta(anchor, rate), rate)
    elif model == "ode":
        return ode_generalized(spec, beta, clock, anchor, t_grid)
    else:
        raise ValueError(f"unknown model {model!r}")
    meta = {"model": model, "k": k, "beta": beta, "anchor": anchor}
    return CurveSeries(t_grid, np.atleast_1d(s), "t", "s", meta)
