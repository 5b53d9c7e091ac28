"""Seeded Monte Carlo ensembles and comparisons against the limit curves.

An ensemble is a pure function of its :class:`EnsembleConfig`: replica ``r``
draws everything (graph, initial adopter, clocks) from
``replica_rng(config.seed, r)``, so results do not depend on how replicas are
scheduled over threads.
"""
from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from .analytic import expected_early_time, limit_curve
from .curves import CurveSeries, fmt, write_csv_atomic
from .errors import DiffuseError, EnsembleError
from .exploration import coupled_run
from .graphs import DegreeSpec, complete_graph, cycle_graph, sample_simple_connected
from .model import Clock, ModelParams, Variant, replica_rng
from .simulate import simulate, simulate_complete_exact
from .trace import count_for

__all__ = [
    "EnsembleConfig",
    "EnsembleSummary",
    "run_ensemble",
    "compare_to_limit",
    "asymmetry_report",
    "early_adoption_study",
    "figure3_reproduction",
    "ks_test",
    "welch_greater",
    "FAMILIES",
]

FAMILIES = ("complete", "cycle", "random", "exploration")
_ENGINES = ("auto", "boundary", "contact", "jump")
FAILURE_LIMIT = 0.10
Z95 = 1.959963984540054


@dataclass
class EnsembleConfig:
    """Everything that determines an ensemble.

    ``family`` is ``complete``, ``cycle``, ``random`` (a fresh simple connected
    graph per replica) or ``exploration`` (graph-free coupled process).
    ``deltas`` lists ``(alpha, gamma)`` pairs, ``times_to`` adoption fractions
    and ``counts`` adopter counts ``x`` for which ``T(x)`` is recorded.
    """

    family: str
    n: int
    degrees: str | None = None
    beta: float = 1.0
    p: float = 1.0
    beta_prime: float = 0.0
    variant: str = "si"
    clock: str = "node"
    edge_rate: float | None = None
    engine: str = "auto"
    replicas: int = 50
    seed: int = 0
    deltas: list = field(default_factory=lambda: [[0.25, 0.75]])
    times_to: list = field(default_factory=list)
    counts: list = field(default_factory=list)
    curve: bool = False
    curve_step: float = 0.05
    anchor: float = 0.01

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}, got {self.family!r}")
        if self.engine not in _ENGINES:
            raise ValueError(f"engine must be one of {_ENGINES}, got {self.engine!r}")
        if self.family in ("random", "exploration") and not self.degrees:
            raise ValueError(f"family {self.family!r} needs degrees")
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        if self.replicas < 1:
            raise ValueError(f"replicas must be >= 1, got {self.replicas}")
        if not self.curve_step > 0:
            raise ValueError("curve_step must be > 0")
        self.deltas = [[float(a), float(g)] for a, g in self.deltas]
        for a, g in self.deltas:
            if not 0 < a <= g < 1:
                raise ValueError(f"delta pair needs 0 < alpha <= gamma < 1, got ({a}, {g})")
        for s in self.times_to:
            if not 0 < s <= 1:
                raise ValueError(f"times_to fractions must lie in (0, 1], got {s}")
        for m in self.counts:
            if not 1 <= m <= self.n:
                raise ValueError(f"counts must lie in [1, n], got {m}")
        self.params()

    def params(self):
        return ModelParams(beta=self.beta, p=self.p, beta_prime=self.beta_prime,
                           variant=Variant(self.variant), clock=Clock(self.clock),
                           edge_rate=self.edge_rate)

    def spec(self):
        return DegreeSpec.parse(self.degrees) if self.degrees else None

    def stop_count(self):
        """Smallest adopter count that still yields every requested measurement."""
        if self.curve or Variant(self.variant) is Variant.SIR:
            return None
        need = [count_for(g, self.n) for _, g in self.deltas]
        need += [min(self.n, math.ceil(s * self.n)) for s in self.times_to]
        need += [int(m) for m in self.counts]
        return max(need) if need else None

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def _scalar_name(kind, *values):
    return kind + "_" + "_".join(f"{v:g}" for v in values)


def _run_replica(config, r, graph=None):
    rng = replica_rng(config.seed, r)
    params = config.params()
    count = config.stop_count()
    if config.family == "exploration":
        return coupled_run(config.n, config.spec(), params, rng, count=count)
    if config.family == "complete" and config.engine == "jump":
        return simulate_complete_exact(config.n, params.beta * params.p, rng, count=count)
    if graph is None:
        graph = sample_simple_connected(config.spec(), config.n, rng)
    return simulate(graph, params, rng, count=count, method=config.engine)


def _measure(config, trace):
    out = {}
    for a, g in config.deltas:
        out[_scalar_name("delta", a, g)] = trace.delta(a, g)
    for s in config.times_to:
        out[_scalar_name("time_to", s)] = trace.time_to_fraction(s)
    for m in config.counts:
        out[_scalar_name("T", m)] = trace.T(int(m))
    curve = None
    if config.curve:
        t0 = trace.time_to_fraction(config.anchor)
        curve = (trace.adoption_times - t0, np.arange(1, trace.n_adopted + 1) / trace.n)
    return out, curve


@dataclass
class EnsembleSummary:
    """Per-replica scalars, their statistics and the anchored mean curve.

    ``scalars[name]`` holds one value per replica (NaN where the replica
    failed).  The CI half-width is ``1.96 * std / sqrt(R)`` over the ``R``
    successful replicas; it is NaN when ``R < 2``.
    """

    config: EnsembleConfig
    scalars: dict
    failures: list
    curve_t: np.ndarray | None = None
    curve_mean: np.ndarray | None = None
    curve_std: np.ndarray | None = None
    curve_lo: np.ndarray | None = None
    curve_hi: np.ndarray | None = None

    @property
    def n_ok(self):
        return self.config.replicas - len(self.failures)

    def values(self, name):
        v = self.scalars[name]
        return v[~np.isnan(v)]

    def stat(self, name):
        v = self.values(name)
        mean = float(v.mean())
        if len(v) < 2:
            return {"mean": mean, "std": math.nan, "ci": math.nan, "replicas": len(v)}
        std = float(v.std(ddof=1))
        return {"mean": mean, "std": std, "ci": Z95 * std / math.sqrt(len(v)),
                "replicas": len(v)}

    def mean_curve(self):
        return CurveSeries(self.curve_t, self.curve_mean, "t", "s",
                           {"anchor": self.config.anchor, "replicas": self.n_ok})

    def to_dict(self):
        return {
            "config": self.config.to_dict(),
            "failures": [{"replica": r, "error": msg} for r, msg in self.failures],
            "stats": {k: {a: _json_num(b) for a, b in self.stat(k).items()}
                      for k in self.scalars},
            "scalars": {k: [_json_num(x) for x in v.tolist()]
                        for k, v in self.scalars.items()},
        }

    def to_json(self, path):
        tmp = f"{path}.tmp"
        with open(tmp, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")
        os.replace(tmp, path)

    def curve_to_csv(self, path):
        c = self.config
        header = [f"family={c.family} n={c.n} degrees={c.degrees} beta={c.beta} "
                  f"clock={c.clock} replicas={self.n_ok} seed={c.seed} anchor={c.anchor}",
                  "s_mean is the pointwise mean; s_lo/s_hi are 2.5%/97.5% quantiles"]
        rows = ((fmt(t), fmt(m), fmt(lo), fmt(hi)) for t, m, lo, hi in
                zip(self.curve_t, self.curve_mean, self.curve_lo, self.curve_hi))
        write_csv_atomic(path, header, ["t", "s_mean", "s_lo", "s_hi"], rows)


def _json_num(x):
    return None if isinstance(x, float) and math.isnan(x) else x


def _shared_graph(config):
    if config.family == "complete" and config.engine != "jump":
        return complete_graph(config.n)
    if config.family == "cycle":
        return cycle_graph(config.n)
    return None


def run_ensemble(config, threads=None):
    """Run ``config.replicas`` independent replicas and summarize them.

    Replicas that raise a package error (component death, sampling failure,
    ...) are recorded as failures; more than 10% failures raises
    :class:`EnsembleError`.
    """
    graph = _shared_graph(config)
    threads = threads or os.cpu_count() or 1

    def one(r):
        try:
            return r, _measure(config, _run_replica(config, r, graph)), None
        except DiffuseError as exc:
            return r, None, f"{type(exc).__name__}: {exc}"

    if threads == 1:
        results = [one(r) for r in range(config.replicas)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, range(config.replicas)))
    results.sort(key=lambda item: item[0])
    failures = [(r, err) for r, _, err in results if err is not None]
    if len(failures) > FAILURE_LIMIT * config.replicas:
        raise EnsembleError(f"{len(failures)} of {config.replicas} replicas failed", failures)
    ok = [res for _, res, err in results if err is None]
    names = list(ok[0][0]) if ok else []
    scalars = {}
    for name in names:
        col = np.full(config.replicas, np.nan)
        for r, res, err in results:
            if err is None:
                col[r] = res[0][name]
        scalars[name] = col
    summary = EnsembleSummary(config, scalars, failures)
    if config.curve and ok:
        _aggregate_curves(summary, [res[1] for res in ok])
    return summary


def _aggregate_curves(summary, curves):
    step = summary.config.curve_step
    t_end = min(float(t[-1]) for t, _ in curves)
    grid = np.arange(0.0, t_end + step / 2, step)
    grid = grid[grid <= t_end]
    rows = []
    for times, s in curves:
        idx = np.searchsorted(times, grid, side="right")
        rows.append(np.where(idx > 0, s[np.maximum(idx - 1, 0)], 0.0))
    rows = np.array(rows)
    summary.curve_t = grid
    summary.curve_mean = rows.mean(axis=0)
    summary.curve_std = rows.std(axis=0, ddof=1) if len(rows) > 1 else np.zeros(len(grid))
    summary.curve_lo = np.quantile(rows, 0.025, axis=0)
    summary.curve_hi = np.quantile(rows, 0.975, axis=0)


def compare_to_limit(summary, curve):
    """Sup-norm gap between an ensemble mean curve and a limit curve on their overlap.

    ``summary`` may be an :class:`EnsembleSummary` or a ``(t, s)``
    :class:`CurveSeries`.  The report holds ``sup`` (max absolute gap),
    ``limit_ahead`` (max of limit minus empirical, positive when the limit
    adopts faster) and pointwise ``z`` scores when replica spreads are known.
    """
    if isinstance(summary, EnsembleSummary):
        emp = summary.mean_curve()
        spread = summary.curve_std / math.sqrt(max(summary.n_ok, 1))
    else:
        emp, spread = summary, None
    lo = max(emp.x[0], curve.x[0])
    hi = min(emp.x[-1], curve.x[-1])
    if lo > hi:
        raise ValueError("curves have disjoint supports")
    mask = (emp.x >= lo) & (emp.x <= hi)
    t = emp.x[mask]
    gap = curve(t) - emp.y[mask]
    report = {"t": t, "gap": gap, "sup": float(np.max(np.abs(gap))),
              "limit_ahead": float(np.max(gap)), "z": None}
    if spread is not None:
        with np.errstate(divide="ignore", invalid="ignore"):
            report["z"] = np.where(spread[mask] > 0, -gap / spread[mask], np.nan)
    return report


def asymmetry_report(source, alpha_grid):
    """First-half and second-half durations ``(t(1/2) - t(a), t(1-a) - t(1/2))`` per ``a``.

    ``source`` is a timing :class:`CurveSeries` (``s -> t``), an adoption
    curve (``t -> s``, inverted by interpolation) or an
    :class:`EnsembleSummary` recording ``delta_a_0.5`` and ``delta_0.5_1-a``.
    For ensembles each row also carries the paired difference, its 95% CI and
    ``ordered`` (the CI lies above zero).
    """
    rows = []
    if isinstance(source, EnsembleSummary):
        for a in alpha_grid:
            first = source.values(_scalar_name("delta", a, 0.5))
            second = source.values(_scalar_name("delta", 0.5, 1 - a))
            diff = first - second
            half = Z95 * diff.std(ddof=1) / math.sqrt(len(diff))
            rows.append({"alpha": a, "first": float(first.mean()),
                         "second": float(second.mean()), "diff": float(diff.mean()),
                         "ci": float(half), "ordered": bool(diff.mean() - half > 0)})
        return rows
    timing = source if source.x_name == "s" else source.swapped()
    for a in alpha_grid:
        if not 0 < a < 0.5 or a < timing.x[0] or 1 - a > timing.x[-1]:
            raise ValueError(f"curve does not cover [{a}, {1 - a}]")
        mid = float(timing(0.5))
        rows.append({"alpha": a, "first": mid - float(timing(a)),
                     "second": float(timing(1 - a)) - mid})
    return rows


def ks_test(x, y, level=0.01):
    """Two-sample Kolmogorov-Smirnov test; ``agree`` when ``p > level``."""
    res = stats.ks_2samp(x, y)
    return {"statistic": float(res.statistic), "pvalue": float(res.pvalue),
            "agree": bool(res.pvalue > level)}


def welch_greater(x, y, level=0.01):
    """One-sided Welch t-test of ``mean(x) > mean(y)``."""
    res = stats.ttest_ind(x, y, equal_var=False, alternative="greater")
    return {"statistic": float(res.statistic), "pvalue": float(res.pvalue),
            "greater": bool(res.pvalue < level)}


def early_adoption_study(n_grid, C=3.0, family="complete", k=3, beta=1.0, replicas=400,
                         seed=0, threads=None):
    """Mean time of the ``ceil(C log n)``-th adoption against the exact finite sum.

    ``complete`` simulates every contact on the complete graph; ``regular``
    runs the coupled exploration for random k-regular graphs.  Each ``n`` uses
    its own seed derived from ``(seed, n)`` so the rows are independent.
    """
    table = []
    for n in n_grid:
        sub_seed = int(np.random.SeedSequence([seed, n]).generate_state(1)[0])
        m = math.ceil(C * math.log(n))
        if m > math.sqrt(n):
            raise ValueError(f"C log n = {m} exceeds sqrt(n) for n={n}")
        if family == "complete":
            config = EnsembleConfig("complete", n, beta=beta, replicas=replicas, seed=sub_seed,
                                    deltas=[], counts=[m], engine="contact")
            predicted = expected_early_time(n, m, None, beta)
        elif family == "regular":
            config = EnsembleConfig("exploration", n, degrees=str(k), beta=beta,
                                    replicas=replicas, seed=sub_seed, deltas=[], counts=[m])
            predicted = expected_early_time(n, m, k, beta)
        else:
            raise ValueError(f"family must be 'complete' or 'regular', got {family!r}")
        st = run_ensemble(config, threads).stat(_scalar_name("T", m))
        table.append({"n": n, "m": m, "mean": st["mean"], "std": st["std"], "ci": st["ci"],
                      "predicted": predicted,
                      "within_ci": abs(st["mean"] - predicted) <= st["ci"]})
    return table


FIGURE3_FAMILIES = {"5-regular": "5", "4-6": "4:0.5,6:0.5", "3-7": "3:0.5,7:0.5"}


def figure3_reproduction(n=50_000, replicas=50, seed=0, threads=None):
    """Anchored mean curves for 5-regular, 4/6 and 3/7 random graphs.

    Runs the coupled exploration with node clocks (every node contacts at
    rate 1 whatever its degree) and records the times to ``s = 0.5, 0.95``
    after the ``s = 0.01`` anchor.
    """
    if n < 10_000:
        raise ValueError("the three-family study needs n >= 10^4")
    out = {}
    for name, degrees in FIGURE3_FAMILIES.items():
        config = EnsembleConfig("exploration", n, degrees=degrees, replicas=replicas,
                                seed=seed, deltas=[[0.01, 0.5], [0.01, 0.95]],
                                times_to=[0.01, 0.5, 0.95], curve=True)
        summary = run_ensemble(config, threads)
        anchor = summary.values("time_to_0.01")
        out[name] = {
            "summary": summary,
            "time_to_0.5": summary.values("time_to_0.5") - anchor,
            "time_to_0.95": summary.values("time_to_0.95") - anchor,
        }
    return out


def figure3_limit(name, t_grid):
    """Limit curve for one of the three degree families (closed form for the regular one)."""
    if name == "5-regular":
        return limit_curve("genbass", t_grid, k=5)
    return limit_curve("ode", t_grid, spec=DegreeSpec.parse(FIGURE3_FAMILIES[name]))
