"""Finite-n statistical checks of the limit theorems.

Each ``check_*`` function runs one experiment with a fixed base seed and
returns a :class:`CheckResult` with the measured quantities and whether the
stated tolerance was met.  ``python -m diffuse.cli experiment --check NAME``
runs them from the command line.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, stats

from . import analytic as an
from .experiments import (
    EnsembleConfig,
    Z95,
    asymmetry_report,
    compare_to_limit,
    early_adoption_study,
    figure3_limit,
    figure3_reproduction,
    ks_test,
    run_ensemble,
    welch_greater,
)
from .exploration import coupled_run, coupled_run_innovators, explore, fluid_deviation, tree_check
from .graphs import DegreeSpec, cycle_graph
from .simulate import simulate

SEED = 20_240_601
ALPHA_GRID = [round(0.05 * i, 2) for i in range(1, 10)]


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    measured: dict = field(default_factory=dict)

    def line(self):
        shown = ", ".join(f"{k}={_short(v)}" for k, v in self.measured.items())
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number:2d} {self.name}: {shown}"


def _short(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_short(x) for x in v) + "]"
    return str(v)


def _genbass_rhs(s, k, beta=1.0):
    return beta * (1 - (1 - s) ** (1 - 2 / k)) * (1 - s)


def check_quadrature(seed=SEED):
    grid = [round(0.05 * i, 2) for i in range(1, 20)]
    worst_ode = worst_explore = 0.0
    for k in (3, 4, 5, 10):
        for i, a in enumerate(grid):
            for g in grid[i + 1:]:
                span = an.theta_tilde(g, k) - an.theta_tilde(a, k)
                q1, _ = integrate.quad(lambda s: 1 / _genbass_rhs(s, k), a, g,
                                       epsabs=1e-12, epsrel=1e-12)
                q2, _ = integrate.quad(lambda x: k / an.g_active(x, k),
                                       an.j_alpha(a, k), an.j_alpha(g, k),
                                       epsabs=1e-12, epsrel=1e-12)
                worst_ode = max(worst_ode, abs(span - q1))
                worst_explore = max(worst_explore, abs(span - q2))
    return CheckResult(1, "analytic self-consistency", worst_ode < 1e-8 and worst_explore < 1e-8,
                       {"max_err_rate_integral": worst_ode, "max_err_exploration_integral":
                        worst_explore})


def check_inverses(seed=SEED):
    s = np.linspace(1e-4, 1 - 1e-4, 1000)
    inv = max(float(np.max(np.abs(an.s_tilde(an.theta_tilde(s, k), k) - s)))
              for k in (3, 4, 5, 10))
    t = np.linspace(-10, 10, 1000)
    h = 1e-5
    res_gen = 0.0
    for k in (3, 4, 5, 10):
        fd = (an.s_tilde(t + h, k) - an.s_tilde(t - h, k)) / (2 * h)
        res_gen = max(res_gen, float(np.max(np.abs(fd - _genbass_rhs(an.s_tilde(t, k), k)))))
    fd = (an.logistic_s(t + h) - an.logistic_s(t - h)) / (2 * h)
    st = an.logistic_s(t)
    res_bass = float(np.max(np.abs(fd - st * (1 - st))))
    ok = inv < 1e-10 and res_gen < 1e-6 and res_bass < 1e-6
    return CheckResult(2, "inverse and ODE residuals", ok,
                       {"inverse_err": inv, "genbass_residual": res_gen,
                        "bass_residual": res_bass})


def _pair_deltas():
    out = []
    for a in ALPHA_GRID:
        out += [[a, 0.5], [0.5, round(1 - a, 2)]]
    return out


@functools.lru_cache(maxsize=None)
def complete_ensemble(threads=None, seed=SEED):
    config = EnsembleConfig("complete", 100_000, replicas=50, seed=seed + 3,
                            deltas=[[0.25, 0.75]] + _pair_deltas())
    return run_ensemble(config, threads)


@functools.lru_cache(maxsize=None)
def regular5_ensemble(threads=None, seed=SEED):
    config = EnsembleConfig("random", 20_000, degrees="5", replicas=50, seed=seed + 4,
                            deltas=[[0.25, 0.75], [0.01, 0.99]], curve=True)
    return run_ensemble(config, threads)


def check_complete(threads=None, seed=SEED):
    st = complete_ensemble(threads, seed).stat("delta_0.25_0.75")
    target = 2 * math.log(3)
    rel = abs(st["mean"] - target) / target
    return CheckResult(3, "complete graph delta", rel <= 0.02,
                       {"mean": st["mean"], "target": target, "rel_err": rel})


def check_regular5(threads=None, seed=SEED):
    summary = regular5_ensemble(threads, seed)
    st = summary.stat("delta_0.25_0.75")
    oracle = an.theta_tilde(0.75, 5) - an.theta_tilde(0.25, 5)
    rel = abs(st["mean"] - oracle) / oracle
    rel_stated = abs(st["mean"] - 3.2169) / 3.2169
    report = compare_to_limit(summary, an.limit_curve("genbass", summary.curve_t, k=5))
    ok = rel <= 0.03 and rel_stated <= 0.03 and report["sup"] < 0.02
    return CheckResult(4, "random 5-regular delta and curve", ok,
                       {"mean": st["mean"], "oracle": oracle, "rel_err": rel,
                        "rel_err_vs_3.2169": rel_stated, "curve_sup": report["sup"]})


def check_cross_simulator(threads=None, seed=SEED):
    base = dict(n=10_000, degrees="3", replicas=200, deltas=[[0.25, 0.75]])
    graph = run_ensemble(EnsembleConfig("random", seed=seed + 51, **base), threads)
    coupled = run_ensemble(EnsembleConfig("exploration", seed=seed + 52, **base), threads)
    res = ks_test(graph.values("delta_0.25_0.75"), coupled.values("delta_0.25_0.75"))
    return CheckResult(5, "exploration vs explicit graphs (KS)", res["agree"],
                       {"ks_stat": res["statistic"], "pvalue": res["pvalue"],
                        "graph_failures": len(graph.failures),
                        "coupled_failures": len(coupled.failures)})


def check_fluid(seed=SEED, seeds=100, n=1_000_000):
    devs = [fluid_deviation(n, 5, seed + 600 + i) for i in range(seeds)]
    good = sum(d <= 0.01 for d in devs)
    return CheckResult(6, "fluid limit of sleeping nodes", good >= 99,
                       {"seeds_within_0.01": good, "max_dev": max(devs)})


def check_mean_field(threads=None, seed=SEED):
    s = np.linspace(0.011, 0.99, 500)
    ordered = all(
        np.all(an.mean_field_theta(s, k) - an.mean_field_theta(0.01, k)
               < an.theta_tilde(s, k) - an.theta_tilde(0.01, k))
        for k in (3, 5, 10))
    st = regular5_ensemble(threads, seed).stat("delta_0.01_0.99")
    mf = an.mean_field_theta(0.99, 5) - an.mean_field_theta(0.01, 5)
    gb = an.theta_tilde(0.99, 5) - an.theta_tilde(0.01, 5)
    rel = abs(st["mean"] - gb) / gb
    ok = ordered and st["mean"] > mf and rel <= 0.05
    return CheckResult(7, "mean-field underestimates", ok,
                       {"analytic_ordering": ordered, "mean": st["mean"], "mean_field": mf,
                        "genbass": gb, "rel_err": rel})


def check_asymmetry(threads=None, seed=SEED):
    alphas = np.linspace(0.01, 0.49, 49)
    analytic_ok = all(
        an.theta_tilde(0.5, k) - an.theta_tilde(a, k) > an.theta_tilde(1 - a, k)
        - an.theta_tilde(0.5, k) for k in (3, 5, 10) for a in alphas)
    config = EnsembleConfig("exploration", 20_000, degrees="5", replicas=200, seed=seed + 8,
                            deltas=_pair_deltas())
    reg = asymmetry_report(run_ensemble(config, threads), ALPHA_GRID)
    regular_ok = all(row["ordered"] for row in reg)
    # equality over the whole grid is judged with a simultaneous (Bonferroni) 95% band
    z_sim = stats.norm.ppf(1 - 0.025 / len(ALPHA_GRID))
    comp = asymmetry_report(complete_ensemble(threads, seed), ALPHA_GRID)
    complete_ok = all(abs(row["diff"]) <= row["ci"] / Z95 * z_sim for row in comp)
    return CheckResult(8, "second half faster", analytic_ok and regular_ok and complete_ok,
                       {"analytic": analytic_ok, "regular5_ordered": regular_ok,
                        "min_regular5_z": min(r["diff"] / (r["ci"] / Z95) for r in reg),
                        "complete_equal": complete_ok,
                        "max_complete_z": max(abs(r["diff"]) / (r["ci"] / Z95) for r in comp)})


def check_cycle(seed=SEED, seeds=20, n=100_000):
    g = cycle_graph(n)
    ratios = [simulate(g, seed=seed + 900 + i).delta(0.25, 0.75) / n for i in range(seeds)]
    worst = max(abs(r - 0.5) / 0.5 for r in ratios)
    return CheckResult(9, "cycle delta / n", worst <= 0.02,
                       {"min": min(ratios), "max": max(ratios), "worst_rel_err": worst})


def check_early(threads=None, seed=SEED):
    grid = (1_000, 10_000, 100_000)
    comp = early_adoption_study(grid, 3, "complete", replicas=400, seed=seed + 101,
                                threads=threads)
    reg = early_adoption_study(grid, 3, "regular", k=3, replicas=400, seed=seed + 102,
                               threads=threads)
    within = all(row["within_ci"] for row in comp + reg)
    ratios = [r["predicted"] / c["predicted"] for r, c in zip(reg, comp)]
    trend = all(b > a for a, b in zip(ratios, ratios[1:])) and all(r < 3 for r in ratios)
    return CheckResult(10, "early adoption sums", within and trend,
                       {"complete_gap_over_ci": [abs(r["mean"] - r["predicted"]) / r["ci"]
                                                 for r in comp],
                        "regular_gap_over_ci": [abs(r["mean"] - r["predicted"]) / r["ci"]
                                                for r in reg],
                        "predicted_ratio": ratios})


def check_tree(seed=SEED, seeds=1000, n=100_000):
    j = math.ceil(3 * math.log(n))
    spec = DegreeSpec.regular(3)
    trees = sum(tree_check(explore(n, spec, seed + 1100 + i, iterations=j), j)
                for i in range(seeds))
    return CheckResult(11, "locally tree-like", trees >= 0.95 * seeds,
                       {"tree_fraction": trees / seeds, "j": j})


def check_figure3(threads=None, seed=SEED, n=50_000, replicas=50):
    fig = figure3_reproduction(n, replicas, seed + 12, threads)
    half = {k: float(v["time_to_0.5"].mean()) for k, v in fig.items()}
    spread = max(half.values()) / min(half.values()) - 1
    w1 = welch_greater(fig["3-7"]["time_to_0.95"], fig["4-6"]["time_to_0.95"])
    w2 = welch_greater(fig["4-6"]["time_to_0.95"], fig["5-regular"]["time_to_0.95"])
    summary = fig["5-regular"]["summary"]
    sup = compare_to_limit(summary, figure3_limit("5-regular", summary.curve_t))["sup"]
    ok = spread <= 0.05 and w1["greater"] and w2["greater"] and sup < 0.02
    return CheckResult(12, "three degree families", ok,
                       {"half_time_spread": spread,
                        "t95": [float(fig[k]["time_to_0.95"].mean()) for k in fig],
                        "p_37_gt_46": w1["pvalue"], "p_46_gt_5": w2["pvalue"],
                        "regular_sup": sup})


def check_innovators(seed=SEED, seeds=50, n=10_000):
    same = all(
        np.array_equal(coupled_run_innovators(n, 5, 1.0, 0.0, seed + 1300 + i).adoption_times,
                       coupled_run(n, 5, seed=seed + 1300 + i).adoption_times)
        for i in range(10))
    half = n // 2
    means = [float(np.mean([coupled_run_innovators(n, 5, 1.0, bp, seed + 1350 + i,
                                                   count=half).T(half)
                            for i in range(seeds)]))
             for bp in (0.0, 0.01, 0.1)]
    ok = same and means[0] > means[1] > means[2]
    return CheckResult(13, "innovators", ok, {"seed_identical": same, "mean_T_half": means})


CHECKS = {
    "quadrature": check_quadrature,
    "inverses": check_inverses,
    "complete": check_complete,
    "regular5": check_regular5,
    "cross": check_cross_simulator,
    "fluid": check_fluid,
    "meanfield": check_mean_field,
    "asymmetry": check_asymmetry,
    "cycle": check_cycle,
    "early": check_early,
    "tree": check_tree,
    "figure3": check_figure3,
    "innovators": check_innovators,
}
THREADED = {"complete", "regular5", "cross", "meanfield", "asymmetry", "early", "figure3"}


def run_check(name, threads=None, seed=SEED):
    fn = CHECKS[name]
    return fn(threads, seed) if name in THREADED else fn(seed)
