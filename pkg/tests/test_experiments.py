import json
import math

import numpy as np
import pytest

from diffuse import experiments
from diffuse.analytic import expected_delta_complete, limit_curve, timing_curve
from diffuse.errors import ComponentDeathError, EnsembleError
from diffuse.experiments import (
    EnsembleConfig,
    asymmetry_report,
    compare_to_limit,
    early_adoption_study,
    ks_test,
    run_ensemble,
    welch_greater,
)

ALPHAS = [0.05, 0.15, 0.25, 0.35, 0.45]


def test_config_validation():
    with pytest.raises(ValueError):
        EnsembleConfig(family="torus", n=10)
    with pytest.raises(ValueError):
        EnsembleConfig(family="random", n=10)
    with pytest.raises(ValueError):
        EnsembleConfig(family="complete", n=10, deltas=[[0.8, 0.2]])
    with pytest.raises(ValueError):
        EnsembleConfig(family="complete", n=10, replicas=0)


def test_config_json_round_trip(tmp_path):
    cfg = EnsembleConfig(family="exploration", n=1000, degrees="4:0.5,6:0.5",
                         times_to=[0.5], counts=[10], curve=True, seed=3)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg.to_dict()))
    assert EnsembleConfig.from_json(path) == cfg
    with pytest.raises(ValueError, match="unknown"):
        EnsembleConfig.from_dict({"family": "complete", "n": 10, "replica": 5})


def test_scalar_names_and_single_replica():
    cfg = EnsembleConfig(family="complete", n=500, replicas=1, seed=1,
                         times_to=[0.5], counts=[21], curve=True)
    s = run_ensemble(cfg)
    assert set(s.scalars) == {"delta_0.25_0.75", "time_to_0.5", "T_21"}
    st = s.stat("delta_0.25_0.75")
    assert math.isnan(st["ci"]) and st["replicas"] == 1
    # one replica: the quantile band collapses onto the mean curve
    assert np.array_equal(s.curve_lo, s.curve_mean)
    assert np.array_equal(s.curve_hi, s.curve_mean)
    assert s.curve_t[0] == 0.0


def test_same_seed_same_summary_any_thread_count():
    cfg = EnsembleConfig(family="exploration", n=2000, degrees="5", replicas=12, seed=4)
    a = run_ensemble(cfg, threads=1)
    b = run_ensemble(cfg, threads=4)
    c = run_ensemble(cfg, threads=1)
    assert a.to_dict() == b.to_dict() == c.to_dict()
    d = run_ensemble(EnsembleConfig(family="exploration", n=2000, degrees="5",
                                    replicas=12, seed=5))
    assert a.to_dict()["scalars"] != d.to_dict()["scalars"]


def test_summary_outputs(tmp_path):
    cfg = EnsembleConfig(family="cycle", n=300, replicas=5, seed=2, curve=True, curve_step=1.0)
    s = run_ensemble(cfg)
    s.to_json(tmp_path / "out.json")
    data = json.loads((tmp_path / "out.json").read_text())
    assert data["config"]["family"] == "cycle"
    assert len(data["scalars"]["delta_0.25_0.75"]) == 5
    s.curve_to_csv(tmp_path / "curve.csv")
    lines = (tmp_path / "curve.csv").read_text().splitlines()
    assert "t,s_mean,s_lo,s_hi" in lines


def test_failure_policy(monkeypatch):
    real = experiments._run_replica

    def flaky(bad):
        def run(config, r, graph=None):
            if r in bad:
                raise ComponentDeathError("died", 0, 1)
            return real(config, r, graph)
        return run

    cfg = EnsembleConfig(family="complete", n=200, replicas=20, seed=0)
    monkeypatch.setattr(experiments, "_run_replica", flaky({3, 7}))
    s = run_ensemble(cfg)
    assert [r for r, _ in s.failures] == [3, 7]
    assert s.n_ok == 18 and len(s.values("delta_0.25_0.75")) == 18
    assert np.isnan(s.scalars["delta_0.25_0.75"][3])
    assert s.to_dict()["scalars"]["delta_0.25_0.75"][7] is None
    monkeypatch.setattr(experiments, "_run_replica", flaky({1, 2, 3}))
    with pytest.raises(EnsembleError):
        run_ensemble(cfg)


def test_ci_coverage():
    n = 1000
    truth = expected_delta_complete(n, 0.25, 0.75)
    covered = 0
    for seed in range(100):
        cfg = EnsembleConfig(family="complete", n=n, engine="jump", replicas=50, seed=seed)
        st = run_ensemble(cfg).stat("delta_0.25_0.75")
        covered += abs(st["mean"] - truth) <= st["ci"]
    assert 90 <= covered <= 99


def test_spread_shrinks_with_n_and_replicas():
    stds = [run_ensemble(EnsembleConfig(family="complete", n=n, engine="jump", replicas=100,
                                        seed=1)).stat("delta_0.25_0.75")["std"]
            for n in (1000, 10_000, 100_000)]
    assert stds[0] > stds[1] > stds[2]
    small = run_ensemble(EnsembleConfig(family="complete", n=1000, engine="jump",
                                        replicas=200, seed=2)).stat("delta_0.25_0.75")
    large = run_ensemble(EnsembleConfig(family="complete", n=1000, engine="jump",
                                        replicas=400, seed=2)).stat("delta_0.25_0.75")
    assert large["ci"] / small["ci"] == pytest.approx(1 / math.sqrt(2), rel=0.15)


def test_compare_to_limit():
    t = np.linspace(0, 10, 101)
    c = limit_curve("genbass", t, k=5)
    report = compare_to_limit(c, c)
    assert report["sup"] == 0 and report["limit_ahead"] == 0
    cfg = EnsembleConfig(family="exploration", n=20_000, degrees="5", replicas=20, seed=6,
                         curve=True, curve_step=0.1)
    s = run_ensemble(cfg)
    bass = compare_to_limit(s, limit_curve("bass", s.curve_t))
    assert bass["sup"] > 0.05 and bass["limit_ahead"] > 0
    assert bass["z"] is not None
    own = compare_to_limit(s, limit_curve("genbass", s.curve_t, k=5))
    assert own["sup"] < 0.02


def test_asymmetry_report_on_curves():
    grid = np.linspace(0.01, 0.99, 981)
    for row in asymmetry_report(timing_curve("bass", grid), ALPHAS):
        assert row["first"] == pytest.approx(row["second"], abs=1e-10)
    row = asymmetry_report(timing_curve("genbass", grid, k=5), [0.25])[0]
    assert row["first"] == pytest.approx(1.678302, abs=1e-6)
    assert row["second"] == pytest.approx(1.537596, abs=1e-6)
    # an adoption curve is inverted before measuring
    t = np.linspace(-8, 8, 4001)
    inv = asymmetry_report(limit_curve("bass", t, anchor=0.5), [0.25])[0]
    assert inv["first"] == pytest.approx(inv["second"], abs=1e-3)
    with pytest.raises(ValueError):
        asymmetry_report(timing_curve("bass", np.linspace(0.3, 0.7, 5)), [0.1])


def test_asymmetry_report_on_ensemble():
    deltas = [[a, 0.5] for a in (0.1, 0.25)] + [[0.5, 1 - a] for a in (0.1, 0.25)]
    cfg = EnsembleConfig(family="exploration", n=20_000, degrees="5", replicas=40, seed=8,
                         deltas=deltas)
    rows = asymmetry_report(run_ensemble(cfg), [0.1, 0.25])
    assert all(r["ordered"] for r in rows)
    assert all(r["diff"] > 0 for r in rows)


def test_statistical_helpers():
    rng = np.random.default_rng(0)
    x = rng.normal(0, 1, 500)
    y = rng.normal(0, 1, 500)
    assert ks_test(x, y)["agree"]
    assert not ks_test(x, y + 1)["agree"]
    assert welch_greater(x + 1, y)["greater"]
    assert not welch_greater(x, y)["greater"]


def test_early_adoption_small():
    rows = early_adoption_study([1000], C=3, replicas=400, seed=5)
    (row,) = rows
    assert row["m"] == math.ceil(3 * math.log(1000))
    assert row["within_ci"]
