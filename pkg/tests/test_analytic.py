import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, optimize

from diffuse import analytic as an
from diffuse.errors import ODEStepError
from diffuse.graphs import DegreeSpec

unit = st.floats(1e-4, 1 - 1e-4)


def rate_integral(a, b, k, beta=1.0):
    # oracle: time to go from s=a to s=b under ds/dt = beta [1-(1-s)^(1-2/k)] (1-s)
    return integrate.quad(lambda s: 1 / (beta * (1 - (1 - s) ** (1 - 2 / k)) * (1 - s)),
                          a, b, epsabs=1e-12, epsrel=1e-12)[0]


def test_theta_values():
    assert an.theta(0.5) == 0
    assert an.theta(0.75) - an.theta(0.25) == pytest.approx(2 * math.log(3), abs=1e-12)
    assert an.theta(0.99) - an.theta(0.01) == pytest.approx(9.19024, abs=1e-5)
    with pytest.raises(ValueError):
        an.theta(1.0)


@given(unit, st.floats(0.1, 10))
def test_theta_symmetry(s, beta):
    assert an.theta(s, beta) == pytest.approx(-an.theta(1 - s, beta), abs=1e-9)


def test_logistic_values():
    assert an.logistic_s(0.0) == 0.5
    assert an.logistic_s(math.log(99)) == pytest.approx(0.99, abs=1e-12)
    h = 1e-6
    fd = (an.logistic_s(h, 2.0) - an.logistic_s(-h, 2.0)) / (2 * h)
    assert fd == pytest.approx(2.0 * 0.25, abs=1e-6)


@given(unit, st.floats(0.2, 5))
def test_logistic_inverts_theta(s, beta):
    assert an.logistic_s(an.theta(s, beta), beta) == pytest.approx(s, abs=1e-12)


def test_theta_tilde_values():
    assert an.theta_tilde(0.5, 5) == 0
    assert an.theta_tilde(0.5, 3, 2.5) == pytest.approx(0, abs=1e-15)
    assert an.theta_tilde(0.25, 5) == pytest.approx(-1.678302, abs=1e-6)
    # quadrature gives 1.537596, not the 1.5386 sometimes quoted
    assert an.theta_tilde(0.75, 5) == pytest.approx(1.537596, abs=1e-6)
    assert an.theta_tilde(0.75, 5) == pytest.approx(rate_integral(0.5, 0.75, 5), abs=1e-10)
    assert an.theta_tilde(0.99, 5) - an.theta_tilde(0.01, 5) == pytest.approx(13.010, abs=1e-3)
    with pytest.raises(ValueError):
        an.theta_tilde(0.0, 5)
    with pytest.raises(ValueError):
        an.theta_tilde(0.3, 2)


@pytest.mark.parametrize("k", [3, 4, 5, 10])
def test_theta_tilde_matches_quadrature(k):
    for a, b in [(0.05, 0.5), (0.25, 0.75), (0.01, 0.99), (0.6, 0.95)]:
        span = an.theta_tilde(b, k) - an.theta_tilde(a, k)
        assert span == pytest.approx(rate_integral(a, b, k), abs=1e-8)
        # time measured in exploration iterations: dt = k dx / (beta g(x))
        q = integrate.quad(lambda x: k / an.g_active(x, k), an.j_alpha(a, k), an.j_alpha(b, k),
                           epsabs=1e-12, epsrel=1e-12)[0]
        assert span == pytest.approx(q, abs=1e-8)


@given(unit, st.integers(3, 50), st.floats(0.2, 5))
@settings(max_examples=200)
def test_s_tilde_inverts_theta_tilde(s, k, beta):
    assert an.s_tilde(an.theta_tilde(s, k, beta), k, beta) == pytest.approx(s, abs=1e-10)


def test_s_tilde_slope_at_origin():
    h = 1e-6
    for k in (3, 5, 8):
        fd = (an.s_tilde(h, k) - an.s_tilde(-h, k)) / (2 * h)
        assert an.s_tilde(0, k) == pytest.approx(0.5, abs=1e-15)
        assert fd == pytest.approx((1 - 2 ** -(1 - 2 / k)) * 0.5, abs=1e-6)


def test_s_tilde_solves_its_ode():
    t = np.linspace(-15, 15, 1000)
    h = 1e-5
    for k in (3, 5, 10):
        fd = (an.s_tilde(t + h, k) - an.s_tilde(t - h, k)) / (2 * h)
        assert np.max(np.abs(fd - an.genbass_rhs(an.s_tilde(t, k), k))) < 1e-6


def test_mean_field():
    s = np.linspace(0.05, 0.95, 19)
    assert np.allclose(an.mean_field_theta(s, 5, 1.3), an.theta(s, 1.3 * 4 / 5), atol=1e-12)
    span = an.mean_field_theta(0.99, 5) - an.mean_field_theta(0.01, 5)
    assert span == pytest.approx(1.25 * 2 * math.log(99), abs=1e-12)
    assert span == pytest.approx(11.488, abs=1e-3)
    assert span < an.theta_tilde(0.99, 5) - an.theta_tilde(0.01, 5)
    assert an.mean_field_rate(3, 7, 5) == pytest.approx(1.92)
    assert an.mean_field_rate(2, 7, 5) == an.mean_field_rate(5, 7, 5)
    n = 10**7
    ratio = an.mean_field_rate(n - 1, n, 5) / an.complete_rate(n - 1, n)
    assert ratio == pytest.approx(4 / 5, rel=1e-6)
    with pytest.raises(ValueError):
        an.mean_field_rate(0, 7, 5)


@pytest.mark.parametrize("k", [3, 5, 10])
def test_mean_field_underestimates(k):
    s = np.linspace(0.02, 0.99, 200)
    mf = an.mean_field_theta(s, k) - an.mean_field_theta(0.01, k)
    gb = an.theta_tilde(s, k) - an.theta_tilde(0.01, k)
    assert np.all(mf < gb)


def test_complete_rate():
    assert an.complete_rate(2, 5) == pytest.approx(1.5)
    assert an.complete_rate(1, 2) == 1.0


def test_fluid_functions():
    assert an.f_sleep(0, 5) == 1 and an.g_active(0, 5) == 0
    assert an.f_sleep(1, 5) == pytest.approx(0.6**2.5, abs=1e-15)
    assert an.f_sleep(1, 5) == pytest.approx(0.27885, abs=1e-5)
    ja = an.j_alpha(0.5, 5)
    assert ja == pytest.approx(0.60536, abs=1e-5)
    two_forms = 5 * 0.5 * (0.5 ** (2 / 5 - 1) - 1)
    assert an.g_active(ja, 5) == pytest.approx(two_forms, abs=1e-10)
    assert two_forms == pytest.approx(1.28929, abs=1e-5)


@given(st.floats(0.001, 0.999), st.integers(3, 30))
def test_j_alpha_inverts_f(alpha, k):
    assert an.f_sleep(an.j_alpha(alpha, k), k) == pytest.approx(1 - alpha, abs=1e-12)


def test_j_alpha_matches_bisection():
    for k in (3, 5, 10):
        for alpha in (0.1, 0.5, 0.9):
            root = optimize.bisect(lambda x: an.f_sleep(x, k) - (1 - alpha), 0, k / 2,
                                   xtol=1e-12)
            assert an.j_alpha(alpha, k) == pytest.approx(root, abs=1e-11)


def test_asymmetry_of_timing():
    for k in (3, 5, 10):
        for a in np.linspace(0.01, 0.49, 49):
            first = an.theta_tilde(0.5, k) - an.theta_tilde(a, k)
            second = an.theta_tilde(1 - a, k) - an.theta_tilde(0.5, k)
            assert first > second
            assert an.theta(0.5) - an.theta(a) == pytest.approx(an.theta(1 - a) - an.theta(0.5),
                                                                abs=1e-12)


def test_expected_delta_complete():
    assert an.expected_delta_complete(10_000, 0.25, 0.75) == pytest.approx(2.1972, abs=1e-3)
    assert an.expected_delta_complete(2, 0.5, 1.0) == 1.0
    vals = [an.expected_delta_complete(1000, 0.25, g) for g in (0.3, 0.5, 0.7, 0.9)]
    assert vals == sorted(vals)
    with pytest.raises(ValueError):
        an.expected_delta_complete(100, 0.5, 0.25)


def test_expected_early_time_regular():
    # gaps k / (beta ((k-2) i + 2)) for i = 1..m-1 adopters on a tree
    assert an.expected_early_time(10**6, 5, 3) == pytest.approx(3 * (1/3 + 1/4 + 1/5 + 1/6))
    assert an.expected_early_time(10**6, 5, 3) == pytest.approx(2.85)
    # summing 1/(k + i(k-2)) over i = 1..m instead shifts the window by one gap
    shifted = 3 * sum(1 / (3 + i) for i in range(1, 6))
    assert shifted == pytest.approx(2.65357, abs=1e-5)
    assert an.expected_early_time(10**6, 1, 3) == 0.0
    assert an.expected_early_time(10**6, 2, 5, beta=2.0) == pytest.approx(0.5)


def test_expected_early_time_complete():
    n = 10_000
    m = math.ceil(3 * math.log(n))
    direct = sum((n - 1) / (i * (n - i)) for i in range(1, m))
    assert an.expected_early_time(n, m) == pytest.approx(direct, rel=1e-14)
    with pytest.warns(UserWarning):
        an.expected_early_time(100, 50)


def test_early_time_growth_constants():
    # T(3 log n) grows like (1/beta) log log n on complete graphs, k/(beta(k-2)) log log n
    # on random k-regular graphs
    def slope(k):
        a, b = 10**8, 10**16
        ta = an.expected_early_time(a, math.ceil(3 * math.log(a)), k)
        tb = an.expected_early_time(b, math.ceil(3 * math.log(b)), k)
        return (tb - ta) / (math.log(math.log(b)) - math.log(math.log(a)))
    assert slope(None) == pytest.approx(1.0, rel=0.05)
    assert slope(5) == pytest.approx(5 / 3, rel=0.05)


def test_cycle_limit():
    assert an.cycle_limit(0.25, 0.75) == 0.5
    assert an.cycle_limit(0.4, 0.4) == 0
    assert an.cycle_limit(0.25, 0.75, 4.0) == 0.125


def test_large_k_limit():
    assert an.large_k_limit_check(0.5, 10**4) < 1e-4
    assert an.large_k_limit_check(1e-12, 100) < 1e-12
    d1 = an.large_k_limit_check(0.5, 1000)
    d2 = an.large_k_limit_check(0.5, 2000)
    assert d1 / d2 == pytest.approx(2, rel=0.2)


def test_ode_regular_matches_closed_form():
    t = np.linspace(0, 20, 401)
    curve = an.ode_generalized(DegreeSpec.regular(5), t_grid=t)
    exact = an.limit_curve("genbass", t, k=5)
    assert np.max(np.abs(curve.y - exact.y)) < 1e-6


def test_ode_edge_clock_regular():
    t = np.linspace(0, 10, 101)
    curve = an.ode_generalized(DegreeSpec.regular(4), clock="edge", t_grid=t)
    assert np.max(np.abs(curve.y - an.limit_curve("genbass", t, k=4).y)) < 1e-6


def test_sleeping_profile_mixture():
    spec = DegreeSpec.parse("4:0.5,6:0.5")
    x = np.linspace(0, 2.4, 25)
    s = an.adopted_fraction(spec, x)
    expected = 1 - 0.5 * (1 - 2 * x / 5) ** 2 - 0.5 * (1 - 2 * x / 5) ** 3
    assert np.allclose(s, expected, atol=1e-14)
    assert an.adopted_fraction(spec, 0.0) == 0.0
    assert np.sum(an.sleeping_profile(spec, 0.0)) == pytest.approx(1.0)


def test_ode_mixture_times_are_ordered():
    t = np.linspace(0, 20, 2001)
    times = {}
    for name, text in [("5", "5"), ("4-6", "4:0.5,6:0.5"), ("3-7", "3:0.5,7:0.5")]:
        c = an.ode_generalized(DegreeSpec.parse(text), t_grid=t)
        times[name] = (np.interp(0.5, c.y, c.x), np.interp(0.95, c.y, c.x))
    halves = [v[0] for v in times.values()]
    assert max(halves) / min(halves) - 1 < 0.05
    assert times["3-7"][1] > times["4-6"][1] > times["5"][1]


def test_ode_rejects_low_degree():
    with pytest.raises(ValueError):
        an.ode_generalized(DegreeSpec.parse("2:0.5,4:0.5"), t_grid=[0, 1])


def test_ode_step_check_can_fail():
    with pytest.raises(ODEStepError):
        an.ode_generalized(DegreeSpec.parse("3:0.5,30:0.5"), t_grid=np.linspace(0, 30, 7),
                           steps=4)


def test_timing_and_limit_curves():
    tc = an.timing_curve("genbass", np.arange(0.01, 1.0, 0.01), k=5)
    assert tc(0.75) == pytest.approx(1.537596, abs=1e-6)
    lc = an.limit_curve("bass", np.linspace(0, 5, 11))
    assert lc.y[0] == pytest.approx(0.01)
    mf = an.limit_curve("meanfield", np.linspace(0, 5, 11), k=5)
    assert mf.y[0] == pytest.approx(0.01)
    assert np.all(mf.y[1:] < lc.y[1:])
