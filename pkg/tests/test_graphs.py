import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from diffuse.errors import DegreeSequenceError, SamplingError
from diffuse.graphs import (
    DegreeSpec,
    check,
    complete_graph,
    cycle_graph,
    from_edges,
    pair_configuration,
    read_edgelist,
    sample_simple_connected,
    write_edgelist,
)


def test_degree_spec_parse_and_validation():
    assert DegreeSpec.parse("5").k == 5
    mix = DegreeSpec.parse("4:0.5,6:0.5")
    assert mix.degrees == (4, 6) and mix.mean_degree == 5.0
    with pytest.raises(DegreeSequenceError):
        DegreeSpec.distribution([(3, 0.5), (4, 0.4)])
    with pytest.raises(DegreeSequenceError):
        DegreeSpec.distribution([(0, 1.0)])
    with pytest.raises(DegreeSequenceError):
        DegreeSpec.regular(3).realize(5)


def test_distribution_realization_has_even_sum():
    spec = DegreeSpec.parse("3:0.5,4:0.5")
    for seed in range(20):
        assert spec.realize(101, seed).sum() % 2 == 0


def test_pair_configuration_edge_count():
    g = pair_configuration(DegreeSpec.regular(3), 4, seed=1)
    assert g.n_edges == 6
    assert g.is_simple is None


def test_two_node_cubic_pairing_is_not_simple():
    for seed in range(20):
        g = pair_configuration(DegreeSpec.regular(3), 2, seed=seed)
        assert check(g)[0] is False


@given(st.integers(2, 40), st.integers(1, 6), st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_every_clone_paired_once(n, k, seed):
    if n * k % 2:
        n += 1
    g = pair_configuration(DegreeSpec.regular(k), n, seed)
    assert g.n_edges == n * k // 2
    assert np.all(np.bincount(g.edges.ravel(), minlength=n) == k)
    assert g.degrees().sum() == 2 * g.n_edges


def test_simple_rate_is_stable_in_n():
    # the fraction of simple cubic pairings tends to exp(-2) and barely moves with n
    rates = []
    for n in (500, 1000, 2000):
        rng = np.random.default_rng(n)
        simple = sum(check(pair_configuration(DegreeSpec.regular(3), n, rng))[0]
                     for _ in range(10_000))
        rates.append(simple / 10_000)
    assert max(rates) - min(rates) < 0.03
    assert all(abs(r - math.exp(-2)) < 0.03 for r in rates)


def test_simple_cubic_graphs_are_almost_always_connected():
    rng = np.random.default_rng(7)
    simple = disconnected = 0
    while simple < 1000:
        g = pair_configuration(DegreeSpec.regular(3), 1000, rng)
        ok, connected = check(g)
        if ok:
            simple += 1
            disconnected += not connected
    assert disconnected / simple < 0.01


def test_sample_simple_connected_postcondition():
    g = sample_simple_connected(DegreeSpec.regular(3), 10, seed=3)
    assert check(g) == (True, True)
    assert g.is_simple and g.is_connected
    assert set(g.info) == {"rejected_nonsimple", "rejected_disconnected"}


def test_sample_simple_connected_with_mixture():
    g = sample_simple_connected(DegreeSpec.parse("3:0.5,7:0.5"), 500, seed=2)
    assert check(g) == (True, True)
    assert set(np.unique(g.degrees())) <= {3, 7}


def test_two_regular_routes_to_cycle():
    with pytest.warns(UserWarning, match="cycle"):
        g = sample_simple_connected(DegreeSpec.regular(2), 10, seed=0)
    assert g.kind == "cycle" and g.n_edges == 10


def test_sampling_failure_reports_rejections():
    # a single node of degree 4 can only pair with itself
    spec = DegreeSpec.explicit([4, 2, 2])
    with pytest.raises(SamplingError) as info:
        sample_simple_connected(spec, 3, seed=0, max_tries=5)
    assert info.value.nonsimple + info.value.disconnected == 5


def test_complete_graph_is_implicit():
    g = complete_graph(5)
    assert all(g.neighbor_count(v) == 4 for v in range(5))
    assert check(g) == (True, True)
    assert g.degrees().sum() == 5 * 4
    big = complete_graph(1_000_000)
    assert big.neighbor_count(0) == 999_999


def test_cycle_graph():
    tri = cycle_graph(3)
    assert tri.n_edges == 3
    g = cycle_graph(10)
    assert np.all(g.degrees() == 2)
    assert sorted(g.neighbors(0).tolist()) == [1, 9]
    assert check(g) == (True, True)
    with pytest.raises(ValueError):
        cycle_graph(2)


def test_check_examples():
    two_triangles = from_edges(6, [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)])
    assert check(two_triangles) == (True, False)
    loop = from_edges(1, [(0, 0)])
    assert check(loop) == (False, True)
    multi = from_edges(2, [(0, 1), (0, 1)])
    assert check(multi) == (False, True)


def test_edgelist_round_trip(tmp_path):
    g = sample_simple_connected(DegreeSpec.regular(4), 30, seed=5)
    path = tmp_path / "g.txt"
    write_edgelist(g, path)
    assert path.read_text().splitlines()[0] == "# n=30 simple=1 connected=1"
    back = read_edgelist(path)
    assert back.n == 30 and back.is_simple and back.is_connected
    assert np.array_equal(back.edges, g.edges)


def test_degree_histogram_matches_law():
    spec = DegreeSpec.parse("3:0.2,4:0.5,7:0.3")
    n = 20_000
    seq = spec.realize(n, seed=11)
    for d, p in zip(spec.degrees, spec.probs):
        count = np.sum(seq == d)
        assert abs(count - n * p) <= 3 * math.sqrt(n * p * (1 - p))


def test_pairing_uniform_over_labeled_cubic_graphs():
    # 70 labeled simple cubic graphs on 6 nodes; each must be equally likely
    rng = np.random.default_rng(2024)
    spec = DegreeSpec.regular(3)
    counts = Counter()
    for _ in range(100_000):
        g = pair_configuration(spec, 6, rng)
        if check(g)[0]:
            counts[tuple(sorted(map(tuple, np.sort(g.edges, axis=1).tolist())))] += 1
    assert len(counts) == 70
    observed = np.array(list(counts.values()))
    assert stats.chisquare(observed).pvalue > 0.01
    # per-cell band with the family-wise false-alarm rate of a single 3-sigma check
    total = observed.sum()
    p = 1 / 70
    z = stats.norm.isf(stats.norm.sf(3) / 70)
    sigma = math.sqrt(total * p * (1 - p))
    assert np.all(np.abs(observed - total * p) <= z * sigma)
