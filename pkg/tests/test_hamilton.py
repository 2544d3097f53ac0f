import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from oracles import brute_hamilton_via_permutations, hamilton_path_exists, robust_violation_exists
from tiler.errors import Disconnected, NotFound, PreconditionError, TooLong
from tiler.graph import Graph, gen_clique_union, gen_complete_bipartite, gen_regular, to_mask
from tiler.hamilton import (
    bipartite_hamilton_via_matching,
    hamilton_path,
    is_hamilton_path,
    robust_expander_check,
    robust_neighborhood,
    robust_short_path,
)


def complete(n):
    return Graph(n, itertools.combinations(range(n), 2))


def cycle(n):
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def random_graph(n, p, seed):
    rng = random.Random(seed)
    return Graph(n, [e for e in itertools.combinations(range(n), 2) if rng.random() < p])


def random_bipartite(t, p, seed):
    rng = random.Random(seed)
    return Graph(2 * t, [(a, t + b) for a in range(t) for b in range(t) if rng.random() < p])


def test_robust_neighborhood_examples():
    assert robust_neighborhood(complete(10), range(4), 0.2) == set(range(10))
    assert robust_neighborhood(complete(10), [], 0.1) == set()
    assert robust_neighborhood(cycle(8), [0, 2, 4, 6], 2 / 8) == {1, 3, 5, 7}


@given(st.integers(2, 12), st.integers(0, 10**6), st.data())
def test_robust_neighborhood_monotone(n, seed, data):
    g = random_graph(n, 0.5, seed)
    small = data.draw(st.sets(st.integers(0, n - 1)))
    big = small | data.draw(st.sets(st.integers(0, n - 1)))
    nu = data.draw(st.floats(0.01, 0.9))
    assert robust_neighborhood(g, small, nu) <= robust_neighborhood(g, big, nu)
    assert robust_neighborhood(g, small, nu * 1.5) <= robust_neighborhood(g, small, nu)


def test_robust_expander_examples():
    assert robust_expander_check(complete(12), 0.1, 0.25) is None
    bridged = gen_clique_union(2, 8).with_edges([(7, 8)])
    s = robust_expander_check(bridged, 0.1, 0.25)
    assert s is not None
    # one clique is a violator: its robust neighbourhood adds at most the bridge end
    clique = set(range(8))
    assert len(robust_neighborhood(bridged, clique, 0.1)) < len(clique) + 0.1 * 16
    assert robust_expander_check(cycle(12), 0.1, 0.25) is not None


def test_robust_expander_returns_genuine_violators():
    for seed in range(20):
        g = random_graph(14, 0.4, seed)
        s = robust_expander_check(g, 0.15, 0.2)
        assert (s is not None) == robust_violation_exists(g, 0.15, 0.2)
        if s is not None:
            assert 0.2 * 14 <= len(s) <= 0.8 * 14
            assert len(robust_neighborhood(g, s, 0.15)) < len(s) + 0.15 * 14


def test_robust_expander_sampling_above_exhaustive_range():
    assert robust_expander_check(complete(30), 0.1, 0.25) is None
    assert robust_expander_check(gen_clique_union(2, 15), 0.1, 0.25, samples=20000) is not None


def test_hamilton_path_examples():
    for x, y in itertools.permutations(range(4), 2):
        assert is_hamilton_path(complete(4), hamilton_path(complete(4), x, y), range(4))
    k33 = gen_complete_bipartite(3, 3)
    assert is_hamilton_path(k33, hamilton_path(k33, 0, 3), range(6))
    with pytest.raises(PreconditionError):
        hamilton_path(k33, 1, 3, avoid=[0])
    with pytest.raises(PreconditionError):
        hamilton_path(k33, 0, 1)


def test_hamilton_path_avoid_set():
    g = complete(6)
    path = hamilton_path(g, 0, 5, avoid=[2, 3])
    assert is_hamilton_path(g, path, [0, 1, 4, 5]) and path[0] == 0 and path[-1] == 5


@pytest.mark.parametrize("seed", range(60))
def test_hamilton_path_matches_subset_dp(seed):
    n = 4 + seed % 6
    g = random_graph(n, 0.45, seed)
    x, y = 0, n - 1
    expected = hamilton_path_exists(g, x, y, range(n))
    assert expected == brute_hamilton_via_permutations(g, x, y)
    try:
        path = hamilton_path(g, x, y)
    except PreconditionError:
        # bipartite imbalance or wrong sides already rule out a path
        assert not expected
    except NotFound as exc:
        assert exc.exhausted and not expected
    else:
        assert expected and is_hamilton_path(g, path, range(n)) and (path[0], path[-1]) == (x, y)


def test_hamilton_exhausted_and_budget_are_distinguished():
    g = gen_clique_union(2, 8).with_edges([(0, 8)])
    # both ends in the first clique: the second clique can never be entered and left
    with pytest.raises(NotFound) as info:
        hamilton_path(g, 1, 2)
    assert info.value.exhausted
    with pytest.raises(NotFound) as info:
        hamilton_path(complete(12).without_edges([(0, v) for v in range(2, 12)]), 1, 5, budget=1)
    assert not info.value.exhausted


def test_matching_reduction_examples():
    k33 = gen_complete_bipartite(3, 3)
    path = bipartite_hamilton_via_matching(k33, 0, 3)
    assert is_hamilton_path(k33, path, range(6)) and (path[0], path[-1]) == (0, 3)
    assert [v < 3 for v in path] == [True, False] * 3
    c6 = cycle(6)
    path = bipartite_hamilton_via_matching(c6, 0, 1)
    assert path in ([0, 5, 4, 3, 2, 1],)


@pytest.mark.parametrize("t", [1, 2, 3])
def test_matching_reduction_is_exact_for_small_sides(t):
    for bits in range(1 << (t * t)):
        g = Graph(2 * t, [(a, t + b) for a in range(t) for b in range(t) if bits >> (a * t + b) & 1])
        for x in range(t):
            for y in range(t, 2 * t):
                expected = hamilton_path_exists(g, x, y, range(2 * t))
                try:
                    path = bipartite_hamilton_via_matching(g, x, y, sides=(range(t), range(t, 2 * t)))
                except NotFound:
                    assert not expected
                else:
                    assert expected and is_hamilton_path(g, path, range(2 * t))


@pytest.mark.parametrize("seed", range(20))
def test_matching_reduction_agrees_with_search(seed):
    g = random_bipartite(5, 0.55, seed)
    sides = (range(5), range(5, 10))
    results = []
    for route in (bipartite_hamilton_via_matching, hamilton_path):
        try:
            route(g, 0, 5, sides=sides)
            results.append(True)
        except NotFound:
            results.append(False)
    assert results[0] == results[1] == hamilton_path_exists(g, 0, 5, range(10))


def test_short_path_examples():
    k20 = complete(20)
    assert len(robust_short_path(k20, range(20), None, 0, 7, avoid=[1, 2])) - 1 == 1
    kb = gen_complete_bipartite(10, 10)
    path = robust_short_path(kb, range(20), (range(10), range(10, 20)), 0, 3)
    assert len(path) - 1 == 2 and kb.has_edge(path[0], path[1]) and kb.has_edge(path[1], path[2])


def test_short_path_in_random_expanders():
    lengths = []
    graphs = [gen_regular(100, 40, seed=k) for k in range(10)]
    for seed in range(100):
        g = graphs[seed % 10]
        rng = random.Random(seed)
        p, q, *avoid = rng.sample(range(100), 7)
        path = robust_short_path(g, range(100), None, p, q, avoid=avoid, delta=0.2)
        assert path[0] == p and path[-1] == q and not set(path) & set(avoid)
        assert all(g.has_edge(a, b) for a, b in zip(path, path[1:]))
        lengths.append(len(path) - 1)
    assert max(lengths) <= 75
    assert max(lengths) <= 4


def test_short_path_errors():
    with pytest.raises(Disconnected):
        robust_short_path(gen_clique_union(2, 5), range(10), None, 0, 9)
    with pytest.raises(TooLong) as info:
        robust_short_path(cycle(40), range(40), None, 0, 20, delta=1.0)
    assert "20" in str(info.value)


def test_short_path_respects_sides():
    g = complete(6)
    path = robust_short_path(g, range(6), ([0, 1, 2], [3, 4, 5]), 0, 1)
    assert len(path) == 3 and path[1] in (3, 4, 5)
    assert to_mask(path) >> 0 & 1
