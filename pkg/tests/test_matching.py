import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from oracles import brute_max_matching, half_integral_pfms, is_perfect_two_matching, perfect_two_matchings, pfm_exists
from tiler.errors import Infeasible, NoPerfectMatching, NotRegular, PreconditionError
from tiler.graph import Graph, gen_complete_bipartite, gen_regular
from tiler.matching import (
    TwoMatching,
    hall_violator,
    is_perfect_fractional,
    lift_two_matching,
    max_matching,
    perfect_fractional_matching,
    round_fractional_to_two_matching,
    template_matching,
    uniform_fractional_matching,
    vertex_sums,
)

HALF = Fraction(1, 2)


def cycle(n):
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def complete(n):
    return Graph(n, itertools.combinations(range(n), 2))


def petersen():
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return Graph(10, outer + spokes + inner)


def random_graph(n, p, seed):
    rng = random.Random(seed)
    return Graph(n, [e for e in itertools.combinations(range(n), 2) if rng.random() < p])


def check_rounding(g, w):
    trace = []
    tm = round_fractional_to_two_matching(g, w, trace=trace)
    assert is_perfect_two_matching(g, tm.edges, tm.odd_cycles)
    for step in trace:
        assert all(s == 1 for s in vertex_sums(g.n, step["weights"]))
        assert all(0 <= x <= 1 and g.has_edge(*e) for e, x in step["weights"].items())
    counts = [step["fractional"] for step in trace]
    assert counts == sorted(counts, reverse=True) and len(set(counts)) == len(counts)
    return tm, trace


def test_uniform_examples():
    assert set(uniform_fractional_matching(cycle(5)).values()) == {HALF}
    w = uniform_fractional_matching(complete(4))
    assert set(w.values()) == {Fraction(1, 3)} and is_perfect_fractional(complete(4), w)
    with pytest.raises(NotRegular):
        uniform_fractional_matching(Graph(3, [(0, 1), (0, 2)]))


@pytest.mark.parametrize("seed", range(4))
def test_uniform_is_perfect_on_regular_graphs(seed):
    g = gen_regular(30, 7 + seed, seed=seed)
    assert is_perfect_fractional(g, uniform_fractional_matching(g))
    assert is_perfect_fractional(g, perfect_fractional_matching(g))


def test_star_has_no_perfect_fractional_matching():
    with pytest.raises(Infeasible) as info:
        perfect_fractional_matching(Graph(4, [(0, 1), (0, 2), (0, 3)]))
    witness = info.value.witness
    assert len(witness) > len({u for v in witness for u in Graph(4, [(0, 1), (0, 2), (0, 3)]).neighbors(v)})


@pytest.mark.parametrize("seed", range(40))
def test_fractional_feasibility_matches_enumeration(seed):
    n = 6 + seed % 7
    g = random_graph(n, 0.3, seed)
    exists = pfm_exists(g)
    try:
        w = perfect_fractional_matching(g)
    except Infeasible:
        assert not exists
    else:
        assert exists and is_perfect_fractional(g, w)
        assert set(w.values()) <= {HALF, Fraction(1)}


def test_rounding_odd_cycle_is_untouched():
    g = cycle(5)
    tm, trace = check_rounding(g, uniform_fractional_matching(g))
    assert trace == [] and tm.edges == [] and sorted(tm.odd_cycles[0]) == list(range(5))


def test_rounding_even_cycle_takes_one_step():
    g = cycle(4)
    tm, trace = check_rounding(g, uniform_fractional_matching(g))
    assert len(trace) == 1 and trace[0]["x"] == HALF and trace[0]["kind"] == "even"
    assert sorted(tm.edges) in ([(0, 1), (2, 3)], [(0, 3), (1, 2)])


def test_rounding_two_triangles_and_a_path():
    g = Graph(7, [(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (4, 5), (4, 6), (5, 6)])
    q = Fraction(1, 4)
    w = {(0, 1): 1 - q, (0, 2): q, (1, 2): q, (2, 3): HALF, (3, 4): HALF, (4, 5): q, (4, 6): q, (5, 6): 1 - q}
    assert is_perfect_fractional(g, w)
    tm, trace = check_rounding(g, w)
    assert any(step["kind"] != "even" for step in trace)
    assert tm.weights() in perfect_two_matchings(7, list(g.rows))


def test_rounding_rejects_imperfect_input():
    with pytest.raises(PreconditionError):
        round_fractional_to_two_matching(cycle(4), {(0, 1): Fraction(1)})


@settings(max_examples=40, deadline=None)
@given(st.integers(4, 8), st.integers(0, 10**6))
def test_rounding_mixtures_of_half_integral_matchings(n, seed):
    # averages of several perfect fractional matchings are perfect with finer denominators
    rng = random.Random(seed)
    g = random_graph(n, 0.6, seed)
    pfms = half_integral_pfms(n, list(g.rows))
    if not pfms:
        return
    chosen = [rng.choice(pfms) for _ in range(3)]
    coef = [Fraction(rng.randint(1, 5)) for _ in chosen]
    total = sum(coef)
    w = {}
    for c, m in zip(coef, chosen):
        for e, x in m.items():
            w[e] = w.get(e, Fraction(0)) + c * x / total
    check_rounding(g, w)


def test_lift_examples():
    assert sorted(lift_two_matching(TwoMatching([(1, 2)]))) == [((1, 0), (2, 1)), ((1, 1), (2, 0))]
    tri = lift_two_matching(TwoMatching([], [[1, 2, 3]]))
    assert tri == [((1, 0), (2, 1)), ((2, 0), (3, 1)), ((3, 0), (1, 1))]
    mixed = lift_two_matching(TwoMatching([(1, 2)], [[3, 4, 5]]))
    assert len(mixed) == 5
    assert sorted(v for e in mixed for v in e) == sorted((i, s) for i in range(1, 6) for s in (0, 1))


@pytest.mark.parametrize("n", range(2, 7))
def test_lift_is_perfect_for_every_two_matching(n):
    for w in perfect_two_matchings(n):
        tm = TwoMatching([e for e, x in w.items() if x == 1])
        half = Graph(n, [e for e, x in w.items() if x == HALF])
        seen = set()
        for v in range(n):
            if v in seen or not half.rows[v]:
                continue
            cyc = [v]
            while True:
                nxt = [u for u in half.neighbors(cyc[-1]) if u not in cyc]
                if not nxt:
                    break
                cyc.append(nxt[0])
            seen.update(cyc)
            tm.odd_cycles.append(cyc)
        lifted = lift_two_matching(tm)
        ends = [x for e in lifted for x in e]
        assert sorted(ends) == [(i, s) for i in range(n) for s in (0, 1)]
        for (a, sa), (b, sb) in lifted:
            assert sa != sb and _key(a, b) in w


def _key(a, b):
    return (min(a, b), max(a, b))


def test_max_matching_examples():
    assert len(max_matching(cycle(5))) == 2
    assert len(max_matching(gen_complete_bipartite(3, 3))) == 3
    m = max_matching(petersen())
    assert len(m) == 5 and len({v for e in m for v in e}) == 10
    assert all(petersen().has_edge(*e) for e in m)


def test_max_matching_against_exhaustion():
    rng = random.Random(11)
    for _ in range(500):
        n = rng.randint(1, 10)
        g = random_graph(n, rng.random(), rng.randrange(10**9))
        m = max_matching(g)
        assert len({v for e in m for v in e}) == 2 * len(m)
        assert all(g.has_edge(*e) for e in m)
        assert len(m) == brute_max_matching(g)


def test_hall_violator_examples():
    assert hall_violator(gen_complete_bipartite(3, 3), range(3), range(3, 6)) is None
    star = Graph(4, [(0, 1), (0, 2), (0, 3)])
    s = hall_violator(star, [1, 2, 3], [0])
    assert len(s) >= 2


@pytest.mark.parametrize("seed", range(30))
def test_hall_violator_matches_subset_scan(seed):
    rng = random.Random(seed)
    g = Graph(20, [(a, 10 + b) for a in range(10) for b in range(10) if rng.random() < 0.15])
    deficient = any(
        len({u for v in subset for u in g.neighbors(v)}) < len(subset)
        for k in range(1, 11)
        for subset in itertools.combinations(range(10), k)
    )
    s = hall_violator(g, range(10), range(10, 20))
    assert (s is not None) == deficient
    if s is not None:
        assert len({u for v in s for u in g.neighbors(v)}) < len(s)


def test_template_matching_examples():
    m = template_matching(cycle(6), removed=[0, 3])
    assert sorted(m) == [(1, 2), (4, 5)]
    assert len(template_matching(gen_complete_bipartite(3, 3), removed=[0, 3])) == 2
    with pytest.raises(PreconditionError):
        template_matching(cycle(5))


def test_template_matching_routes_agree():
    for seed in range(10):
        g = gen_regular(10, 3, seed=seed)
        a = template_matching(g)
        b = template_matching(g, route="hamilton")
        for m in (a, b):
            assert sorted(v for e in m for v in e) == list(range(10))
            assert all(g.has_edge(*e) for e in m)


def test_template_matching_reports_hall_violator():
    g = gen_complete_bipartite(2, 4)
    with pytest.raises(NoPerfectMatching) as info:
        template_matching(g)
    witness = info.value.witness
    assert len(witness) > len({u for v in witness for u in g.neighbors(v)})
