import itertools
import json

import pytest

from builders import sided
from tiler.decompose import Label
from tiler.errors import BudgetError, PreconditionError
from tiler.graph import Graph, gen_complete_bipartite, gen_regular
from tiler.params import ParamPack
from tiler.subdivide import (
    Subdivision,
    SubdivisionPacking,
    absorb,
    balancing_linear_forest,
    merge_to_paths,
    pack_subdivisions,
    single_subdivision,
    subdivision_is_valid,
    subdivision_pair,
    working_graph,
)

WIDE = ParamPack(c=0.5, delta=0.5, zeta=0.5, gamma=0.5, xi=0.5, beta=0.1, eta=0.1)


def complete(n):
    return Graph(n, itertools.combinations(range(n), 2))


def side_skew(vertices, xs):
    return sum(1 if v in xs else -1 for v in vertices)


def check_packing(g, packing):
    assert packing.covered() == list(range(g.n))
    assert all(subdivision_is_valid(g, s) for s in packing.subdivisions)


# --- validity -----------------------------------------------------------------


def test_validity_checks():
    k5 = complete(5)
    tri = complete(3)
    good = Subdivision(tri, {0: 0, 1: 1, 2: 2}, [[0, 3, 1], [0, 2], [1, 4, 2]])
    assert subdivision_is_valid(k5, good)
    shared = Subdivision(tri, {0: 0, 1: 1, 2: 2}, [[0, 3, 1], [0, 2], [1, 3, 2]])
    assert not subdivision_is_valid(k5, shared)
    through_branch = Subdivision(tri, {0: 0, 1: 1, 2: 2}, [[0, 2, 1], [0, 2], [1, 2]])
    assert not subdivision_is_valid(k5, through_branch)
    wrong_end = Subdivision(tri, {0: 0, 1: 1, 2: 2}, [[0, 1], [0, 3], [1, 2]])
    assert not subdivision_is_valid(k5, wrong_end)
    c5 = Graph(5, [(i, (i + 1) % 5) for i in range(5)])
    assert not subdivision_is_valid(c5, Subdivision(tri, {0: 0, 1: 1, 2: 2}, [[0, 1], [0, 2], [1, 2]]))
    assert not subdivision_is_valid(k5, Subdivision(tri, {0: 0, 1: 0, 2: 2}, [[0, 0], [0, 2], [0, 2]]))


def test_working_graph_drops_same_side_edges():
    g = gen_complete_bipartite(3, 3).with_edges([(0, 1), (3, 4)])
    dec = sided(g, [range(6)], [(range(3), range(3, 6))])
    gp = working_graph(g, dec)
    assert not gp.has_edge(0, 1) and not gp.has_edge(3, 4) and gp.num_edges == 9
    far = sided(g, [range(6)], [(range(3), range(3, 6))], [Label.FAR_FROM_BIPARTITE])
    assert working_graph(g, far).num_edges == 11


# --- balancing forest and paths -------------------------------------------------


def unbalanced_bipartite():
    """K_{8,8} plus two edges inside X; vertex 8 is declared an X vertex, so |X| - |Y| = 2."""
    g = gen_complete_bipartite(8, 8).with_edges([(0, 1), (2, 3)])
    xs, ys = list(range(9)), list(range(9, 16))
    return g, sided(g, [range(16)], [(xs, ys)], params=WIDE), set(xs), set(ys)


def test_balanced_classes_need_no_forest():
    g = gen_complete_bipartite(6, 6)
    dec = sided(g, [range(12)], [(range(6), range(6, 12))], params=WIDE)
    assert balancing_linear_forest(g, dec) == []


def test_forest_fixes_an_excess_of_two():
    g, dec, xs, ys = unbalanced_bipartite()
    forest = balancing_linear_forest(g, dec)
    assert len(forest) == 1
    path = forest[0]
    assert all(g.has_edge(a, b) for a, b in zip(path, path[1:]))
    assert len(set(path)) == len(path) >= 2
    assert (path[0] in xs) != (path[-1] in xs)
    # the path holds two more X vertices than Y vertices
    assert side_skew(path, xs) == 2
    assert len(xs - set(path)) == len(ys - set(path))
    assert len(path) <= WIDE.xi * g.n


def test_forest_budget():
    g, dec, _, _ = unbalanced_bipartite()
    tight = WIDE.with_(xi=0.1, beta=0.1)
    with pytest.raises(BudgetError):
        balancing_linear_forest(g, dec, tight)


def test_forest_without_same_side_edges():
    g = gen_complete_bipartite(8, 8)
    dec = sided(g, [range(16)], [(range(9), range(9, 16))], params=WIDE)
    with pytest.raises(BudgetError):
        balancing_linear_forest(g, dec)


def test_empty_forest_gives_one_edge_per_class():
    g = Graph(32, [(a, b) for base in (0, 16) for a in range(base, base + 8) for b in range(base + 8, base + 16)])
    dec = sided(g, [range(16), range(16, 32)], [(range(8), range(8, 16)), (range(16, 24), range(24, 32))],
                params=WIDE)
    paths = merge_to_paths(g, dec, [])
    assert [len(p) for p in paths] == [2, 2]
    for p, base in zip(paths, (0, 16)):
        assert g.has_edge(*p) and all(base <= v < base + 16 for v in p)


def test_merge_joins_two_components_in_one_class():
    g = Graph(32, [(a, b) for base in (0, 16) for a in range(base, base + 8) for b in range(base + 8, base + 16)])
    g = g.with_edges([(0, 16), (8, 24)])
    dec = sided(g, [range(16), range(16, 32)], [(range(8), range(8, 16)), (range(16, 24), range(24, 32))],
                params=WIDE)
    paths = merge_to_paths(g, dec, [[16, 0], [8, 24]])
    merged = paths[1]
    assert {merged[0], merged[-1]} == {16, 24}
    assert all(g.has_edge(a, b) for a, b in zip(merged, merged[1:]))
    assert {0, 8} <= set(merged)
    used = {v for p in paths for v in p}
    for xs, ys in [(range(8), range(8, 16)), (range(16, 24), range(24, 32))]:
        assert len(set(xs) - used) == len(set(ys) - used)


def test_forest_then_paths_balance():
    g, dec, xs, ys = unbalanced_bipartite()
    paths = merge_to_paths(g, dec, balancing_linear_forest(g, dec))
    assert len(paths) == 1
    assert (paths[0][0] in xs) != (paths[0][-1] in xs)
    assert len(xs - set(paths[0])) == len(ys - set(paths[0]))


# --- subdivision pairs and absorption --------------------------------------------


def test_pair_of_edges():
    a, b = subdivision_pair(complete(20), list(range(20)), None, complete(2), [], 0.5)
    assert [len(p) for p in a.paths + b.paths] == [2, 2]
    assert not a.vertices() & b.vertices()


def test_pair_of_triangles():
    g = complete(20)
    a, b = subdivision_pair(g, list(range(20)), None, complete(3), [0, 1], 0.5)
    for sub in (a, b):
        assert subdivision_is_valid(g, sub) and len(sub.vertices()) == 3
        assert not sub.vertices() & {0, 1}
    assert not a.vertices() & b.vertices()


def test_pair_side_skew_cancels():
    g = gen_complete_bipartite(15, 15)
    xs = set(range(15))
    a, b = subdivision_pair(g, list(range(30)), (list(range(15)), list(range(15, 30))), complete(4), [], 0.5)
    # each subdivision is off by |V(F)| - e(F) = -2 towards its own branch side
    assert side_skew(a.vertices(), xs) == -2
    assert side_skew(b.vertices(), xs) == 2
    assert set(a.branch.values()) <= xs and not set(b.branch.values()) & xs


def test_pattern_preconditions():
    with pytest.raises(PreconditionError):
        subdivision_pair(complete(20), list(range(20)), None, Graph(3), [], 0.5)
    with pytest.raises(PreconditionError):
        subdivision_pair(complete(20), list(range(20)), None, complete(9), [], 0.5)
    with pytest.raises(PreconditionError):
        single_subdivision(complete(5), list(range(5)), complete(4), [0, 1], 0.5)


def test_absorb_in_complete_graph():
    g = complete(9)
    path = [7, 8]
    a, b = subdivision_pair(g, list(range(9)), None, complete(3), path, 0.5)
    full = absorb(g, list(range(9)), None, a, b, path, [path], 0.5)
    assert subdivision_is_valid(g, full)
    assert full.vertices() | b.vertices() == set(range(9))
    assert not full.vertices() & b.vertices()
    assert full.branch == a.branch


def test_absorb_in_bipartite_class():
    g = gen_complete_bipartite(10, 10)
    sides = (list(range(10)), list(range(10, 20)))
    path = [19, 0]
    a, b = subdivision_pair(g, list(range(20)), sides, complete(2), path, 0.5)
    full = absorb(g, list(range(20)), sides, a, b, path, [path], 0.5)
    assert subdivision_is_valid(g, full)
    assert full.vertices() | b.vertices() == set(range(20))
    assert len(full.vertices()) + len(b.vertices()) == 20


def test_absorb_refuses_unbalanced_remainder():
    g = gen_complete_bipartite(10, 10).with_edges([(0, 1)])
    sides = (list(range(10)), list(range(10, 20)))
    path = [0, 1]
    a, b = subdivision_pair(working_graph(g, sided(g, [range(20)], [sides])), list(range(20)), sides,
                            complete(2), path, 0.5)
    with pytest.raises(PreconditionError):
        absorb(g, list(range(20)), sides, a, b, path, [path], 0.5)


# --- whole packings -------------------------------------------------------------


def test_triangle_subdivisions_of_k7():
    g = complete(7)
    packing = pack_subdivisions(g, complete(3))
    check_packing(g, packing)
    assert len(packing.subdivisions) == 1


def test_edge_subdivisions_of_k44():
    g = gen_complete_bipartite(4, 4)
    packing = pack_subdivisions(g, complete(2))
    check_packing(g, packing)
    assert all(len(s.paths) == 1 for s in packing.subdivisions)


@pytest.mark.parametrize("seed", range(3))
def test_k4_subdivisions_of_random_graph(seed):
    g = gen_regular(120, 48, seed=seed)
    packing = pack_subdivisions(g, complete(4), seed=seed)
    check_packing(g, packing)


def test_packing_json_round_trip():
    g = complete(20)
    packing = pack_subdivisions(g, complete(4))
    back = SubdivisionPacking.from_json(json.loads(json.dumps(packing.to_json())))
    assert back.pattern.edges() == packing.pattern.edges()
    assert back.covered() == packing.covered()
    check_packing(g, back)


def test_packing_needs_regular_host():
    with pytest.raises(PreconditionError):
        pack_subdivisions(gen_complete_bipartite(3, 4), complete(2))
