"""Brute-force reference implementations used only by the tests.

Nothing here imports the search code under test; each oracle works from the
raw adjacency rows.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import combinations, permutations
from pathlib import Path

import networkx as nx

from tiler.graph import Graph

DATA = Path(__file__).parent / "data"


def connected_graphs(max_n: int = 8) -> list[Graph]:
    """Every connected graph on 1..max_n vertices, one per isomorphism class."""
    out = []
    for h in nx.graph_atlas_g():
        if 1 <= h.number_of_nodes() <= min(max_n, 7) and nx.is_connected(h):
            out.append(Graph(h.number_of_nodes(), h.edges()))
    if max_n >= 8:
        for line in (DATA / "connected8.g6").read_text().split():
            h = nx.from_graph6_bytes(line.encode())
            out.append(Graph(8, h.edges()))
    return out


def cut_sparsities(g: Graph) -> list[tuple[int, float]]:
    """(mask, sparsity) for every proper cut, each listed once (vertex n-1 outside S)."""
    n = g.n
    out = []
    for mask in range(1, 1 << (n - 1)):
        size = bin(mask).count("1")
        cross = sum(bin(g.rows[v] & ~mask & ((1 << n) - 1)).count("1") for v in range(n) if mask >> v & 1)
        out.append((mask, cross / (size * (n - size))))
    return out


def min_sparsity(g: Graph) -> float:
    return min(s for _, s in cut_sparsities(g))


def max_cut_value(g: Graph) -> int:
    """Largest cut, counting cut edges one at a time over every mask that omits vertex n-1."""
    import numpy as np

    masks = np.arange(1 << max(g.n - 1, 0), dtype=np.int64)
    cross = np.zeros(masks.size, dtype=np.int64)
    for u, v in g.edges():
        cross += ((masks >> u) ^ (masks >> v)) & 1
    return int(cross.max()) if masks.size else 0


def brute_max_matching(g: Graph) -> int:
    @lru_cache(None)
    def rec(free: int) -> int:
        if not free:
            return 0
        v = (free & -free).bit_length() - 1
        rest = free & ~(1 << v)
        best = rec(rest)
        nb = g.rows[v] & rest
        while nb:
            u = (nb & -nb).bit_length() - 1
            nb &= nb - 1
            best = max(best, 1 + rec(rest & ~(1 << u)))
        return best

    return rec((1 << g.n) - 1)


def ktt_copies(g: Graph, t: int, within: int | None = None) -> list[tuple[frozenset, frozenset]]:
    """All K_{t,t} subgraphs as unordered side pairs."""
    verts = [v for v in range(g.n) if within is None or within >> v & 1]
    seen = set()
    out = []
    for a in combinations(verts, t):
        common = (1 << g.n) - 1
        for v in a:
            common &= g.rows[v]
        cands = [v for v in verts if common >> v & 1]
        for b in combinations(cands, t):
            key = frozenset([frozenset(a), frozenset(b)])
            if key not in seen:
                seen.add(key)
                out.append((frozenset(a), frozenset(b)))
    return out


def max_ktt_packing(g: Graph, t: int) -> int:
    """Largest number of vertex-disjoint K_{t,t} copies."""
    masks = sorted({sum(1 << v for v in a | b) for a, b in ktt_copies(g, t)})

    @lru_cache(None)
    def rec(free: int) -> int:
        usable = [m for m in masks if m & free == m]
        if not usable:
            return 0
        low = min(m & -m for m in usable)
        best = rec(free & ~low)
        for m in usable:
            if m & low:
                best = max(best, 1 + rec(free & ~m))
        return best

    return rec((1 << g.n) - 1)


def biclique_exists(g: Graph, side_x, side_y, a: int, b: int) -> bool:
    """Is there A in side_x (|A| = a) and B in side_y (|B| = b) completely joined?"""
    ymask = sum(1 << v for v in side_y)
    for group in combinations(sorted(side_x), a):
        common = ymask
        for v in group:
            common &= g.rows[v]
        if bin(common & ~sum(1 << v for v in group)).count("1") >= b:
            return True
    return False


def hamilton_path_exists(g: Graph, start: int, end: int, vertices) -> bool:
    """Bitmask DP over subsets of ``vertices``."""
    verts = sorted(vertices)
    idx = {v: i for i, v in enumerate(verts)}
    k = len(verts)
    if start not in idx or end not in idx:
        return False
    if k == 1:
        return start == end
    full = (1 << k) - 1
    reach = [0] * (1 << k)
    reach[1 << idx[start]] = 1 << idx[start]
    for mask in range(1 << k):
        ends = reach[mask]
        if not ends:
            continue
        for i in range(k):
            if ends >> i & 1:
                for j in range(k):
                    if not mask >> j & 1 and g.has_edge(verts[i], verts[j]):
                        reach[mask | 1 << j] |= 1 << j
    return bool(reach[full] >> idx[end] & 1)


def half_integral_pfms(n: int, rows: list[int] | None = None) -> list[dict]:
    """Every half-integral perfect fractional matching of the graph given by ``rows``.

    Components are single edges of weight 1 and cycles (length >= 3) of weight
    1/2.  ``rows=None`` means the complete graph.
    """
    return list(iter_half_integral_pfms(n, rows))


def pfm_exists(g: Graph) -> bool:
    return next(iter_half_integral_pfms(g.n, list(g.rows)), None) is not None


def iter_half_integral_pfms(n: int, rows: list[int] | None = None):
    if rows is None:
        rows = [((1 << n) - 1) & ~(1 << v) for v in range(n)]

    def cycles_through(v: int, free: int):
        found = []

        def extend(path: list[int], used: int):
            last = path[-1]
            for u in range(n):
                if not rows[last] >> u & 1:
                    continue
                if u == v and len(path) >= 3 and path[1] < path[-1]:
                    found.append(list(path))
                elif free >> u & 1 and not used >> u & 1:
                    extend(path + [u], used | 1 << u)

        extend([v], 1 << v)
        return found

    def rec(free: int, chosen: dict):
        if not free:
            yield dict(chosen)
            return
        v = (free & -free).bit_length() - 1
        rest = free & ~(1 << v)
        for u in range(n):
            if rows[v] >> u & 1 and rest >> u & 1:
                e = (min(u, v), max(u, v))
                chosen[e] = Fraction(1)
                yield from rec(rest & ~(1 << u), chosen)
                del chosen[e]
        for cyc in cycles_through(v, rest):
            es = [(min(a, b), max(a, b)) for a, b in zip(cyc, cyc[1:] + cyc[:1])]
            for e in es:
                chosen[e] = Fraction(1, 2)
            yield from rec(free & ~sum(1 << x for x in cyc), chosen)
            for e in es:
                del chosen[e]

    yield from rec((1 << n) - 1, {})


def perfect_two_matchings(n: int, rows: list[int] | None = None) -> list[dict]:
    """Half-integral PFMs whose half-weight cycles are all odd: the perfect 2-matchings."""
    keep = []
    for w in half_integral_pfms(n, rows):
        half = [e for e, x in w.items() if x == Fraction(1, 2)]
        g = nx.Graph(half)
        if all(len(c) % 2 == 1 for c in nx.connected_components(g)):
            keep.append(w)
    return keep


def is_perfect_two_matching(g: Graph, edges, odd_cycles) -> bool:
    seen: list[int] = []
    for u, v in edges:
        if not g.has_edge(u, v):
            return False
        seen += [u, v]
    for c in odd_cycles:
        if len(c) < 3 or len(c) % 2 == 0:
            return False
        if any(not g.has_edge(a, b) for a, b in zip(c, c[1:] + c[:1])):
            return False
        seen += list(c)
    return sorted(seen) == list(range(g.n))


def perfect_ktt_tiling_exists(g: Graph, vertices, t: int, side_a=None) -> bool:
    """Exhaustive existence of a perfect K_{t,t}-tiling (sides respected when side_a is given)."""
    target = sum(1 << v for v in vertices)
    amask = None if side_a is None else sum(1 << v for v in side_a)
    copies = []
    for a, b in ktt_copies(g, t, within=target):
        m = sum(1 << v for v in a | b)
        if amask is not None:
            ma, mb = sum(1 << v for v in a), sum(1 << v for v in b)
            if not ((ma & amask == ma and mb & amask == 0) or (mb & amask == mb and ma & amask == 0)):
                continue
        copies.append(m)
    copies = sorted(set(copies))

    @lru_cache(None)
    def rec(free: int) -> bool:
        if not free:
            return True
        low = free & -free
        return any(rec(free & ~m) for m in copies if m & low and m & free == m)

    return rec(target)


def brute_hamilton_via_permutations(g: Graph, start: int, end: int) -> bool:
    inner = [v for v in range(g.n) if v not in (start, end)]
    for order in permutations(inner):
        path = [start, *order, end]
        if all(g.has_edge(a, b) for a, b in zip(path, path[1:])):
            return True
    return False


# --- balancing bookkeeping -------------------------------------------------


def h_edge_set(rows: list[int]) -> set[tuple[int, int]]:
    return {(u, v) for u in range(len(rows)) for v in range(u + 1, len(rows)) if rows[u] >> v & 1}


def identity_value(edges: set[tuple[int, int]], d: int, xs: set[int], ys: set[int]) -> int:
    """Recount (e_H(X, out) - e_H(Y, out)) + 2 (e_H(X) - e_H(Y)) - d (|X| - |Y|) from an edge list."""
    zone = xs | ys
    x_out = sum(1 for u, v in edges if (u in xs) != (v in xs) and (u not in zone or v not in zone))
    y_out = sum(1 for u, v in edges if (u in ys) != (v in ys) and (u not in zone or v not in zone))
    x_in = sum(1 for u, v in edges if u in xs and v in xs)
    y_in = sum(1 for u, v in edges if u in ys and v in ys)
    return (x_out - y_out) + 2 * (x_in - y_in) - d * (len(xs) - len(ys))


def replay_move(before: dict, record, d: int) -> set[tuple[int, int]]:
    """Predict H after one high-degree move from the snapshot taken before it.

    ``before`` holds ``edges`` (set) and ``sides`` (list of [X, Y] vertex sets).
    Checks the edge ledger of the move and returns the predicted edge set.
    """
    edges = before["edges"]
    v = record.vertex
    (i, si), (j, dj) = record.src, record.dst
    wi = before["sides"][i][si]
    wj = before["sides"][j][1 - dj]
    deg_v = sum(1 for e in edges if v in e)
    assert deg_v == record.h_degree
    assert sum(1 for a, b in edges if (a == v and b in wj) or (b == v and a in wj)) > 0
    assert len(record.removed) == d - deg_v
    for a, b in record.removed:
        assert (a, b) in edges and v not in (a, b)
        assert (a in wi and b in wj) or (a in wj and b in wi)
    after = edges - set(record.removed)
    after = {(a, b) for a, b in after if not ((a == v and b in wj) or (b == v and a in wj))}
    # e(H) drops by d - d_H(v) plus the edges from v into W_j, so by at least d - d_H(v)
    assert len(edges) - len(after) >= d - deg_v
    return after


# --- expansion by exhaustion ----------------------------------------------


def _subsets_of_size(n: int, k: int):
    import numpy as np

    combos = np.array(list(combinations(range(n), k)), dtype=np.int64).reshape(-1, k)
    return combos


def robust_violation_exists(g: Graph, nu: float, tau: float) -> bool:
    """Is there S, tau n <= |S| <= (1 - tau) n, whose robust nu-neighbourhood has < |S| + nu n vertices?"""
    import math

    import numpy as np

    n = g.n
    adj = np.array([[g.rows[u] >> v & 1 for v in range(n)] for u in range(n)], dtype=np.int32)
    need = nu * n
    for k in range(max(0, math.ceil(tau * n - 1e-12)), math.floor((1 - tau) * n + 1e-12) + 1):
        combos = _subsets_of_size(n, k)
        # counts[s, v] = neighbours of v inside subset s
        counts = adj[:, combos].sum(axis=2).T if k else np.zeros((1, n), dtype=np.int32)
        robust = (counts >= need).sum(axis=1)
        if (robust < k + need).any():
            return True
    return False


def min_sparsity_by_size(g: Graph) -> float:
    """Sparsest cut value, enumerating subsets size by size."""
    import numpy as np

    n = g.n
    adj = np.array([[g.rows[u] >> v & 1 for v in range(n)] for u in range(n)], dtype=np.int32)
    deg = adj.sum(axis=1)
    best = float("inf")
    for k in range(1, n // 2 + 1):
        combos = _subsets_of_size(n, k)
        inside = adj[combos[:, :, None], combos[:, None, :]].sum(axis=(1, 2))
        cross = deg[combos].sum(axis=1) - inside
        best = min(best, float((cross / (k * (n - k))).min()))
    return best
