"""Matchings, fractional matchings and perfect 2-matchings.

Fractional weights are exact :class:`fractions.Fraction` values keyed by
edges ``(u, v)`` with ``u < v``.  A perfect 2-matching is a spanning set of
disjoint edges (weight 1) and odd cycles (weight 1/2 on every cycle edge).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .errors import Infeasible, InvariantError, NoPerfectMatching, NotFound, NotRegular, PreconditionError
from .graph import Graph, members, to_mask, two_coloring

Edge = tuple[int, int]
FractionalMatching = dict[Edge, Fraction]

HALF = Fraction(1, 2)

__all__ = [
    "FractionalMatching",
    "TwoMatching",
    "uniform_fractional_matching",
    "perfect_fractional_matching",
    "vertex_sums",
    "is_perfect_fractional",
    "round_fractional_to_two_matching",
    "lift_two_matching",
    "max_matching",
    "bipartite_matching",
    "hall_violator",
    "template_matching",
]


def _key(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass
class TwoMatching:
    """Disjoint matching edges plus disjoint odd cycles (vertex sequences)."""

    edges: list[Edge] = field(default_factory=list)
    odd_cycles: list[list[int]] = field(default_factory=list)

    def vertices(self) -> set[int]:
        out = {v for e in self.edges for v in e}
        for c in self.odd_cycles:
            out.update(c)
        return out

    def weights(self) -> FractionalMatching:
        w = {_key(*e): Fraction(1) for e in self.edges}
        for c in self.odd_cycles:
            for a, b in zip(c, c[1:] + c[:1]):
                w[_key(a, b)] = HALF
        return w

    def to_json(self) -> dict:
        return {"edges": [list(e) for e in self.edges], "odd_cycles": [list(c) for c in self.odd_cycles]}

    @classmethod
    def from_json(cls, data: dict) -> "TwoMatching":
        return cls([tuple(e) for e in data["edges"]], [list(c) for c in data["odd_cycles"]])


def vertex_sums(n: int, weights: FractionalMatching) -> list[Fraction]:
    sums = [Fraction(0)] * n
    for (u, v), x in weights.items():
        sums[u] += x
        sums[v] += x
    return sums


def is_perfect_fractional(g: Graph, weights: FractionalMatching) -> bool:
    for (u, v), x in weights.items():
        if x < 0 or x > 1 or (x and not g.has_edge(u, v)):
            return False
    return all(s == 1 for s in vertex_sums(g.n, weights))


def uniform_fractional_matching(g: Graph) -> FractionalMatching:
    """Weight 1/d on every edge of a d-regular graph."""
    d = g.regular_degree()
    if d is None:
        raise NotRegular("uniform weights need a regular graph")
    if d == 0:
        if g.n:
            raise PreconditionError("a 0-regular graph has no perfect fractional matching")
        return {}
    return {e: Fraction(1, d) for e in g.edges()}


# --- bipartite matching ----------------------------------------------------


def bipartite_matching(rows: list[int], left: Iterable[int], right_mask: int) -> dict[int, int]:
    """Maximum matching from ``left`` into ``right_mask`` (augmenting paths).

    ``rows[a]`` is the neighbourhood bitmask of left vertex ``a``; left and
    right ids live in separate namespaces.  Returns ``{left: right}``.
    """
    left = list(left)
    match_right: dict[int, int] = {}
    match_left: dict[int, int] = {}
    # cheap greedy start
    for a in left:
        for b in members(rows[a] & right_mask):
            if b not in match_right:
                match_right[b] = a
                match_left[a] = b
                break
    for a in left:
        if a in match_left:
            continue
        # BFS for an augmenting path from a
        parent: dict[int, int] = {}
        visited = 0
        queue = deque([a])
        found = None
        while queue and found is None:
            x = queue.popleft()
            for b in members(rows[x] & right_mask & ~visited):
                visited |= 1 << b
                parent[b] = x
                nxt = match_right.get(b)
                if nxt is None:
                    found = b
                    break
                queue.append(nxt)
        if found is None:
            continue
        b = found
        while True:
            x = parent[b]
            prev = match_left.get(x)
            match_left[x] = b
            match_right[b] = x
            if x == a:
                break
            b = prev
    return match_left


def hall_violator(g: Graph, side_a: Iterable[int], side_b: Iterable[int]) -> set[int] | None:
    """A set S of A-vertices with |N(S) & B| < |S|, or None if A saturates into B."""
    side_a = sorted(side_a)
    bmask = to_mask(side_b)
    match = bipartite_matching(list(g.rows), side_a, bmask)
    if len(match) == len(side_a):
        return None
    match_right = {b: a for a, b in match.items()}
    root = next(a for a in side_a if a not in match)
    reached_a = {root}
    seen_b = 0
    queue = deque([root])
    while queue:
        a = queue.popleft()
        for b in members(g.rows[a] & bmask & ~seen_b):
            seen_b |= 1 << b
            a2 = match_right[b]
            if a2 not in reached_a:
                reached_a.add(a2)
                queue.append(a2)
    return reached_a


def perfect_fractional_matching(g: Graph) -> FractionalMatching:
    """Half-integral perfect fractional matching via the bipartite double cover.

    A perfect matching M of the double cover (u, v') gives weights
    ``w(uv) = ([M(u) = v] + [M(v) = u]) / 2``.  When none exists the raised
    :class:`Infeasible` carries a set S with |N(S)| < |S| as its witness.
    """
    match = bipartite_matching(list(g.rows), range(g.n), (1 << g.n) - 1)
    if len(match) < g.n:
        violator = hall_violator_double_cover(g, match)
        raise Infeasible(f"Hall violator of size {len(violator)}", witness=violator)
    w: FractionalMatching = {}
    for u, v in match.items():
        k = _key(u, v)
        w[k] = w.get(k, Fraction(0)) + HALF
    return w


def hall_violator_double_cover(g: Graph, match: dict[int, int]) -> set[int]:
    match_right = {b: a for a, b in match.items()}
    root = next(a for a in range(g.n) if a not in match)
    reached = {root}
    seen = 0
    queue = deque([root])
    while queue:
        a = queue.popleft()
        for b in members(g.rows[a] & ~seen):
            seen |= 1 << b
            a2 = match_right.get(b)
            if a2 is not None and a2 not in reached:
                reached.add(a2)
                queue.append(a2)
    return reached


# --- rounding to a perfect 2-matching --------------------------------------


def _support_rows(n: int, w: FractionalMatching) -> list[int]:
    rows = [0] * n
    for (u, v), x in w.items():
        if x > 0:
            rows[u] |= 1 << v
            rows[v] |= 1 << u
    return rows


def _components(rows: list[int], n: int) -> list[int]:
    return Graph.from_rows(rows).components(to_mask(v for v in range(n) if rows[v]))


def _find_cycle(rows: list[int], mask: int) -> list[int]:
    """Some cycle (vertex sequence) inside the vertex mask."""
    start = members(mask)[0]
    parent = {start: -1}
    depth = {start: 0}
    stack = [(start, iter(members(rows[start] & mask)))]
    while stack:
        v, it = stack[-1]
        for u in it:
            if u == parent[v]:
                continue
            if u in depth:
                if depth[u] < depth[v]:
                    cycle = [v]
                    while cycle[-1] != u:
                        cycle.append(parent[cycle[-1]])
                    return cycle[::-1]
                continue
            parent[u] = v
            depth[u] = depth[v] + 1
            stack.append((u, iter(members(rows[u] & mask))))
            break
        else:
            stack.pop()
    raise InvariantError("component with minimum degree two has no cycle")


def _cycle_edges(cycle: list[int]) -> list[Edge]:
    return [_key(a, b) for a, b in zip(cycle, cycle[1:] + cycle[:1])]


def _split_cycle(cycle: list[int], i: int, j: int) -> tuple[list[int], list[int]]:
    """The two arcs of ``cycle`` between positions i < j, as vertex lists i..j."""
    first = cycle[i : j + 1]
    second = cycle[j:] + cycle[: i + 1]
    return first, second


def _even_cycle_from_ear(cycle: list[int], ear: list[int]) -> list[int]:
    """Cycle + ear (path between two cycle vertices) -> an even cycle."""
    i, j = cycle.index(ear[0]), cycle.index(ear[-1])
    flip = i > j
    if flip:
        i, j = j, i
        ear = ear[::-1]
    arc1, arc2 = _split_cycle(cycle, i, j)
    inner = ear[1:-1]
    # arc1 runs cycle[i] -> cycle[j]; close with the ear from cycle[j] back to cycle[i]
    cand1 = arc1 + inner[::-1]
    # arc2 runs cycle[j] -> cycle[i]; close with the ear from cycle[i] to cycle[j]
    cand2 = arc2 + inner
    return cand1 if len(cand1) % 2 == 0 else cand2


def _odd_structure(rows: list[int], comp: int):
    """Locate the reweighting structure inside a bad support component.

    Returns ``("even", cycle)`` or ``("odd", c1, path, c2)``.
    """
    cycle = _find_cycle(rows, comp)
    if len(cycle) % 2 == 0:
        return ("even", cycle)
    on_cycle = to_mask(cycle)
    pos = {v: k for k, v in enumerate(cycle)}
    k = len(cycle)
    for v in cycle:
        for u in members(rows[v] & on_cycle):
            if abs(pos[u] - pos[v]) not in (1, k - 1):
                return ("even", _even_cycle_from_ear(cycle, [v, u]))
    outside = comp & ~on_cycle
    for x in cycle:
        for y in members(rows[x] & outside):
            parent = {y: x}
            queue = deque([y])
            while queue:
                a = queue.popleft()
                hits = members(rows[a] & on_cycle & ~(1 << x))
                if hits:
                    path = [hits[0], a]
                    while path[-1] != x:
                        path.append(parent[path[-1]])
                    return ("even", _even_cycle_from_ear(cycle, path[::-1]))
                for b in members(rows[a] & outside):
                    if b not in parent:
                        parent[b] = a
                        queue.append(b)
    # every branch hangs off a single cycle vertex: take a second cycle there
    x = next(v for v in cycle if rows[v] & outside)
    y = members(rows[x] & outside)[0]
    branch = Graph.from_rows(rows).components(outside)
    region = next(c for c in branch if c >> y & 1) | (1 << x)
    second = _find_cycle(rows, region)
    if len(second) % 2 == 0:
        return ("even", second)
    shared = set(cycle) & set(second)
    if shared:
        v = shared.pop()
        return ("odd", cycle, [v], second)
    target = to_mask(second)
    parent = {v: -1 for v in cycle}
    queue = deque(cycle)
    while queue:
        a = queue.popleft()
        if target >> a & 1:
            path = [a]
            while parent[path[-1]] != -1:
                path.append(parent[path[-1]])
            return ("odd", cycle, path[::-1], second)
        for b in members(rows[a] & comp):
            if b not in parent:
                parent[b] = a
                queue.append(b)
    raise InvariantError("odd cycles in one component are not connected")


def _rotate(cycle: list[int], start: int) -> list[int]:
    i = cycle.index(start)
    return cycle[i:] + cycle[:i]


def _coefficients(structure) -> dict[Edge, int]:
    coef: dict[Edge, int] = {}

    def add(a, b, c):
        k = _key(a, b)
        coef[k] = coef.get(k, 0) + c

    if structure[0] == "even":
        cycle = structure[1]
        for idx, (a, b) in enumerate(zip(cycle, cycle[1:] + cycle[:1])):
            add(a, b, 1 if idx % 2 == 0 else -1)
        return coef
    _, c1, path, c2 = structure
    c1 = _rotate(c1, path[0])
    c2 = _rotate(c2, path[-1])
    # first cycle: edges at even offsets from v1 go down, odd offsets go up
    for idx, (a, b) in enumerate(zip(c1, c1[1:] + c1[:1])):
        add(a, b, -1 if idx % 2 == 0 else 1)
    for idx, (a, b) in enumerate(zip(path, path[1:])):
        add(a, b, 2 if idx % 2 == 0 else -2)
    sign = 1 if (len(path) - 1) % 2 == 1 else -1
    for idx, (a, b) in enumerate(zip(c2, c2[1:] + c2[:1])):
        add(a, b, -sign if idx % 2 == 0 else sign)
    return coef


def round_fractional_to_two_matching(g: Graph, weights: FractionalMatching, trace: list | None = None) -> TwoMatching:
    """Turn a perfect fractional matching into a perfect 2-matching.

    Every step shifts weight along an even cycle, or along two odd cycles and
    a path joining them, by the largest amount keeping weights in [0, 1].
    Vertex sums are re-checked after each step and the number of fractional
    edges must strictly drop.  Steps (with the weights after each) go to ``trace`` if given.
    """
    w = {_key(*e): Fraction(x) for e, x in weights.items() if x}
    if not is_perfect_fractional(g, w):
        raise PreconditionError("input is not a perfect fractional matching of the graph")
    n = g.n
    # support, vertex sums and fractional edges are updated only where a step touches them
    rows = _support_rows(n, w)
    sums = vertex_sums(n, w)
    fractional = {e for e, v in w.items() if v != 1}
    while True:
        bad = None
        for comp in _components(rows, n):
            verts = members(comp)
            if len(verts) == 2:
                continue
            degs = [(rows[v] & comp).bit_count() for v in verts]
            if all(dg == 2 for dg in degs) and len(verts) % 2 == 1:
                continue
            bad = comp
            break
        if bad is None:
            break
        structure = _odd_structure(rows, bad)
        coef = _coefficients(structure)
        x = min(((1 - w[e]) / c if c > 0 else w[e] / -c) for e, c in coef.items())
        if x <= 0:
            raise InvariantError("zero step length on a fractional component")
        before = len(fractional)
        touched = set()
        for (a, b), c in coef.items():
            value = w[(a, b)] + c * x
            if value < 0 or value > 1:
                raise InvariantError(f"weight of {(a, b)} left [0, 1]")
            sums[a] += c * x
            sums[b] += c * x
            touched.update((a, b))
            if value:
                w[(a, b)] = value
            else:
                del w[(a, b)]
                rows[a] &= ~(1 << b)
                rows[b] &= ~(1 << a)
            if 0 < value < 1:
                fractional.add((a, b))
            else:
                fractional.discard((a, b))
        if any(sums[v] != 1 for v in touched):
            raise InvariantError("vertex sums changed during rounding")
        after = len(fractional)
        if after >= before:
            raise InvariantError("fractional edge count did not decrease")
        if trace is not None:
            trace.append({"kind": structure[0], "x": x, "fractional": after, "weights": dict(w)})
    result = TwoMatching()
    rows = _support_rows(n, w)
    for comp in _components(rows, n):
        verts = members(comp)
        if len(verts) == 2:
            result.edges.append((verts[0], verts[1]))
            continue
        cycle = [verts[0]]
        prev = -1
        while True:
            nxt = next(u for u in members(rows[cycle[-1]]) if u != prev)
            if nxt == cycle[0]:
                break
            prev = cycle[-1]
            cycle.append(nxt)
        result.odd_cycles.append(cycle)
    return result


def lift_two_matching(tm: TwoMatching) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """Perfect matching of the doubled reduced graph.

    Vertex i becomes ``(i, 0)`` and ``(i, 1)``.  A matching edge ij yields
    ``(i,0)-(j,1)`` and ``(i,1)-(j,0)``; an odd cycle i1..ik yields
    ``(i_j,0)-(i_{j+1},1)`` around the cycle.
    """
    out = []
    for i, j in tm.edges:
        out.append(((i, 0), (j, 1)))
        out.append(((i, 1), (j, 0)))
    for cycle in tm.odd_cycles:
        for a, b in zip(cycle, cycle[1:] + cycle[:1]):
            out.append(((a, 0), (b, 1)))
    return out


# --- general maximum matching ----------------------------------------------


def max_matching(g: Graph) -> list[Edge]:
    """Maximum cardinality matching.

    Bipartite inputs use augmenting paths; otherwise Edmonds' blossom search
    with base relabelling.
    """
    sides = two_coloring(g)
    if sides is not None:
        left = members(sides[0])
        match = bipartite_matching(list(g.rows), left, sides[1])
        return sorted(_key(a, b) for a, b in match.items())
    n = g.n
    adj = [g.neighbors(v) for v in range(n)]
    mate = [-1] * n
    for v in range(n):
        if mate[v] == -1:
            for u in adj[v]:
                if mate[u] == -1:
                    mate[u], mate[v] = v, u
                    break

    def find_augmenting(root: int) -> int:
        used = [False] * n
        parent = [-1] * n
        base = list(range(n))
        used[root] = True
        queue = deque([root])

        def lca(a: int, b: int) -> int:
            seen = [False] * n
            while True:
                a = base[a]
                seen[a] = True
                if mate[a] == -1:
                    break
                a = parent[mate[a]]
            while True:
                b = base[b]
                if seen[b]:
                    return b
                b = parent[mate[b]]

        def mark(v: int, b: int, child: int, blossom: list[bool]) -> None:
            while base[v] != b:
                blossom[base[v]] = blossom[base[mate[v]]] = True
                parent[v] = child
                child = mate[v]
                v = parent[mate[v]]

        while queue:
            v = queue.popleft()
            for to in adj[v]:
                if base[v] == base[to] or mate[v] == to:
                    continue
                if to == root or (mate[to] != -1 and parent[mate[to]] != -1):
                    cur = lca(v, to)
                    blossom = [False] * n
                    mark(v, cur, to, blossom)
                    mark(to, cur, v, blossom)
                    for i in range(n):
                        if blossom[base[i]]:
                            base[i] = cur
                            if not used[i]:
                                used[i] = True
                                queue.append(i)
                elif parent[to] == -1:
                    parent[to] = v
                    if mate[to] == -1:
                        return _augment(to, parent)
                    used[mate[to]] = True
                    queue.append(mate[to])
        return -1

    def _augment(v: int, parent: list[int]) -> int:
        end = v
        while v != -1:
            pv = parent[v]
            ppv = mate[pv]
            mate[v] = pv
            mate[pv] = v
            v = ppv
        return end

    for root in range(n):
        if mate[root] == -1:
            find_augmenting(root)
    return sorted({_key(v, mate[v]) for v in range(n) if mate[v] > v})


def template_matching(h: Graph, removed: Iterable[int] = (), route: str = "matching") -> list[Edge]:
    """Perfect matching of H minus ``removed``.

    ``route="hamilton"`` instead takes every other edge of a Hamilton path
    of the remaining graph; it is slower and exists to cross-check the
    matching route.  When no perfect matching exists the raised
    :class:`NoPerfectMatching` carries a Hall violator if the remaining
    graph is bipartite, else the uncovered vertices of a maximum matching.
    """
    removed = set(removed)
    keep = [v for v in range(h.n) if v not in removed]
    if len(keep) % 2:
        raise PreconditionError(f"remaining vertex count {len(keep)} is odd")
    if route not in ("matching", "hamilton"):
        raise PreconditionError(f"unknown route {route!r}")
    sub, labels = h.induced(keep)
    if route == "hamilton":
        path = _any_hamilton_path(sub)
        if path is None:
            raise NoPerfectMatching("no Hamilton path in the remaining graph")
        return sorted(_key(labels[a], labels[b]) for a, b in zip(path[0::2], path[1::2]))
    m = max_matching(sub)
    if 2 * len(m) != len(keep):
        coloring = two_coloring(sub)
        if coloring is not None:
            xs, ys = members(coloring[0]), members(coloring[1])
            big, small = (xs, ys) if len(xs) >= len(ys) else (ys, xs)
            violator = hall_violator(sub, big, small) or set(big)
            witness = sorted(labels[v] for v in violator)
        else:
            covered = {v for e in m for v in e}
            witness = sorted(labels[v] for v in range(sub.n) if v not in covered)
        raise NoPerfectMatching(f"maximum matching covers {2 * len(m)} of {len(keep)} vertices", witness=witness)
    return [(labels[a], labels[b]) for a, b in m]


def _any_hamilton_path(g: Graph) -> list[int] | None:
    from .hamilton import hamilton_path

    if g.n == 0:
        return []
    for start in range(g.n):
        for end in range(start + 1, g.n):
            try:
                return hamilton_path(g, start, end)
            except (NotFound, PreconditionError):
                continue
    return None
