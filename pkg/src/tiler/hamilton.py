"""Robust expansion checks, Hamilton paths and short connecting paths."""

from __future__ import annotations

import math
from collections import deque
from typing import Iterable, Iterator

import numpy as np

from .errors import Disconnected, NotFound, PreconditionError, TooLong
from .graph import Graph, members, to_mask, two_coloring

__all__ = [
    "robust_neighborhood",
    "robust_expander_check",
    "hamilton_path",
    "bipartite_hamilton_via_matching",
    "robust_short_path",
    "is_hamilton_path",
]

EXHAUSTIVE_MAX_N = 18


def _as_mask(vertices: Iterable[int] | int) -> int:
    return vertices if isinstance(vertices, int) else to_mask(vertices)


def robust_neighborhood(g: Graph, subset: Iterable[int] | int, nu: float) -> set[int]:
    """Vertices with at least nu * n neighbours in the subset."""
    mask = _as_mask(subset)
    need = nu * g.n
    return {v for v in range(g.n) if g.degree(v, mask) >= need}


def _subset_bits(n: int, start: int, stop: int) -> np.ndarray:
    idx = np.arange(start, stop, dtype=np.int64)
    return ((idx[:, None] >> np.arange(n)) & 1).astype(np.int16)


def robust_expander_check(
    g: Graph, nu: float, tau: float, samples: int = 5000, seed: int = 0
) -> set[int] | None:
    """Look for S with tau*n <= |S| <= (1-tau)*n and |RN(S)| < |S| + nu*n.

    Every subset is examined when n <= 18; larger graphs are probed with
    ``samples`` random subsets.  Returns a violating S or None.
    """
    n = g.n
    if n == 0:
        return None
    lo, hi = tau * n, (1 - tau) * n
    adj = g.adjacency().astype(np.int16)
    need = nu * n
    if n <= EXHAUSTIVE_MAX_N:
        chunk = 1 << 15
        for start in range(0, 1 << n, chunk):
            bits = _subset_bits(n, start, min(1 << n, start + chunk))
            sizes = bits.sum(axis=1)
            rn = ((bits @ adj) >= need).sum(axis=1)
            bad = (sizes >= lo) & (sizes <= hi) & (rn < sizes + need)
            hit = np.flatnonzero(bad)
            if hit.size:
                return set(members(start + int(hit[0])))
        return None
    rng = np.random.default_rng(seed)
    smin, smax = max(1, math.ceil(lo)), min(n, math.floor(hi))
    if smin > smax:
        return None
    for _ in range(samples):
        size = int(rng.integers(smin, smax + 1))
        chosen = rng.choice(n, size=size, replace=False)
        x = np.zeros(n, dtype=np.int16)
        x[chosen] = 1
        rn = int(((x @ adj) >= need).sum())
        if rn < size + need:
            return set(int(v) for v in chosen)
    return None


def is_hamilton_path(g: Graph, path: list[int], vertices: Iterable[int]) -> bool:
    return (
        sorted(path) == sorted(set(vertices))
        and len(set(path)) == len(path)
        and all(g.has_edge(a, b) for a, b in zip(path, path[1:]))
    )


def _bipartite_sides(g: Graph, allowed: int, sides) -> tuple[int, int] | None:
    if sides is not None:
        return _as_mask(sides[0]) & allowed, _as_mask(sides[1]) & allowed
    comps = g.components(allowed)
    if len(comps) != 1:
        return None
    return two_coloring(g, allowed)


def hamilton_path(
    g: Graph,
    start: int,
    end: int,
    avoid: Iterable[int] | int = (),
    budget: int = 10**7,
    sides=None,
) -> list[int]:
    """Hamilton path of G - avoid from ``start`` to ``end``.

    Depth-first search with fewest-exits-first branching, pruning on dead
    ends and on connectivity of the unvisited part.  If the remaining graph
    is bipartite (or ``sides`` is given) its sides must be balanced with the
    endpoints on opposite sides.  Raises :class:`NotFound` whose
    ``exhausted`` flag says whether the budget ran out first.
    """
    allowed = ((1 << g.n) - 1) & ~_as_mask(avoid)
    if not (allowed >> start & 1 and allowed >> end & 1):
        raise PreconditionError("endpoints must not be avoided")
    if start == end:
        if allowed == 1 << start:
            return [start]
        raise PreconditionError("distinct endpoints required")
    bip = _bipartite_sides(g, allowed, sides)
    if bip is not None:
        sx, sy = bip
        if sx.bit_count() != sy.bit_count():
            raise PreconditionError(f"bipartite sides unbalanced: {sx.bit_count()} vs {sy.bit_count()}")
        if (sx >> start & 1) == (sx >> end & 1):
            raise PreconditionError("endpoints on the same side of a bipartite graph")
    if len(g.components(allowed)) != 1:
        raise NotFound("graph is disconnected", exhausted=True)
    rows = g.rows
    total = allowed.bit_count()
    endbit = 1 << end

    def connected(mask: int) -> bool:
        seed = mask & -mask
        comp = frontier = seed
        while frontier:
            nxt = 0
            for v in members(frontier):
                nxt |= rows[v]
            frontier = nxt & mask & ~comp
            comp |= frontier
        return comp == mask

    def feasible(cur: int, remaining: int) -> bool:
        live = remaining | (1 << cur)
        if not rows[end] & live & ~endbit:
            return False
        for w in members(remaining & ~endbit):
            if (rows[w] & live).bit_count() < 2:
                return False
        return connected(remaining)

    def candidates(cur: int, remaining: int) -> list[int]:
        opts = rows[cur] & remaining
        if remaining != endbit:
            opts &= ~endbit
        return sorted(members(opts), key=lambda u: ((rows[u] & remaining).bit_count(), u))

    path = [start]
    remaining = allowed & ~(1 << start)
    stack: list[Iterator[int]] = [iter(candidates(start, remaining))]
    nodes = 0
    while stack:
        if not remaining:
            return path
        nxt = next(stack[-1], None)
        if nxt is None:
            stack.pop()
            last = path.pop()
            if path:
                remaining |= 1 << last
            continue
        nodes += 1
        if nodes > budget:
            raise NotFound(f"node budget {budget} exhausted", exhausted=False)
        remaining &= ~(1 << nxt)
        path.append(nxt)
        if remaining and not feasible(nxt, remaining):
            path.pop()
            remaining |= 1 << nxt
            continue
        if len(path) == total:
            return path
        stack.append(iter(candidates(nxt, remaining)))
    raise NotFound("no Hamilton path", exhausted=True)


def _perfect_matchings(g: Graph, left: list[int], right: int, fixed: dict[int, int | None]) -> Iterator[dict[int, int]]:
    """All perfect matchings between ``left`` and the ``right`` mask.

    ``fixed`` maps a left vertex to a right vertex it must avoid (or None).
    """
    match: dict[int, int] = {}

    def rec(i: int, free: int):
        if i == len(left):
            yield dict(match)
            return
        a = left[i]
        opts = g.rows[a] & free
        ban = fixed.get(a)
        if ban is not None:
            opts &= ~(1 << ban)
        for b in members(opts):
            match[a] = b
            yield from rec(i + 1, free & ~(1 << b))
            del match[a]

    yield from rec(0, right)


def _directed_hamilton(succ: list[int], first: int, last: int) -> list[int] | None:
    k = len(succ)
    full = (1 << k) - 1

    def rec(cur: int, seen: int, order: list[int]):
        if seen == full:
            return order if cur == last else None
        opts = succ[cur] & ~seen
        if seen | (1 << last) != full:
            opts &= ~(1 << last)
        for j in members(opts):
            order.append(j)
            found = rec(j, seen | 1 << j, order)
            if found:
                return found
            order.pop()
        return None

    if k == 1:
        return [first] if first == last else None
    return rec(first, 1 << first, [first])


def bipartite_hamilton_via_matching(
    g: Graph, start: int, end: int, sides=None, max_matchings: int = 10**6
) -> list[int]:
    """Hamilton path of a balanced bipartite graph through the matching digraph.

    For a perfect matching {a_i b_i} with a_1 = start and b_t = end, arcs
    v_i -> v_j exist when b_i a_j is an edge; a Hamilton path v_1 .. v_t of
    that digraph unfolds to start, b_1, a_2, ..., a_t, end.  Every Hamilton
    path of the graph arises from such a matching, so trying all of them
    decides existence exactly.
    """
    full = (1 << g.n) - 1
    if sides is None:
        if len(g.components(full)) != 1:
            raise NotFound("graph is disconnected", exhausted=True)
        sides = two_coloring(g)
        if sides is None:
            raise PreconditionError("graph is not bipartite")
    sx, sy = _as_mask(sides[0]), _as_mask(sides[1])
    if sx >> end & 1:
        sx, sy = sy, sx
    if not (sx >> start & 1 and sy >> end & 1):
        raise PreconditionError("endpoints on the same side")
    if sx.bit_count() != sy.bit_count():
        raise PreconditionError("bipartite sides unbalanced")
    left = [start] + [a for a in members(sx) if a != start]
    t = len(left)
    fixed = {start: end} if t > 1 else {}
    seen = 0
    for match in _perfect_matchings(g, left, sy, fixed):
        seen += 1
        if seen > max_matchings:
            raise NotFound("matching budget exhausted", exhausted=False)
        if t > 1 and match[start] == end:
            continue
        order = left
        last = next(i for i, a in enumerate(order) if match[a] == end)
        succ = []
        for a in order:
            b = match[a]
            succ.append(to_mask(j for j, a2 in enumerate(order) if a2 != a and g.has_edge(b, a2)))
        route = _directed_hamilton(succ, 0, last)
        if route is not None:
            path = []
            for j in route:
                path.extend((order[j], match[order[j]]))
            return path
    raise NotFound("no Hamilton path", exhausted=True)


def robust_short_path(
    g: Graph,
    within: Iterable[int] | int,
    sides,
    source: int,
    target: int,
    avoid: Iterable[int] | int = (),
    delta: float = 0.1,
) -> list[int]:
    """Shortest source-target path inside ``within`` minus ``avoid``.

    With ``sides`` set only edges between the two sides are used.  The path
    may have at most ceil(15 / delta) edges.
    """
    zone = (_as_mask(within) & ~_as_mask(avoid)) | (1 << source) | (1 << target)
    if sides is not None:
        sx, sy = _as_mask(sides[0]), _as_mask(sides[1])
    parent = {source: -1}
    queue = deque([source])
    while queue:
        a = queue.popleft()
        if a == target:
            break
        opts = g.rows[a] & zone
        if sides is not None:
            opts &= sy if sx >> a & 1 else sx
        for b in members(opts):
            if b not in parent:
                parent[b] = a
                queue.append(b)
    if target not in parent:
        raise Disconnected(f"{source} and {target} are not connected")
    path = [target]
    while path[-1] != source:
        path.append(parent[path[-1]])
    path.reverse()
    limit = math.ceil(15 / delta)
    if len(path) - 1 > limit:
        raise TooLong(f"path has {len(path) - 1} edges, limit {limit}")
    return path
