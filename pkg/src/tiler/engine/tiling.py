"""Exact perfect K_{t,t}-tilings by backtracking."""

from __future__ import annotations

from itertools import combinations
from typing import Iterable

from ..errors import Infeasible, NotFound, PreconditionError
from ..graph import Graph, members, to_mask
from ..packing import KttCopy

__all__ = ["perfect_ktt_tiling_bipartite", "perfect_ktt_tiling"]


def _tile(g: Graph, side_a: int, side_b: int | None, t: int, budget: int | None, tag: str) -> list[KttCopy]:
    """Shared search.  ``side_b`` None means copies may sit anywhere in ``side_a``."""
    rows = g.rows
    bipartite = side_b is not None
    start = side_a | (side_b or 0)
    failed: set[int] = set()
    nodes = 0

    def pools(v: int, free: int) -> tuple[int, int]:
        if not bipartite:
            return free, free
        return (side_a & free, side_b & free) if (side_a >> v) & 1 else (side_b & free, side_a & free)

    def options(v: int, free: int):
        own, other = pools(v, free)
        own &= ~(1 << v)
        scored = []
        for group in combinations(members(rows[v] & other), t):
            common = own
            for y in group:
                common &= rows[y]
            if common.bit_count() >= t - 1:
                scored.append((-common.bit_count(), group, common))
        scored.sort()
        for _, group, common in scored:
            for rest in combinations(members(common & ~to_mask(group)), t - 1):
                yield (v,) + rest, group

    def pick(free: int) -> int | None:
        """Uncovered vertex of least degree into its opposite pool, or None on a dead end."""
        best, best_deg = None, None
        for v in members(free):
            deg = (rows[v] & pools(v, free)[1]).bit_count()
            if deg < t:
                return None
            if best_deg is None or deg < best_deg:
                best, best_deg = v, deg
        return best

    chosen: list[KttCopy] = []

    def rec(free: int) -> bool:
        nonlocal nodes
        if not free:
            return True
        if free in failed:
            return False
        v = pick(free)
        if v is not None:
            for a, b in options(v, free):
                nodes += 1
                if budget is not None and nodes > budget:
                    raise NotFound(f"tiling search stopped after {budget} nodes", exhausted=False, stage="tiling")
                chosen.append(KttCopy(a, b, tag))
                if rec(free & ~to_mask(a) & ~to_mask(b)):
                    return True
                chosen.pop()
        failed.add(free)
        return False

    if not rec(start):
        raise Infeasible(f"no perfect K_{{{t},{t}}}-tiling exists ({nodes} nodes searched)", stage="tiling",
                         witness={"nodes": nodes})
    return chosen


def perfect_ktt_tiling_bipartite(g: Graph, side_a: Iterable[int], side_b: Iterable[int], t: int,
                                 budget: int | None = 200_000) -> list[KttCopy]:
    """Cover A and B exactly by K_{t,t} copies with one side in each.

    Branches on the uncovered vertex with fewest neighbours across, trying
    t-sets with the largest common neighbourhood first.  :class:`Infeasible`
    certifies that the search was exhausted; :class:`NotFound` with
    ``exhausted=False`` means the budget ran out.
    """
    amask, bmask = to_mask(side_a), to_mask(side_b)
    na, nb = amask.bit_count(), bmask.bit_count()
    if amask & bmask:
        raise PreconditionError("sides must be disjoint")
    if na != nb or na % t:
        raise PreconditionError(f"sides of size {na} and {nb} cannot be tiled by K_{{{t},{t}}}")
    return _tile(g, amask, bmask, t, budget, "blow-up-tile")


def perfect_ktt_tiling(g: Graph, vertices: Iterable[int], t: int, budget: int | None = 200_000,
                       tag: str = "blow-up-tile") -> list[KttCopy]:
    """Cover ``vertices`` exactly by K_{t,t} copies of G, with no side constraint."""
    mask = to_mask(vertices)
    if mask.bit_count() % (2 * t):
        raise PreconditionError(f"{mask.bit_count()} vertices cannot be tiled by K_{{{t},{t}}}")
    return _tile(g, mask, None, t, budget, tag)
