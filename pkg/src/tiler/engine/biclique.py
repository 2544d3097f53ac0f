"""Complete bipartite subgraph search."""

from __future__ import annotations

from typing import Iterable

from ..errors import NotFound, PreconditionError
from ..graph import Graph, members, to_mask

__all__ = ["find_biclique", "find_ktt_unbalanced", "find_split_biclique"]


def _mask(vs: Iterable[int] | int) -> int:
    return vs if isinstance(vs, int) else to_mask(vs)


def find_biclique(
    g: Graph, left: Iterable[int] | int, right: Iterable[int] | int, a: int, b: int, budget: int | None = None
) -> tuple[list[int], list[int]] | None:
    """A from ``left`` (size a) and B from ``right`` (size b), complete to each other.

    B is grown one vertex at a time, trying vertices whose neighbourhood keeps
    the largest common neighbourhood in ``left`` first, and pruning as soon as
    fewer than ``a`` common neighbours remain.  Returns None when no such pair
    exists; raises :class:`NotFound` if ``budget`` search nodes run out.
    """
    lmask, rmask = _mask(left), _mask(right)
    if b == 0:
        pool = members(lmask)
        return (pool[:a], []) if len(pool) >= a else None
    rows = g.rows
    cands = [y for y in members(rmask) if (rows[y] & lmask).bit_count() >= a]
    cands.sort(key=lambda y: (-(rows[y] & lmask).bit_count(), y))
    nodes = 0
    chosen: list[int] = []

    def rec(start: int, common: int):
        nonlocal nodes
        if len(chosen) == b:
            pool = members(common)
            return pool[:a], sorted(chosen)
        order = sorted(range(start, len(cands)), key=lambda k: -(rows[cands[k]] & common).bit_count())
        for k in order:
            y = cands[k]
            nxt = common & rows[y]
            if nxt.bit_count() < a:
                continue
            nodes += 1
            if budget is not None and nodes > budget:
                raise NotFound("biclique search budget exhausted", exhausted=False)
            chosen.append(y)
            found = rec(k + 1, nxt)
            if found:
                return found
            chosen.pop()
        return None

    return rec(0, lmask)


def find_split_biclique(
    g: Graph, core: Iterable[int] | int, core_size: int, parts: list[tuple[Iterable[int] | int, int]]
) -> tuple[list[int], list[int]] | None:
    """Biclique whose second side takes ``count`` vertices from each listed part.

    Returns (core side, other side) or None.
    """
    cmask = _mask(core)
    rows = g.rows
    plan = [(_mask(p), k) for p, k in parts]
    chosen: list[int] = []

    def rec(idx: int, start_after: int, taken: int, common: int, used: int):
        if idx == len(plan):
            pool = members(common & ~used)
            return (pool[:core_size], sorted(chosen)) if len(pool) >= core_size else None
        pmask, k = plan[idx]
        if taken == k:
            return rec(idx + 1, -1, 0, common, used)
        opts = [y for y in members(pmask & ~used) if y > start_after]
        opts.sort(key=lambda y: -(rows[y] & common).bit_count())
        for y in opts:
            nxt = common & rows[y]
            if (nxt & ~used).bit_count() < core_size:
                continue
            chosen.append(y)
            found = rec(idx, y, taken + 1, nxt, used | 1 << y)
            if found:
                return found
            chosen.pop()
        return None

    return rec(0, -1, 0, cmask, 0)


def find_ktt_unbalanced(g: Graph, side_x: Iterable[int], side_y: Iterable[int], t: int,
                        min_degree: float | None = None) -> tuple[list[int], list[int]]:
    """A K_{t,t} with one side in X and the other in Y.

    Every X vertex must have at least one Y neighbour (or ``min_degree``
    neighbours when given); otherwise :class:`PreconditionError`.  The search
    is exact, so :class:`NotFound` means no such subgraph exists.
    """
    xmask, ymask = to_mask(side_x), to_mask(side_y)
    if xmask & ymask:
        raise PreconditionError("X and Y must be disjoint")
    floor = 1 if min_degree is None else min_degree
    for x in members(xmask):
        if g.degree(x, ymask) < floor:
            raise PreconditionError(f"vertex {x} has only {g.degree(x, ymask)} neighbours in Y")
    found = find_biclique(g, xmask, ymask, t, t)
    if found is None:
        raise NotFound(f"no K_{{{t},{t}}} between X and Y", exhausted=True)
    return found
