"""The three auxiliary collections: exceptional cover, residue fixer, template copies."""

from __future__ import annotations

from collections import deque

from ..errors import CoverageError, InvariantError, NoEvenWalk, NotFound, ValidationError
from ..graph import Graph, members, to_mask
from ..matching import template_matching
from ..packing import KttCopy, copy_is_valid
from .biclique import find_biclique, find_split_biclique
from .clusters import ClusterSystem, SplitPlan

__all__ = [
    "cover_exceptional",
    "divisibility_target",
    "even_walk",
    "fix_divisibility",
    "template_parts",
    "template_counts",
    "build_template_ktt",
    "usage_per_half",
]


def _checked(g: Graph, copy: KttCopy, t: int) -> KttCopy:
    if not copy_is_valid(g, copy, t):
        raise InvariantError(f"constructed copy {copy} is not a K_{{{t},{t}}}")
    return copy


def usage_per_half(system: ClusterSystem, copies: list[KttCopy]) -> list[int]:
    where = system.half_of()
    counts = [0] * len(system.halves)
    for c in copies:
        for v in c.vertices:
            if v in where:
                counts[where[v]] += 1
    return counts


def cover_exceptional(g: Graph, system: ClusterSystem, split: SplitPlan, t: int) -> list[KttCopy]:
    """One copy per exceptional vertex v, with its other 2t-1 vertices in U^(1).

    t neighbours of v form one side; t-1 common neighbours of those join v
    on the other side.
    """
    free = to_mask(split.union(0))
    copies = []
    missing = []
    for v in system.exceptional:
        found = find_biclique(g, g.rows[v] & free, free, t, t - 1)
        if found is None:
            missing.append(v)
            continue
        side_a, side_b = found
        copy = _checked(g, KttCopy(tuple(side_a), tuple(side_b) + (v,), "K_1"), t)
        copies.append(copy)
        free &= ~to_mask(copy.vertices)
    if missing:
        raise CoverageError(f"{len(missing)} exceptional vertices left uncovered", stage="cover", witness=missing)
    return copies


def divisibility_target(system: ClusterSystem, copies: list[KttCopy], t: int) -> list[int]:
    """Residue f(h) = -|U_h meeting the copies| mod t for every half."""
    target = [(-k) % t for k in usage_per_half(system, copies)]
    if sum(target) % t:
        raise InvariantError(f"residues {target} do not sum to 0 mod {t}")
    if system.bipartite:
        xs = sum(f for h, f in enumerate(target) if _in_x(system, h))
        if xs % t:
            raise InvariantError(f"X-side residues {target} do not sum to 0 mod {t}")
    return target


def _in_x(system: ClusterSystem, h: int) -> bool:
    return bool((system.side_x >> system.halves[h][0]) & 1)


def even_walk(system: ClusterSystem, a: int, b: int) -> list[int]:
    """Shortest walk of even length from half a to half b, by BFS over (half, parity)."""
    n = len(system.halves)
    prev: dict[tuple[int, int], tuple[int, int]] = {(a, 0): (a, 0)}
    queue = deque([(a, 0)])
    while queue:
        h, p = queue.popleft()
        if (h, p) == (b, 0) and a != b:
            break
        for nxt in range(n):
            if system.halves_adjacent(h, nxt) and (nxt, 1 - p) not in prev:
                prev[(nxt, 1 - p)] = (h, p)
                queue.append((nxt, 1 - p))
    if (b, 0) not in prev:
        raise NoEvenWalk(f"no even walk from half {a} to half {b}", stage="divisibility")
    walk = [(b, 0)]
    while walk[-1] != (a, 0):
        walk.append(prev[walk[-1]])
    return [h for h, _ in reversed(walk)]


def fix_divisibility(g: Graph, system: ClusterSystem, split: SplitPlan, target: list[int], t: int) -> list[KttCopy]:
    """Copies in U^(2) meeting every half h in f(h) vertices modulo t.

    Residues are cleared in pairs (a, b) along an even walk a = i_0, ..., i_2l = b:
    the j-th copy has t vertices in i_{2j-1} and f(a), t - f(a) vertices in
    i_{2j-2}, i_{2j}.  That moves f(a) into a and -f(a) into b, leaving every
    inner half unchanged modulo t.
    """
    free = [to_mask(split.parts[h][1]) for h in range(len(system.halves))]
    residual = list(target)
    copies: list[KttCopy] = []
    support = sum(1 for f in target if f)
    while any(residual):
        a = next(h for h, f in enumerate(residual) if f)
        same_side = (lambda h: _in_x(system, h) == _in_x(system, a)) if system.bipartite else (lambda h: True)
        b = next((h for h in range(a + 1, len(residual)) if residual[h] and same_side(h)), None)
        if b is None:
            raise InvariantError(f"residue at half {a} has no partner", stage="divisibility")
        walk = even_walk(system, a, b)
        amount = residual[a]
        for j in range(1, len(walk) // 2 + 1):
            before, mid, after = walk[2 * j - 2], walk[2 * j - 1], walk[2 * j]
            parts = [(free[before], amount), (free[after], t - amount)]
            if before == after:
                parts = [(free[before], t)]
            found = find_split_biclique(system.g_prime, free[mid], t, parts)
            if found is None:
                raise NotFound(f"no residue copy around half {mid}", stage="divisibility")
            core, other = found
            copy = _checked(g, KttCopy(tuple(core), tuple(other), "K_2"), t)
            copies.append(copy)
            used = to_mask(copy.vertices)
            free = [f & ~used for f in free]
        residual[a] = 0
        residual[b] = (residual[b] + amount) % t

    usage = usage_per_half(system, copies)
    for h, k in enumerate(usage):
        if k % t != target[h]:
            raise InvariantError(f"half {h} meets {k} residue-copy vertices, expected {target[h]} mod {t}")
        if k > 3 * t * support:
            raise InvariantError(f"half {h} meets {k} residue-copy vertices, above {3 * t * support}")
    return copies


def template_parts(system: ClusterSystem, split: SplitPlan, copies: list[KttCopy], t: int) -> list[list[int]]:
    """U'^(3)_h: part 3 of h minus |U_h meeting the copies| / t vertices."""
    out = []
    for h, k in enumerate(usage_per_half(system, copies)):
        if k % t:
            raise InvariantError(f"half {h} meets {k} earlier copy vertices, not divisible by {t}")
        part = split.parts[h][2]
        if k // t > len(part):
            raise ValidationError(f"half {h} needs {k // t} removals from a part of {len(part)}", stage="template")
        out.append(part[: len(part) - k // t])
    return out


def template_counts(system: ClusterSystem, parts: list[list[int]]) -> tuple[list[tuple[int, int]], dict[tuple[int, int], int]]:
    """Perfect matching of G'[U'^(3)] and the number of its edges between each pair of halves."""
    keep = to_mask(v for p in parts for v in p)
    removed = [v for v in range(system.g_prime.n) if not (keep >> v) & 1]
    matching = template_matching(system.g_prime, removed)
    where = system.half_of()
    counts: dict[tuple[int, int], int] = {}
    for u, v in matching:
        key = tuple(sorted((where[u], where[v])))
        counts[key] = counts.get(key, 0) + 1
    for h, p in enumerate(parts):
        degree = sum(k for pair, k in counts.items() for x in pair if x == h)
        if degree != len(p):
            raise InvariantError(f"template meets half {h} {degree} times, expected {len(p)}")
    return matching, counts


def _anchored(gp: Graph, anchor: int, own: int, other: int, t: int) -> tuple[list[int], list[int]] | None:
    """Copy containing ``anchor`` with its side in ``own`` and the other side in ``other``."""
    found = find_biclique(gp, own & ~(1 << anchor), gp.rows[anchor] & other, t - 1, t)
    if found is None:
        return None
    return found[0] + [anchor], found[1]


def build_template_ktt(system: ClusterSystem, split: SplitPlan, counts: dict[tuple[int, int], int],
                       used: int, t: int, anchors: int = 10) -> list[KttCopy]:
    """f(h1, h2) copies between halves h1 and h2, preferring part 4 vertices.

    Each copy is first sought through the vertices with the fewest unused
    neighbours in their matched half, so the pairs left for the final tiling
    keep well-connected vertices.  When part 4 runs dry the search widens to
    every unused vertex of the half.
    """
    gp = system.g_prime
    partner = {}
    for h1, h2 in system.pairs:
        partner[h1], partner[h2] = h2, h1
    part4 = [to_mask(split.parts[h][3]) for h in range(len(system.halves))]
    whole = [to_mask(half) for half in system.halves]
    copies = []

    def weakness(v: int, h: int) -> int:
        return gp.degree(v, whole[partner[h]] & ~used)

    def place(h1: int, h2: int, pools: list[int]) -> tuple[list[int], list[int]] | None:
        p1, p2 = pools[h1] & ~used, pools[h2] & ~used
        ranked = sorted([(weakness(v, h1), v, 0) for v in members(p1)] + [(weakness(v, h2), v, 1) for v in members(p2)])
        for _, v, side in ranked[:anchors]:
            if side == 0:
                found = _anchored(gp, v, p1, p2, t)
            else:
                found = _anchored(gp, v, p2, p1, t)
                found = None if found is None else (found[1], found[0])
            if found is not None:
                return found
        return find_biclique(gp, p1, p2, t, t)

    for (h1, h2), k in sorted(counts.items(), key=lambda item: (-item[1], item[0])):
        for _ in range(k):
            found = place(h1, h2, part4) or place(h1, h2, whole)
            if found is None:
                raise NotFound(f"no template copy between halves {h1} and {h2}", stage="template")
            copy = _checked(gp, KttCopy(tuple(found[0]), tuple(found[1]), "K_3"), t)
            copies.append(copy)
            used |= to_mask(copy.vertices)
    return copies
