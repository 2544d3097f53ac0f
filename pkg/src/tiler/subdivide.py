"""Perfect packings of subdivisions of a small pattern graph.

Each class receives two disjoint subdivisions; one of them then swallows a
balancing path and every remaining class vertex through a Hamilton path.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .decompose import Decomposition, Label, expander_decompose
from .errors import (
    BudgetError,
    InvariantError,
    NotFound,
    PreconditionError,
    SearchExhausted,
    TilingError,
    ValidationError,
)
from .graph import Graph, members, to_mask
from .hamilton import hamilton_path, robust_short_path
from .params import ParamPack

__all__ = [
    "Subdivision",
    "SubdivisionPacking",
    "subdivision_is_valid",
    "working_graph",
    "balancing_linear_forest",
    "merge_to_paths",
    "subdivision_pair",
    "absorb",
    "single_subdivision",
    "pack_subdivisions",
    "MAX_PATTERN_ORDER",
]

MAX_PATTERN_ORDER = 8


@dataclass
class Subdivision:
    """A copy of a subdivided pattern.

    ``branch[f]`` is the host vertex of pattern vertex f and ``paths[k]`` is
    the host path of the k-th pattern edge, running from the image of its
    smaller end to the image of its larger end.
    """

    pattern: Graph
    branch: dict[int, int]
    paths: list[list[int]]

    def vertices(self) -> set[int]:
        out = set(self.branch.values())
        for p in self.paths:
            out.update(p)
        return out

    def to_json(self) -> dict:
        return {"branch": {str(k): v for k, v in sorted(self.branch.items())}, "paths": [list(p) for p in self.paths]}

    @classmethod
    def from_json(cls, pattern: Graph, data: dict) -> "Subdivision":
        return cls(pattern, {int(k): int(v) for k, v in data["branch"].items()}, [list(p) for p in data["paths"]])


@dataclass
class SubdivisionPacking:
    pattern: Graph
    subdivisions: list[Subdivision] = field(default_factory=list)
    report: dict = field(default_factory=dict)

    def covered(self) -> list[int]:
        return sorted(v for s in self.subdivisions for v in s.vertices())

    def to_json(self) -> dict:
        return {"pattern": [list(e) for e in self.pattern.edges()], "order": self.pattern.n,
                "subdivisions": [s.to_json() for s in self.subdivisions]}

    @classmethod
    def from_json(cls, data: dict) -> "SubdivisionPacking":
        edges = [tuple(e) for e in data["pattern"]]
        order = data.get("order", 1 + max((v for e in edges for v in e), default=-1))
        pattern = Graph(order, edges)
        return cls(pattern, [Subdivision.from_json(pattern, s) for s in data["subdivisions"]])


def subdivision_is_valid(g: Graph, sub: Subdivision) -> bool:
    f = sub.pattern
    images = [sub.branch.get(v) for v in range(f.n)]
    if None in images or len(set(images)) != f.n:
        return False
    pattern_edges = f.edges()
    if len(sub.paths) != len(pattern_edges):
        return False
    seen = set(images)
    for (a, b), path in zip(pattern_edges, sub.paths):
        if len(path) < 2 or path[0] != images[a] or path[-1] != images[b]:
            return False
        if any(not g.has_edge(u, v) for u, v in zip(path, path[1:])):
            return False
        for v in path[1:-1]:
            if v in seen:
                return False
            seen.add(v)
    return True


def _side_masks(dec: Decomposition, i: int) -> tuple[int, int]:
    xs, ys = dec.sides[i]
    return to_mask(xs), to_mask(ys)


def _bipartite(dec: Decomposition, i: int) -> bool:
    return dec.labels[i] == Label.ALMOST_BIPARTITE


def working_graph(g: Graph, dec: Decomposition) -> Graph:
    """G minus every edge inside a side of an almost-bipartite class."""
    drop = []
    for i in range(dec.r):
        if _bipartite(dec, i):
            for side in dec.sides[i]:
                mask = to_mask(side)
                drop += [(u, v) for u in side for v in members(g.rows[u] & mask) if u < v]
    return g.without_edges(drop)


# --- balancing paths --------------------------------------------------------


def _balancing_path(g: Graph, gp: Graph, zone: int, heavy: int, light: int, excess: int,
                    used: int, delta: float) -> list[int]:
    """Path with one end on each side holding ``excess`` more heavy-side vertices.

    It strings together ``excess`` disjoint heavy-side edges of G by
    cross-side connectors in G' and ends with one step into the light side.
    """
    rows = g.rows
    free = zone & ~used
    chosen: list[tuple[int, int]] = []
    for u in members(heavy & free):
        if len(chosen) == excess:
            break
        if not (free >> u) & 1:
            continue
        mates = rows[u] & heavy & free & ~(1 << u)
        if mates:
            v = members(mates)[0]
            chosen.append((u, v))
            free &= ~((1 << u) | (1 << v))
    if len(chosen) < excess:
        raise BudgetError(f"only {len(chosen)} disjoint same-side edges for an excess of {excess}", stage="forest")
    path = [chosen[0][0], chosen[0][1]]
    blocked = used | to_mask(v for e in chosen for v in e)
    sides = (heavy, light)
    for u, v in chosen[1:]:
        link = robust_short_path(gp, zone, sides, path[-1], u, avoid=blocked & ~(1 << path[-1]) & ~(1 << u), delta=delta)
        path += link[1:] + [v]
        blocked |= to_mask(link)
    tail = members(rows[path[-1]] & light & zone & ~blocked)
    if not tail:
        raise NotFound(f"no light-side neighbour to close the path at {path[-1]}", stage="forest")
    return path + [tail[0]]


def balancing_linear_forest(g: Graph, dec: Decomposition, params: ParamPack | None = None) -> list[list[int]]:
    """Vertex-disjoint paths leaving every almost-bipartite class with equal sides.

    Each unbalanced class gets one path with an end on each side; its vertex
    count is at most xi n or :class:`BudgetError` is raised.
    """
    params = params or dec.params
    gp = working_graph(g, dec)
    forest: list[list[int]] = []
    used = 0
    for i, zone in enumerate(dec.classes):
        if not _bipartite(dec, i):
            continue
        xm, ym = _side_masks(dec, i)
        excess = xm.bit_count() - ym.bit_count()
        if excess == 0:
            continue
        heavy, light = (xm, ym) if excess > 0 else (ym, xm)
        path = _balancing_path(g, gp, to_mask(zone), heavy, light, abs(excess), used, params.delta)
        forest.append(path)
        used |= to_mask(path)
    _check_forest(g, dec, forest, params)
    return forest


def _leaves(forest: list[list[int]]) -> list[int]:
    return [v for p in forest for v in (p[0], p[-1])]


def _check_forest(g: Graph, dec: Decomposition, forest: list[list[int]], params: ParamPack) -> None:
    n = g.n
    size = sum(len(p) for p in forest)
    if size > params.xi * n:
        raise BudgetError(f"forest has {size} vertices, above xi*n = {params.xi * n:g}", stage="forest")
    allv = [v for p in forest for v in p]
    if len(allv) != len(set(allv)):
        raise InvariantError("forest paths overlap")
    if any(len(p) < 2 for p in forest):
        raise InvariantError("forest has an isolated vertex")
    for p in forest:
        if any(not g.has_edge(u, v) for u, v in zip(p, p[1:])):
            raise InvariantError("forest path uses a non-edge")
    cls = dec.class_of(n)
    leaves = _leaves(forest)
    vmask = to_mask(allv)
    for i in range(dec.r):
        inside = [v for v in leaves if cls[v] == i]
        if len(inside) not in (0, 2):
            raise InvariantError(f"class {i} holds {len(inside)} forest leaves")
        if _bipartite(dec, i):
            xm, ym = _side_masks(dec, i)
            if inside and ((xm >> inside[0]) & 1) == ((xm >> inside[1]) & 1):
                raise InvariantError(f"class {i} forest leaves lie on the same side")
            if (xm & ~vmask).bit_count() != (ym & ~vmask).bit_count():
                raise InvariantError(f"class {i} is not balanced by the forest")


def merge_to_paths(g: Graph, dec: Decomposition, forest: list[list[int]], params: ParamPack | None = None) -> list[list[int]]:
    """One path P_i per class with both ends in the class (one per side when almost bipartite).

    Two components ending in the same class are joined by a shortest path in
    G'[Z_i]; a class without leaves gets an unused edge of G'[Z_i].
    """
    params = params or dec.params
    gp = working_graph(g, dec)
    cls = dec.class_of(g.n)
    comps = [list(p) for p in forest]
    owner: list[int | None] = [None] * dec.r
    for i, zone in enumerate(dec.classes):
        ends = [(k, end) for k, p in enumerate(comps) for end in (0, -1) if cls[p[end]] == i]
        if len({k for k, _ in ends}) == 2:
            (ka, ea), (kb, eb) = ends
            pa = comps[ka] if ea == -1 else comps[ka][::-1]
            pb = comps[kb] if eb == 0 else comps[kb][::-1]
            used = to_mask(v for p in comps for v in p)
            sides = _side_masks(dec, i) if _bipartite(dec, i) else None
            link = robust_short_path(gp, to_mask(zone), sides, pa[-1], pb[0],
                                     avoid=used & ~(1 << pa[-1]) & ~(1 << pb[0]), delta=params.delta)
            merged = pa + link[1:-1] + pb
            comps = [p for k, p in enumerate(comps) if k not in (ka, kb)] + [merged]
    paths: list[list[int] | None] = [None] * dec.r
    for p in comps:
        if cls[p[0]] == cls[p[-1]]:
            paths[cls[p[0]]] = p
    used = to_mask(v for p in comps for v in p)
    for i, zone in enumerate(dec.classes):
        if paths[i] is not None:
            continue
        zmask = to_mask(zone) & ~used
        edge = next(((u, v) for u in members(zmask) for v in members(gp.rows[u] & zmask) if u < v), None)
        if edge is None:
            raise NotFound(f"class {i} has no free edge for its path", stage="paths")
        paths[i] = list(edge)
        used |= to_mask(edge)
    out = [p for p in paths if p is not None]
    if len(out) != dec.r:
        raise InvariantError("some class has no path")

    limit = max(2, params.xi * g.n + 15 * dec.r / params.delta)
    qmask = to_mask(v for p in out for v in p)
    for i, p in enumerate(out):
        if not 2 <= len(p) <= limit:
            raise InvariantError(f"path {i} has {len(p)} vertices, allowed 2..{limit:g}")
        if cls[p[0]] != i or cls[p[-1]] != i:
            raise InvariantError(f"path {i} does not end inside its class")
        if _bipartite(dec, i):
            xm, ym = _side_masks(dec, i)
            if ((xm >> p[0]) & 1) == ((xm >> p[-1]) & 1):
                raise InvariantError(f"path {i} ends on one side only")
            if (xm & ~qmask).bit_count() != (ym & ~qmask).bit_count():
                raise InvariantError(f"class {i} unbalanced after removing the paths")
    return out


# --- subdivisions -------------------------------------------------------------


def _connect(gp: Graph, zone: int, sides, pattern: Graph, images: list[int], blocked: int,
             delta: float) -> tuple[list[list[int]], int]:
    paths = []
    for a, b in pattern.edges():
        s, s2 = images[a], images[b]
        try:
            p = robust_short_path(gp, zone, sides, s, s2, avoid=blocked, delta=delta)
        except SearchExhausted as exc:
            raise NotFound(f"no short path for pattern edge {a}-{b}", stage="subdivision", witness=(s, s2)) from exc
        except ValidationError as exc:
            raise NotFound(f"pattern edge {a}-{b} needs a long path: {exc}", stage="subdivision",
                           witness=(s, s2)) from exc
        paths.append(p)
        blocked |= to_mask(p[1:-1])
    return paths, blocked


def _pattern_check(pattern: Graph) -> None:
    if pattern.num_edges == 0:
        raise PreconditionError("pattern needs at least one edge")
    if pattern.n > MAX_PATTERN_ORDER:
        raise PreconditionError(f"pattern has {pattern.n} vertices, limit {MAX_PATTERN_ORDER}")


def subdivision_pair(gp: Graph, zone: list[int], sides: tuple[list[int], list[int]] | None, pattern: Graph,
                     avoid: list[int] | int, delta: float) -> tuple[Subdivision, Subdivision]:
    """Two disjoint subdivisions inside ``zone`` avoiding ``avoid``.

    Branch vertices of the first come from X and of the second from Y when
    ``sides`` is given.  Both then contain |V(F)| - e(F) more vertices of
    their own side, so together they are balanced.
    """
    _pattern_check(pattern)
    zmask = to_mask(zone)
    amask = avoid if isinstance(avoid, int) else to_mask(avoid)
    free = zmask & ~amask
    k = pattern.n
    if sides is None:
        pool = members(free)
        if len(pool) < 2 * k:
            raise PreconditionError(f"only {len(pool)} free vertices for two branch sets of {k}")
        first, second = pool[:k], pool[k:2 * k]
        side_masks = None
    else:
        xm, ym = to_mask(sides[0]), to_mask(sides[1])
        px, py = members(free & xm), members(free & ym)
        if len(px) < k or len(py) < k:
            raise PreconditionError("not enough free vertices on a side for the branch sets")
        first, second = px[:k], py[:k]
        side_masks = (xm, ym)
    blocked = amask | to_mask(first) | to_mask(second)
    paths_a, blocked = _connect(gp, zmask, side_masks, pattern, first, blocked, delta)
    paths_b, blocked = _connect(gp, zmask, side_masks, pattern, second, blocked, delta)
    sub_a = Subdivision(pattern, dict(enumerate(first)), paths_a)
    sub_b = Subdivision(pattern, dict(enumerate(second)), paths_b)
    limit = pattern.num_edges * 15 / delta
    for sub in (sub_a, sub_b):
        if len(sub.vertices()) > limit:
            raise InvariantError(f"subdivision has {len(sub.vertices())} vertices, above {limit:g}")
        if not subdivision_is_valid(gp, sub):
            raise InvariantError("constructed subdivision is invalid")
    if sides is not None:
        xm = side_masks[0]
        both = sub_a.vertices() | sub_b.vertices()
        skew = sum(1 if (xm >> v) & 1 else -1 for v in both)
        if skew:
            raise InvariantError(f"subdivision pair has side skew {skew}")
    return sub_a, sub_b


def single_subdivision(gp: Graph, zone: list[int], pattern: Graph, avoid: list[int] | int,
                       delta: float) -> Subdivision:
    """One subdivision inside ``zone`` avoiding ``avoid``, branch vertices taken in label order."""
    _pattern_check(pattern)
    amask = avoid if isinstance(avoid, int) else to_mask(avoid)
    pool = members(to_mask(zone) & ~amask)
    if len(pool) < pattern.n:
        raise PreconditionError(f"only {len(pool)} free vertices for {pattern.n} branch vertices")
    images = pool[: pattern.n]
    paths, _ = _connect(gp, to_mask(zone), None, pattern, images, amask | to_mask(images), delta)
    sub = Subdivision(pattern, dict(enumerate(images)), paths)
    if not subdivision_is_valid(gp, sub):
        raise InvariantError("constructed subdivision is invalid")
    return sub


def _replaced_edge(sub: Subdivision, side_x: int | None) -> tuple[int, int, int]:
    """(path index, x, y) for the lexicographically first edge, x on the X side when sides exist."""
    options = []
    for k, p in enumerate(sub.paths):
        for u, v in zip(p, p[1:]):
            a, b = min(u, v), max(u, v)
            if side_x is None:
                options.append(((a, b), k, a, b))
            elif ((side_x >> a) & 1) != ((side_x >> b) & 1):
                x, y = (a, b) if (side_x >> a) & 1 else (b, a)
                options.append(((a, b), k, x, y))
    if not options:
        raise PreconditionError("subdivision has no edge across the sides")
    _, k, x, y = min(options)
    return k, x, y


def absorb(gp: Graph, zone: list[int], sides: tuple[list[int], list[int]] | None, sub: Subdivision,
           other: Subdivision | None, path: list[int], all_paths: list[list[int]], delta: float,
           budget: int = 10**7) -> Subdivision:
    """Replace an edge xy of ``sub`` by x ~ v, then ``path`` from v to u, then u ~ y.

    u ~ y is a shortest connector avoiding every path and both subdivisions;
    x ~ v is a Hamilton path through every class vertex not yet used.  The
    result together with ``other`` covers (zone minus the paths) plus ``path``.
    """
    zmask = to_mask(zone)
    side_x = to_mask(sides[0]) if sides is not None else None
    u, v = path[0], path[-1]
    if side_x is not None and not (side_x >> u) & 1:
        u, v = v, u
        path = path[::-1]
    k, x, y = _replaced_edge(sub, side_x)
    qmask = to_mask(w for p in all_paths for w in p)
    taken = qmask | to_mask(sub.vertices()) | (to_mask(other.vertices()) if other else 0)
    side_masks = None if sides is None else (to_mask(sides[0]), to_mask(sides[1]))
    try:
        connector = robust_short_path(gp, zmask, side_masks, y, u, avoid=taken & ~(1 << y) & ~(1 << u), delta=delta)
    except TilingError as exc:
        raise NotFound(f"no connector from {y} to {u}: {exc}", stage="absorb") from exc
    wset = (zmask & (taken | to_mask(connector))) & ~(1 << x) & ~(1 << v)
    if side_masks is not None:
        xm, ym = side_masks
        left = zmask & ~wset
        if (left & xm).bit_count() != (left & ym).bit_count():
            raise PreconditionError("absorption set leaves the class unbalanced")
    try:
        ham = hamilton_path(gp, x, v, avoid=~zmask & ((1 << gp.n) - 1) | wset, budget=budget, sides=side_masks)
    except NotFound as exc:
        raise NotFound(f"absorption failed: {exc}", stage="absorb", witness=(x, v)) from exc
    # path is oriented u ... v; walk it from v back to u, then follow the connector to y
    segment = ham + path[::-1][1:] + connector[::-1][1:]
    p = sub.paths[k]
    j = next(j for j in range(len(p) - 1) if {p[j], p[j + 1]} == {x, y})
    if p[j] == x:
        new = p[:j] + segment + p[j + 2:]
    else:
        new = p[:j] + segment[::-1] + p[j + 2:]
    paths = [list(q) for q in sub.paths]
    paths[k] = new
    out = Subdivision(sub.pattern, dict(sub.branch), paths)
    if not subdivision_is_valid(gp, out):
        raise InvariantError("absorbed subdivision is invalid")
    expect = (zmask & ~qmask) | to_mask(path)
    got = to_mask(out.vertices()) | (to_mask(other.vertices()) if other else 0)
    if got != expect:
        raise InvariantError("absorbed subdivisions do not cover the class exactly")
    return out


def pack_subdivisions(g: Graph, pattern: Graph, params: ParamPack | None = None, seed: int = 0,
                      dec: Decomposition | None = None) -> SubdivisionPacking:
    """Perfect packing of G by subdivisions of ``pattern``.

    Classes too small for two subdivisions plus a path, or where the pair
    route fails, fall back to a single subdivision that absorbs everything.
    """
    _pattern_check(pattern)
    if g.regular_degree() is None:
        raise PreconditionError("host graph is not regular")
    params = params or ParamPack.for_density(g.regular_degree() / g.n)
    dec = dec or expander_decompose(g, params, seed=seed)
    gp = working_graph(g, dec)
    forest = balancing_linear_forest(g, dec, params)
    paths = merge_to_paths(g, dec, forest, params)
    qmask = to_mask(v for p in paths for v in p)
    subs: list[Subdivision] = []
    routes = []
    for i, zone in enumerate(dec.classes):
        sides = dec.sides[i] if _bipartite(dec, i) else None
        try:
            first, second = subdivision_pair(gp, zone, sides, pattern, qmask, params.delta)
            first = absorb(gp, zone, sides, first, second, paths[i], paths, params.delta)
            subs += [first, second]
            routes.append("pair")
        except (PreconditionError, SearchExhausted) as exc:
            try:
                lone = single_subdivision(gp, zone, pattern, qmask, params.delta)
                lone = absorb(gp, zone, sides, lone, None, paths[i], paths, params.delta)
            except (PreconditionError, SearchExhausted) as inner:
                raise NotFound(f"class {i}: pair route failed ({exc}); single route failed ({inner})",
                               stage="absorb", witness=i) from inner
            subs.append(lone)
            routes.append("single")
    packing = SubdivisionPacking(pattern, subs, {"classes": dec.r, "routes": routes,
                                                  "forest_vertices": sum(len(p) for p in forest)})
    covered = packing.covered()
    if covered != list(range(g.n)):
        raise InvariantError(f"packing covers {len(set(covered))} of {g.n} vertices "
                             f"({len(covered) - len(set(covered))} repeats)")
    for s in subs:
        if not subdivision_is_valid(g, s):
            raise InvariantError("packing holds an invalid subdivision")
    return packing
