"""Balancing the sides of every class before the classes are packed.

Each class Z_i carries sides (X_i, Y_i).  The auxiliary graph H keeps the
edges that spoil balance: all edges between classes plus the surplus of
in-side edges of the heavier side.  For a d-regular G every class satisfies

    (e_H(X,Z^c) - e_H(Y,Z^c)) + 2 (e_H(X) - e_H(Y)) - d (|X| - |Y|) = 0,

and the vertex moves below keep this identity while shrinking H.  The
remaining imbalance is absorbed by a few K_{t,t} copies with a known skew,
and the last few vertices are discarded so that every class ends balanced.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .decompose import Decomposition, Label, find_sparse_cut, max_cut_bipartition
from .engine.biclique import find_biclique
from .errors import BudgetError, InvariantError, PreconditionError, SearchExhausted, ValidationError
from .graph import Graph, members, to_mask, two_coloring
from .packing import KttCopy
from .params import ParamPack

__all__ = [
    "BalanceState",
    "StepRecord",
    "TrimResult",
    "build_inter_class_graph",
    "balance_identity",
    "move_step",
    "move_high_degree_vertices",
    "build_balancing_ktt_collection",
    "trim_to_balance",
]

SIDE_NAMES = "XY"


@dataclass
class BalanceState:
    """Mutable balancing state.

    ``sides[i]`` is ``[X_i, Y_i]`` as bitmasks; ``h_rows`` are the rows of H.
    """

    g: Graph
    d: int
    params: ParamPack
    sides: list[list[int]]
    h_rows: list[int]
    labels: list[Label]
    start_sides: list[tuple[int, int]]
    moved: set[int] = field(default_factory=set)
    log: list[str] = field(default_factory=list)
    h_start_edges: int = 0
    h_start_max_degree: int = 0

    @property
    def r(self) -> int:
        return len(self.sides)

    def zone(self, i: int) -> int:
        return self.sides[i][0] | self.sides[i][1]

    def h_graph(self) -> Graph:
        return Graph.from_rows(self.h_rows)

    def h_edges(self) -> int:
        return sum(r.bit_count() for r in self.h_rows) // 2

    def h_max_degree(self) -> int:
        return max((r.bit_count() for r in self.h_rows), default=0)

    def e_h(self, a: int, b: int) -> int:
        """H-edges between masks a and b (inside a when a == b)."""
        if a == b:
            return sum((self.h_rows[v] & a).bit_count() for v in members(a)) // 2
        if a & b:
            raise PreconditionError("overlapping masks")
        return sum((self.h_rows[v] & b).bit_count() for v in members(a))

    def copy(self) -> "BalanceState":
        return BalanceState(
            self.g, self.d, self.params, [list(s) for s in self.sides], list(self.h_rows), list(self.labels),
            list(self.start_sides), set(self.moved), list(self.log), self.h_start_edges, self.h_start_max_degree,
        )


def balance_identity(state: BalanceState, i: int) -> int:
    """Left-hand side of the balancing identity for class i (zero when it holds)."""
    x, y = state.sides[i]
    rest = ((1 << state.g.n) - 1) & ~(x | y)
    return (
        state.e_h(x, rest) - state.e_h(y, rest)
        + 2 * (state.e_h(x, x) - state.e_h(y, y))
        - state.d * (x.bit_count() - y.bit_count())
    )


def _check_invariants(state: BalanceState, bounds: bool) -> None:
    for i in range(state.r):
        value = balance_identity(state, i)
        if value != 0:
            raise InvariantError(f"balance identity fails for class {i}: {value}")
        x, y = state.sides[i]
        if state.e_h(x, y):
            raise InvariantError(f"H has edges between the sides of class {i}")
    if bounds:
        n = state.g.n
        cap = state.d - math.floor(state.params.delta * n / 3)
        if state.h_max_degree() > cap:
            raise InvariantError(f"max degree of H {state.h_max_degree()} exceeds {cap}")


def _lowest_edges(rows: list[int], mask: int, count: int) -> list[tuple[int, int]]:
    out: list[tuple[int, int]] = []
    if count <= 0:
        return out
    for a in members(mask):
        for b in members(rows[a] & mask & ~((1 << (a + 1)) - 1)):
            out.append((a, b))
            if len(out) == count:
                return out
    return out


def _random_sides(g: Graph, zone: list[int], params: ParamPack, rng: np.random.Generator) -> tuple[list[int], list[int]]:
    n = g.n
    best = None
    for _ in range(50):
        perm = [zone[k] for k in rng.permutation(len(zone))]
        half = len(zone) // 2
        xs, ys = sorted(perm[:half]), sorted(perm[half:])
        xm, ym = to_mask(xs), to_mask(ys)
        g1 = abs(g.edges_within(xm) - g.edges_within(ym))
        cross_min = min(min(g.degree(v, ym) for v in xs), min(g.degree(v, xm) for v in ys)) if xs and ys else 0
        if g1 <= params.beta * n * n and cross_min >= params.delta * n / 3:
            return xs, ys
        if best is None:
            best = (g1, cross_min)
    raise ValidationError(
        f"no random partition met the side-balance conditions in 50 draws (first draw: |e(X)-e(Y)|={best[0]}, "
        f"min cross degree={best[1]})"
    )


def build_inter_class_graph(
    g: Graph,
    dec: Decomposition,
    params: ParamPack | None = None,
    seed: int = 0,
    sample_far: bool = True,
    enforce_bounds: bool = True,
) -> BalanceState:
    """Sides for every class and the graph H of balance-spoiling edges.

    Almost-bipartite classes keep their decomposition sides.  Far classes get
    a random balanced split (up to 50 draws) with |e(X) - e(Y)| <= beta n^2
    and cross-degree at least delta n / 3, unless ``sample_far`` is False.
    H is G minus all X_i-Y_i edges and minus the min(e(X_i), e(Y_i))
    lowest in-side edges on each side.  With ``enforce_bounds`` the maximum
    degree and edge count of H are checked as well as the identity.
    """
    params = params or dec.params
    d = g.regular_degree()
    if d is None:
        raise PreconditionError("graph is not regular")
    rng = np.random.default_rng(seed)
    sides = []
    for i, zone in enumerate(dec.classes):
        given = dec.sides[i]
        if dec.labels[i] == Label.FAR_FROM_BIPARTITE and sample_far:
            xs, ys = _random_sides(g, zone, params, rng)
        else:
            if given is None:
                raise PreconditionError(f"class {i} needs sides")
            xs, ys = given
        if set(xs) | set(ys) != set(zone) or set(xs) & set(ys):
            raise PreconditionError(f"sides of class {i} do not partition it")
        sides.append([to_mask(xs), to_mask(ys)])
    rows = list(g.rows)
    for xm, ym in sides:
        for v in members(xm):
            rows[v] &= ~ym
        for v in members(ym):
            rows[v] &= ~xm
    for xm, ym in sides:
        k = min(g.edges_within(xm), g.edges_within(ym))
        for mask in (xm, ym):
            for a, b in _lowest_edges(rows, mask, k):
                rows[a] &= ~(1 << b)
                rows[b] &= ~(1 << a)
    state = BalanceState(g, d, params, sides, rows, list(dec.labels), [tuple(s) for s in sides])
    state.h_start_edges = state.h_edges()
    state.h_start_max_degree = state.h_max_degree()
    _check_invariants(state, enforce_bounds)
    if enforce_bounds:
        bound = 2 * state.r * params.beta * g.n**2
        if state.h_start_edges > bound:
            raise InvariantError(f"H has {state.h_start_edges} edges, bound {bound:g}")
    return state


@dataclass(frozen=True)
class StepRecord:
    vertex: int
    src: tuple[int, int]
    dst: tuple[int, int]
    removed: tuple[tuple[int, int], ...]
    h_degree: int
    h_edges_after: int


def move_step(state: BalanceState, check: bool = True) -> StepRecord | None:
    """Perform the first qualifying high-degree move, or return None.

    Tuples (i, j, W_i, W_j, v) are scanned in lexicographic order; a tuple
    qualifies when v in W_i has at least rho n H-neighbours in W_j and
    e_H(W_i, W_j) >= d.  Then d - d_H(v) lowest H-edges of
    H[W_i - v, W_j - v] and every H-edge from v to W_j are deleted, and v
    moves to the other side of class j.
    """
    h = state.h_rows
    d = state.d
    threshold = state.params.rho * state.g.n
    for i in range(state.r):
        for j in range(state.r):
            for si in (0, 1):
                for sj in (0, 1):
                    if i == j and si != sj:
                        continue
                    wi, wj = state.sides[i][si], state.sides[j][sj]
                    if state.e_h(wi, wj) < d:
                        continue
                    for v in members(wi):
                        if (h[v] & wj).bit_count() >= threshold:
                            return _apply_move(state, v, i, si, j, sj, check)
    return None


def _apply_move(state: BalanceState, v: int, i: int, si: int, j: int, sj: int, check: bool) -> StepRecord:
    h = state.h_rows
    wi, wj = state.sides[i][si], state.sides[j][sj]
    deg_v = h[v].bit_count()
    need = state.d - deg_v
    bit = 1 << v
    a_mask, b_mask = wi & ~bit, wj & ~bit
    if i == j:
        removed = _lowest_edges(h, a_mask, need)
    else:
        cand = sorted((min(a, b), max(a, b)) for a in members(a_mask) for b in members(h[a] & b_mask))
        removed = cand[:need]
    if len(removed) < need:
        raise InvariantError(f"only {len(removed)} removable edges, needed {need}")
    for a, b in removed:
        h[a] &= ~(1 << b)
        h[b] &= ~(1 << a)
    for u in members(h[v] & wj):
        h[u] &= ~bit
    h[v] &= ~wj
    state.sides[i][si] &= ~bit
    state.sides[j][1 - sj] |= bit
    state.moved.add(v)
    record = StepRecord(v, (i, si), (j, 1 - sj), tuple(removed), deg_v, state.h_edges())
    state.log.append(
        f"step {len(state.log) + 1}: v={v} from ({i},{SIDE_NAMES[si]}) to ({j},{SIDE_NAMES[1 - sj]}) "
        f"|E_ij|={len(removed)} e(H)={record.h_edges_after}"
    )
    if check:
        _check_invariants(state, True)
    return record


def move_high_degree_vertices(state: BalanceState, check: bool = True) -> BalanceState:
    """Run high-degree moves until none qualifies (mutates and returns ``state``).

    Afterwards every side pair has e_H < d or H-degrees below rho n, the step
    count is at most e(H_start) / (d - Delta(H_start)), and the number of
    moved vertices is at most 6 r beta n / delta.
    """
    steps = 0
    while move_step(state, check) is not None:
        steps += 1
    n = state.g.n
    threshold = state.params.rho * n
    for i in range(state.r):
        for j in range(state.r):
            for si in (0, 1):
                for sj in (0, 1):
                    if i == j and si != sj:
                        continue
                    wi, wj = state.sides[i][si], state.sides[j][sj]
                    if state.e_h(wi, wj) >= state.d and any(
                        (state.h_rows[v] & wj).bit_count() >= threshold for v in members(wi)
                    ):
                        raise InvariantError("moves stopped while a qualifying vertex remains")
    gap = state.d - state.h_start_max_degree
    if gap > 0 and steps > state.h_start_edges / gap:
        raise InvariantError(f"{steps} steps exceed e(H)/(d - max degree) = {state.h_start_edges / gap:g}")
    limit = 6 * state.r * state.params.beta * n / state.params.delta
    if check and len(state.moved) > limit:
        raise BudgetError(f"{len(state.moved)} vertices moved, limit {limit:g}")
    return state


def _balancing_copy(state: BalanceState, i: int, si: int, j: int, sj: int, used: int, t: int) -> KttCopy:
    g = state.g
    h = state.h_rows
    wi, wj = state.sides[i][si], state.sides[j][sj]
    uj = state.sides[j][1 - sj]
    free = ~used
    order = sorted(members(wi & free), key=lambda v: (-(h[v] & wj & free).bit_count(), v))
    for v in order:
        pool = h[v] & wj & free & ~(1 << v)
        if pool.bit_count() < t:
            break
        found = find_biclique(g, pool, uj & free & ~(1 << v), t, t - 1)
        if found is not None:
            side_a, rest = found
            return KttCopy(tuple(side_a), (v, *rest), "K")
    raise SearchExhausted(
        f"no balancing copy for pair ({i},{SIDE_NAMES[si]})-({j},{SIDE_NAMES[sj]})", stage="balance"
    )


def build_balancing_ktt_collection(state: BalanceState, t: int, threshold: int = 3) -> list[KttCopy]:
    """K_{t,t} copies that absorb the side imbalance left after the moves.

    Side pairs (W_i, W_j), i <= j, with e_H(W_i, W_j) >= threshold * d are
    handled by increasing e_H, each receiving floor(e_H / d) copies inside
    Z_i + Z_j.  A copy has t vertices in W_j, t - 1 in the other side of
    class j and one in W_i, so it has skew +1 on both classes (i != j) or
    +2 on the single class (i == j).  The per-class skew of the whole
    collection is then within 8 r T of |X_i| - |Y_i|.
    """
    d = state.d
    pairs = []
    for i in range(state.r):
        for j in range(i, state.r):
            for si in (0, 1):
                for sj in (0, 1):
                    if i == j and si != sj:
                        continue
                    e = state.e_h(state.sides[i][si], state.sides[j][sj])
                    if e >= threshold * d:
                        pairs.append((e, i, si, j, sj))
    pairs.sort()
    copies: list[KttCopy] = []
    used = 0
    for e, i, si, j, sj in pairs:
        for _ in range(e // d):
            k = _balancing_copy(state, i, si, j, sj, used, t)
            kmask = to_mask(k.vertices)
            for cls, side in {(i, si), (j, sj)}:
                w, u = state.sides[cls][side], state.sides[cls][1 - side]
                skew = (kmask & w).bit_count() - (kmask & u).bit_count()
                if skew != (2 if i == j else 1):
                    raise InvariantError(f"copy skew {skew} on class {cls}")
            used |= kmask
            copies.append(k)
    total = state.h_edges()
    if d and len(copies) > total / d:
        raise InvariantError(f"{len(copies)} copies exceed e(H)/d = {total / d:g}")
    slack = 8 * state.r * threshold
    for i in range(state.r):
        x, y = state.sides[i]
        skew = sum((to_mask(k.vertices) & x).bit_count() - (to_mask(k.vertices) & y).bit_count() for k in copies)
        if abs(skew - (x.bit_count() - y.bit_count())) > slack:
            raise InvariantError(f"class {i}: copy skew {skew} far from side difference {x.bit_count() - y.bit_count()}")
    return copies


@dataclass
class TrimResult:
    classes: list[list[int]]
    sides: list[tuple[list[int], list[int]]]
    labels: list[Label]
    covered: list[int]
    discarded: list[int]
    g_prime: Graph
    report: dict


def trim_to_balance(state: BalanceState, copies: list[KttCopy], t: int, threshold: int = 3,
                    check: bool = True, seed: int = 0) -> TrimResult:
    """Remove the copy vertices and discard a few more so that |X'_i| = |Y'_i|.

    In classes that started almost bipartite, in-side edges are deleted to
    give G'.  The checks recorded in ``report`` are: discards at most
    16 r^2 T; the degree deficit d|Z'| - 2 e_G'(Z') at most 9 sigma n^2
    with sigma = sqrt(beta rho); no rho/8-sparse cut in any G'[Z'_i]; and
    the dichotomy (exactly bipartite, or far from bipartite by gamma/4).
    """
    g, d, params = state.g, state.d, state.params
    n, r = g.n, state.r
    covered = to_mask(v for k in copies for v in k.vertices)
    limit = 8 * r * threshold
    classes, sides, discarded = [], [], []
    for i in range(r):
        x = state.sides[i][0] & ~covered
        y = state.sides[i][1] & ~covered
        diff = x.bit_count() - y.bit_count()
        if abs(diff) > limit:
            raise BudgetError(f"class {i}: imbalance {diff} after copies exceeds 8rT = {limit}", stage="balance")
        big, small = (x, y) if diff > 0 else (y, x)
        order = sorted(members(big), key=lambda v: (g.degree(v, small), -v))
        drop = order[: abs(diff)]
        discarded.extend(drop)
        big &= ~to_mask(drop)
        x, y = (big, small) if diff > 0 else (small, big)
        classes.append(members(x | y))
        sides.append((members(x), members(y)))
    removed_edges = []
    for i in range(r):
        if state.labels[i] == Label.ALMOST_BIPARTITE:
            for part in sides[i]:
                m = to_mask(part)
                removed_edges.extend((a, b) for a in part for b in members(g.rows[a] & m) if a < b)
    g_prime = g.without_edges(removed_edges)

    report: dict = {}
    b1_limit = 16 * r * r * threshold
    report["B1"] = {"discarded": len(discarded), "bound": b1_limit, "ok": len(discarded) <= b1_limit}
    sigma = math.sqrt(params.beta * params.rho)
    deficits = [d * len(z) - 2 * g_prime.edges_within(to_mask(z)) for z in classes]
    report["B2"] = {"deficits": deficits, "bound": 9 * sigma * n * n, "ok": all(x <= 9 * sigma * n * n for x in deficits)}
    sparse = []
    for i, z in enumerate(classes):
        if len(z) >= 2:
            sub, _ = g_prime.induced(z)
            if find_sparse_cut(sub, params.rho / 8, seed=seed) is not None:
                sparse.append(i)
    report["B3"] = {"classes_with_sparse_cut": sparse, "ok": not sparse}
    dichotomy = []
    for i, z in enumerate(classes):
        zm = to_mask(z)
        if state.labels[i] == Label.ALMOST_BIPARTITE:
            ok = two_coloring(g_prime, zm) is not None and len(sides[i][0]) == len(sides[i][1])
        else:
            xs, ys = max_cut_bipartition(g_prime, z, seed=seed)
            dist = g_prime.edges_within(to_mask(xs)) + g_prime.edges_within(to_mask(ys))
            ok = dist >= params.gamma * len(z) ** 2 / 4
        dichotomy.append(ok)
    report["B4"] = {"per_class": dichotomy, "ok": all(dichotomy)}
    if check:
        for key in ("B1", "B2", "B3", "B4"):
            if not report[key]["ok"]:
                raise ValidationError(f"trimmed classes fail check {key}", stage="balance", witness=report)
    return TrimResult(classes, sides, list(state.labels), members(covered), sorted(discarded), g_prime, report)
