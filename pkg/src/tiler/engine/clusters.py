"""Cluster systems over one expanding class and their random five-way split."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..decompose import find_sparse_cut, max_cut_bipartition
from ..errors import (
    ConcentrationError,
    Infeasible,
    InvariantError,
    PreconditionError,
    TooIrregular,
    ValidationError,
)
from ..graph import Graph, bipartite_distance, members, to_mask, two_coloring
from ..matching import (
    TwoMatching,
    lift_two_matching,
    perfect_fractional_matching,
    round_fractional_to_two_matching,
)
from ..params import EngineConfig
from .regularity import irregularity_witness, make_super_regular, pair_density

__all__ = [
    "ClusterSystem",
    "SplitPlan",
    "choose_cluster_shape",
    "build_cluster_system",
    "split_sizes",
    "template_size",
    "five_way_split",
    "hypergeometric_tail_bound",
]


@dataclass
class ClusterSystem:
    """Equal halves U_0..U_{2m-1} of m clusters plus an exceptional set.

    Half ``h`` belongs to cluster ``h // 2``.  ``pairs`` lists the matched
    halves; in bipartite mode the first half of every pair lies in ``side_x``.
    ``g_prime`` keeps only edges between distinct clusters whose pair is
    dense, i.e. adjacent in ``reduced``.
    """

    zone: list[int]
    exceptional: list[int]
    halves: list[list[int]]
    reduced: Graph
    two_matching: TwoMatching
    pairs: list[tuple[int, int]]
    g_prime: Graph
    bipartite: bool
    side_x: int = 0
    report: dict = field(default_factory=dict)

    @property
    def m(self) -> int:
        return self.reduced.n

    @property
    def half_size(self) -> int:
        return len(self.halves[0]) if self.halves else 0

    def halves_adjacent(self, h1: int, h2: int) -> bool:
        return self.reduced.has_edge(h1 // 2, h2 // 2)

    def half_of(self) -> dict[int, int]:
        return {v: h for h, part in enumerate(self.halves) for v in part}

    def check(self, t: int) -> None:
        seen = list(self.exceptional) + [v for part in self.halves for v in part]
        if sorted(seen) != sorted(self.zone) or len(seen) != len(set(seen)):
            raise InvariantError("exceptional set and halves do not partition the class")
        sizes = {len(part) for part in self.halves}
        if len(sizes) != 1 or self.half_size % (2 * t):
            raise InvariantError(f"half sizes {sorted(sizes)} not equal multiples of {2 * t}")
        if len(self.exceptional) % (2 * t):
            raise InvariantError(f"|V_0| = {len(self.exceptional)} not divisible by {2 * t}")
        matched = sorted(h for pair in self.pairs for h in pair)
        if matched != list(range(len(self.halves))):
            raise InvariantError("matched pairs do not cover every half exactly once")


def choose_cluster_shape(size: int, t: int, bipartite: bool, lo: int = 2, hi: int = 8) -> tuple[int, int]:
    """(m, s) with s a positive multiple of 2t minimising size - 2ms, ties to small m."""
    best = None
    for m in range(lo, hi + 1):
        if bipartite and m % 2:
            continue
        s = (size // (2 * m)) // (2 * t) * (2 * t)
        if s == 0:
            continue
        left = size - 2 * m * s
        key = (left, m)
        if best is None or key < best[0]:
            best = (key, m, s)
    if best is None:
        raise PreconditionError(f"class of {size} vertices too small for clusters with t={t}")
    return best[1], best[2]


def _two_matching(reduced: Graph) -> TwoMatching:
    try:
        weights = perfect_fractional_matching(reduced)
    except Infeasible as exc:
        raise ValidationError("reduced graph has no perfect 2-matching", stage="clusters", witness=exc.witness) from None
    return round_fractional_to_two_matching(reduced, weights)


def build_cluster_system(g: Graph, zone: list[int], t: int, config: EngineConfig | None = None,
                         seed: int = 0, sides: tuple[list[int], list[int]] | None = None) -> ClusterSystem:
    """Seeded equal clustering of ``zone`` with dense pairs matched up.

    ``zone`` must have size divisible by 2t.  With ``sides`` the clusters
    nest inside the two sides.  Matched pairs are super-regularised in G'
    and trimmed to a common size; trimmed vertices join the exceptional set.
    """
    config = config or EngineConfig()
    zone = sorted(zone)
    size = len(zone)
    if size % (2 * t):
        raise PreconditionError(f"class size {size} not divisible by {2 * t}")
    rng = np.random.default_rng(seed)
    bipartite = sides is not None
    m, s = choose_cluster_shape(size, t, bipartite, config.min_clusters, config.max_clusters)

    if bipartite:
        xs, ys = sorted(sides[0]), sorted(sides[1])
        if len(xs) != len(ys):
            raise PreconditionError(f"unbalanced sides {len(xs)} / {len(ys)}")
        per_side = m // 2 * 2 * s
        xs, ys = [int(v) for v in rng.permutation(xs)], [int(v) for v in rng.permutation(ys)]
        exceptional = xs[per_side:] + ys[per_side:]
        body = [xs[k * 2 * s:(k + 1) * 2 * s] for k in range(m // 2)] + [ys[k * 2 * s:(k + 1) * 2 * s] for k in range(m // 2)]
        side_x = to_mask(xs)
    else:
        order = [int(v) for v in rng.permutation(zone)]
        exceptional = order[: size - 2 * m * s]
        rest = order[size - 2 * m * s:]
        body = [rest[k * 2 * s:(k + 1) * 2 * s] for k in range(m)]
        side_x = 0
    cluster_masks = [to_mask(c) for c in body]

    reduced_edges, densities = [], {}
    for a in range(m):
        for b in range(a + 1, m):
            d = pair_density(g, body[a], body[b])
            densities[f"{a}-{b}"] = round(d, 4)
            if d >= config.mu:
                reduced_edges.append((a, b))
    reduced = Graph(m, reduced_edges)
    tm = _two_matching(reduced)

    halves = []
    for c in body:
        halves.extend([sorted(c[:s]), sorted(c[s:])])

    neighbour_mask = [0] * m
    for a, b in reduced_edges:
        neighbour_mask[a] |= cluster_masks[b]
        neighbour_mask[b] |= cluster_masks[a]
    rows = [0] * g.n
    for a, c in enumerate(body):
        for v in c:
            rows[v] = g.rows[v] & neighbour_mask[a]
    g_prime = Graph.from_rows(rows)

    pairs = []
    for (ca, pa), (cb, pb) in lift_two_matching(tm):
        h1, h2 = 2 * ca + pa, 2 * cb + pb
        if bipartite and not (side_x >> halves[h1][0]) & 1:
            h1, h2 = h2, h1
        pairs.append((h1, h2))
    pairs.sort()

    removed = []
    for h1, h2 in pairs:
        try:
            keep_a, keep_b = make_super_regular(g_prime, halves[h1], halves[h2], config.eps)
        except (TooIrregular, PreconditionError) as exc:
            raise ValidationError(f"pair ({h1},{h2}): {exc}", stage="clusters") from None
        removed += sorted(set(halves[h1]) - set(keep_a)) + sorted(set(halves[h2]) - set(keep_b))
        halves[h1], halves[h2] = keep_a, keep_b
    target = min(len(part) for part in halves) // (2 * t) * (2 * t)
    if target == 0:
        raise ValidationError("super-regularisation emptied a half", stage="clusters")
    for h, part in enumerate(halves):
        removed += part[target:]
        halves[h] = part[:target]
    exceptional = sorted(exceptional + removed)
    keep = ~to_mask(exceptional)
    g_prime = Graph.from_rows([row & keep if (keep >> v) & 1 else 0 for v, row in enumerate(g_prime.rows)])

    pair_report = []
    for h1, h2 in pairs:
        d = pair_density(g_prime, halves[h1], halves[h2])
        witness = irregularity_witness(g_prime, halves[h1], halves[h2], config.eps, samples=300, seed=seed)
        pair_report.append({"pair": [h1, h2], "density": round(d, 4), "regular": witness is None})
        if d < config.mu:
            raise ValidationError(f"pair ({h1},{h2}) density {d:.3f} below {config.mu}", stage="clusters")
        if witness is not None and config.strict_regularity:
            raise ValidationError(f"pair ({h1},{h2}) is not {config.eps}-regular", stage="clusters", witness=witness)

    system = ClusterSystem(
        zone=zone, exceptional=exceptional, halves=halves, reduced=reduced, two_matching=tm, pairs=pairs,
        g_prime=g_prime, bipartite=bipartite, side_x=side_x,
        report={"m": m, "half_size": target, "exceptional": len(exceptional), "densities": densities,
                "pairs": pair_report},
    )
    system.check(t)
    return system


# --- five-way split ---------------------------------------------------------


@dataclass
class SplitPlan:
    """``parts[h][k]`` is part k (0..4) of half h."""

    parts: list[list[list[int]]]
    report: dict = field(default_factory=dict)

    def union(self, k: int) -> list[int]:
        return sorted(v for half in self.parts for v in half[k])


def template_size(s: int, t: int, min_final_half: int = 0) -> int:
    """Size of part 3: s/2t, lowered so that s - t * size >= min_final_half when possible."""
    return max(1, min(s // (2 * t), (s - min_final_half) // t))


def split_sizes(s: int, xi: float, t: int, part3: int | None = None) -> list[int]:
    """Integer part sizes: floors for parts 1-4, remainder to part 5.

    Part 3 defaults to s/2t.  If the floors overshoot, part 4 shrinks instead;
    it must still hold the t * |part 3| vertices the template copies need.
    """
    if s % (2 * t):
        raise PreconditionError(f"half size {s} not divisible by {2 * t}")
    p1 = p2 = math.floor(xi * s)
    p3 = s // (2 * t) if part3 is None else part3
    p4 = min(math.floor(2 * s / 3), s - p1 - p2 - p3)
    if p4 < t * p3:
        raise PreconditionError(f"half size {s} too small for xi={xi}, t={t}")
    return [p1, p2, p3, p4, s - p1 - p2 - p3 - p4]


def hypergeometric_tail_bound(mean: float, eps: float) -> float:
    """Two-sided bound 2 exp(-eps^2 mean / 3) on P(|X - mean| >= eps mean)."""
    return 2 * math.exp(-(eps ** 2) * mean / 3)


def _proportionality(g: Graph, system: ClusterSystem, parts, eps: float) -> dict:
    """Check degree proportionality where a union bound over all checks is below one."""
    n_checks = len(system.zone) * len(parts) * 5
    checked = violations = 0
    worst = 0.0
    witness = None
    s = system.half_size
    for h, half in enumerate(parts):
        hmask = to_mask(system.halves[h])
        pmasks = [to_mask(p) for p in half]
        for v in system.zone:
            deg = g.degree(v, hmask)
            if deg < eps * s:
                continue
            for k, pm in enumerate(pmasks):
                if not pm:
                    continue
                mean = deg * pm.bit_count() / s
                got = g.degree(v, pm)
                worst = max(worst, abs(got - mean) / mean)
                if hypergeometric_tail_bound(mean, eps) * n_checks >= 1:
                    continue
                checked += 1
                if abs(got - mean) > eps * mean:
                    violations += 1
                    witness = (v, h, k, got, mean)
    return {"checked": checked, "violations": violations, "worst_relative_deviation": round(worst, 4),
            "witness": witness}


def five_way_split(g: Graph, system: ClusterSystem, xi: float, t: int, seed: int = 0,
                   zeta: float = 0.02, gamma: float = 0.01, eps: float = 0.5, resamples: int = 50,
                   part3: int | None = None) -> SplitPlan:
    """Seeded uniform split of every half into parts of sizes :func:`split_sizes`.

    Re-drawn until degree proportionality holds (where checkable), G'[U^(3)]
    has no zeta/20-sparse cut, and G'[U^(3)] is either balanced bipartite or
    far from bipartite.  :class:`ConcentrationError` after ``resamples``.
    """
    s = system.half_size
    sizes = split_sizes(s, xi, t, part3)
    bounds = np.cumsum([0] + sizes)
    rng = np.random.default_rng(seed)
    last = None
    for attempt in range(resamples):
        parts = []
        for half in system.halves:
            order = [int(v) for v in rng.permutation(half)]
            parts.append([sorted(order[bounds[k]:bounds[k + 1]]) for k in range(5)])
        plan = SplitPlan(parts)
        prop = _proportionality(g, system, parts, eps)
        third = plan.union(2)
        sub, _ = system.g_prime.induced(third)
        cut = find_sparse_cut(sub, zeta / 20, seed=seed + attempt)
        colouring = two_coloring(sub)
        if colouring is not None:
            balanced = colouring[0].bit_count() == colouring[1].bit_count()
            dichotomy = "bipartite" if balanced else None
        else:
            xs, _ = max_cut_bipartition(sub, seed=seed, restarts=3)
            far = bipartite_distance(sub, xs) >= gamma * len(third) ** 2 / (256 * t * t)
            dichotomy = "far" if far else None
        plan.report = {"sizes": sizes, "attempt": attempt, "U5": prop, "U6": cut is None, "U7": dichotomy}
        if prop["violations"] == 0 and cut is None and dichotomy is not None:
            return plan
        last = plan.report
    raise ConcentrationError(f"split failed after {resamples} draws", stage="split", witness=last)

