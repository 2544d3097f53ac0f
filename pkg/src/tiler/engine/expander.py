"""Near-perfect K_{t,t}-packing of a single expanding class."""

from __future__ import annotations

import logging
import math

from ..errors import InvariantError, PreconditionError, SearchExhausted, ValidationError
from ..graph import Graph, members, to_mask, two_coloring
from ..packing import KttCopy, KttPacking, copy_is_valid
from ..params import EngineConfig, ParamPack
from .clusters import build_cluster_system, choose_cluster_shape, five_way_split, split_sizes, template_size
from .covers import (
    build_template_ktt,
    cover_exceptional,
    divisibility_target,
    fix_divisibility,
    template_counts,
    template_parts,
    usage_per_half,
)
from .tiling import perfect_ktt_tiling, perfect_ktt_tiling_bipartite

__all__ = ["pack_expander", "divisibility_drop", "use_exact_route", "SMALL_CLASS_FACTOR"]

log = logging.getLogger(__name__)

# classes below SMALL_CLASS_FACTOR * t vertices are tiled directly
SMALL_CLASS_FACTOR = 16


def divisibility_drop(g: Graph, zone: list[int], t: int, sides: tuple[list[int], list[int]] | None) -> list[int]:
    """Lowest in-class degree vertices to discard so the rest splits into 2t-sets.

    With sides, the same number goes from each side so that balance survives.
    """
    zmask = to_mask(zone)

    def lowest(vs: list[int], k: int) -> list[int]:
        return sorted(sorted(vs, key=lambda v: (g.degree(v, zmask), v))[:k])

    if sides is None:
        return lowest(zone, len(zone) % (2 * t))
    k = len(sides[0]) % t
    return sorted(lowest(sides[0], k) + lowest(sides[1], k))


def _class_sides(g: Graph, zone: list[int], sides) -> tuple[list[int], list[int]] | None:
    if sides is not None:
        return sorted(sides[0]), sorted(sides[1])
    colouring = two_coloring(g, to_mask(zone))
    if colouring is None:
        return None
    return members(colouring[0]), members(colouring[1])


def use_exact_route(size: int, t: int, config: EngineConfig, bipartite: bool) -> bool:
    """Small classes, and shapes whose exceptional set would crowd part 1, are tiled directly.

    So are shapes whose halves are too small for super-regularisation to
    drop even one vertex.
    """
    if size < SMALL_CLASS_FACTOR * t:
        return True
    m, s = choose_cluster_shape(size, t, bipartite, config.min_clusters, config.max_clusters)
    if math.floor(config.eps * s) < 1:
        return True
    exceptional = size - 2 * m * s
    try:
        p1 = split_sizes(s, config.split_xi, t, template_size(s, t, config.min_final_half))[0]
    except PreconditionError:
        return True
    return (2 * t - 1) * exceptional > m * p1


def _run_once(g: Graph, body: list[int], t: int, params: ParamPack, config: EngineConfig, seed: int,
              sides) -> tuple[list[KttCopy], dict]:
    stage = "clusters"
    try:
        system = build_cluster_system(g, body, t, config, seed=seed, sides=sides)
        stage = "split"
        part3 = template_size(system.half_size, t, config.min_final_half)
        split = five_way_split(g, system, config.split_xi, t, seed=seed, zeta=params.zeta, gamma=params.gamma,
                               part3=part3)
        stage = "cover"
        k1 = cover_exceptional(g, system, split, t)
        stage = "divisibility"
        target = divisibility_target(system, k1, t)
        k2 = fix_divisibility(g, system, split, target, t)
        stage = "template"
        parts3 = template_parts(system, split, k1 + k2, t)
        _, counts = template_counts(system, parts3)
        used = to_mask(v for c in k1 + k2 for v in c.vertices)
        k3 = build_template_ktt(system, split, counts, used, t)
        usage3 = usage_per_half(system, k3)
        for h, part in enumerate(parts3):
            if usage3[h] != t * len(part):
                raise InvariantError(f"half {h}: template copies use {usage3[h]}, expected {t * len(part)}")
        used |= to_mask(v for c in k3 for v in c.vertices)
        rest = [[v for v in half if not (used >> v) & 1] for half in system.halves]
        final = system.half_size - t * part3
        if any(len(r) != final for r in rest):
            raise InvariantError(f"remaining half sizes {[len(r) for r in rest]} differ from {final}")
        stage = "tiling"
        tiles = []
        for h1, h2 in system.pairs:
            tiles += perfect_ktt_tiling_bipartite(system.g_prime, rest[h1], rest[h2], t, config.tiling_budget)
    except (ValidationError, SearchExhausted) as exc:
        if isinstance(exc, InvariantError):
            raise
        if exc.stage is None:
            exc.stage = stage
        raise
    report = {
        "m": system.m,
        "half_size": system.half_size,
        "exceptional": len(system.exceptional),
        "split_sizes": split.report["sizes"],
        "counts": {"K_1": len(k1), "K_2": len(k2), "K_3": len(k3), "blow-up-tile": len(tiles)},
    }
    return k1 + k2 + k3 + tiles, report


def pack_expander(g: Graph, zone: list[int], t: int, params: ParamPack | None = None,
                  config: EngineConfig | None = None, seed: int = 0,
                  sides: tuple[list[int], list[int]] | None = None) -> KttPacking:
    """K_{t,t}-packing of G[zone] missing at most 2t - 1 vertices.

    A bipartite class (given ``sides`` or detected) must be balanced and is
    packed with sides respected.  Small classes are tiled exactly; larger ones
    go through clusters, split, exceptional cover, residue fixing, template
    copies and per-pair tiling, reseeded up to ``config.attempts`` times.
    ``meta`` records the dropped vertices, the attempt count and stage counts.
    """
    params = params or ParamPack(t=t)
    config = config or EngineConfig()
    zone = sorted(zone)
    sides = _class_sides(g, zone, sides)
    if sides is not None and len(sides[0]) != len(sides[1]):
        raise PreconditionError(f"bipartite class has unbalanced sides {len(sides[0])} / {len(sides[1])}")
    dropped = divisibility_drop(g, zone, t, sides)
    dmask = to_mask(dropped)
    body = [v for v in zone if not (dmask >> v) & 1]
    body_sides = None if sides is None else tuple([v for v in s if not (dmask >> v) & 1] for s in sides)
    meta = {"dropped": dropped, "bipartite": sides is not None, "attempts": 0, "route": "clusters"}

    if not body:
        copies = []
        meta["route"] = "empty"
    elif use_exact_route(len(body), t, config, body_sides is not None):
        meta["route"] = "exact"
        if body_sides is None:
            copies = perfect_ktt_tiling(g, body, t, config.tiling_budget)
        else:
            copies = perfect_ktt_tiling_bipartite(g, body_sides[0], body_sides[1], t, config.tiling_budget)
    else:
        copies = None
        failures = []
        for attempt in range(config.attempts):
            meta["attempts"] = attempt + 1
            try:
                copies, report = _run_once(g, body, t, params, config, seed * 1000 + attempt, body_sides)
                meta["report"] = report
                break
            except (ValidationError, SearchExhausted) as exc:
                log.debug("attempt %d failed at %s: %s", attempt, exc.stage, exc)
                failures.append(exc.stage)
                last = exc
        meta["failed_stages"] = failures
        if copies is None:
            last.witness = {"failed_stages": failures, "detail": last.witness}
            raise last

    packing = KttPacking(t, copies, meta)
    if not packing.is_disjoint():
        raise InvariantError("engine produced overlapping copies")
    for c in copies:
        if not copy_is_valid(g, c, t):
            raise InvariantError(f"engine produced an invalid copy {c}")
    covered = packing.covered()
    leftover = [v for v in zone if v not in covered]
    if covered - set(zone):
        raise InvariantError("engine copies leave the class")
    if len(leftover) > 2 * t - 1:
        raise InvariantError(f"{len(leftover)} vertices left over, more than {2 * t - 1}")
    meta["leftover"] = leftover
    return packing
