"""End-to-end K_{t,t}-packing of a dense regular graph, and an independent verifier."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field

from .balance import build_balancing_ktt_collection, build_inter_class_graph, move_high_degree_vertices, trim_to_balance
from .decompose import Label, expander_decompose
from .engine import pack_expander
from .errors import InvariantError, PreconditionError, TilingError
from .graph import Graph
from .packing import KttCopy, KttPacking
from .subdivide import SubdivisionPacking, subdivision_is_valid
from .params import EngineConfig, ParamPack

__all__ = ["PackingReport", "Verdict", "pack_h", "verify_packing", "verify_subdivision_packing", "default_params"]


@dataclass
class Verdict:
    ok: bool
    leftover: int
    copies: int
    problems: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return asdict(self)


def verify_packing(g: Graph, packing: KttPacking, t: int) -> Verdict:
    """Check a packing against the graph alone.

    Every copy needs two sides of t distinct in-range vertices with all t^2
    edges present, and no vertex may appear in two copies.  The leftover is
    recounted from the copies.
    """
    problems = []
    owner: dict[int, int] = {}
    for i, copy in enumerate(packing.copies):
        if len(copy.side_a) != t or len(copy.side_b) != t:
            problems.append(f"copy {i} has sides of size {len(copy.side_a)} and {len(copy.side_b)}, expected {t}")
        for v in copy.vertices:
            if not 0 <= v < g.n:
                problems.append(f"copy {i} uses vertex {v} outside the graph")
                continue
            if v in owner:
                problems.append(f"copies {owner[v]} and {i} share vertex {v}")
            else:
                owner[v] = i
        for a in copy.side_a:
            for b in copy.side_b:
                if 0 <= a < g.n and 0 <= b < g.n and not g.has_edge(a, b):
                    problems.append(f"copy {i} misses edge ({a}, {b})")
    return Verdict(not problems, g.n - len(owner), len(packing.copies), problems)


def verify_subdivision_packing(g: Graph, packing: SubdivisionPacking) -> Verdict:
    """Structural validity of every subdivision, disjointness, and the uncovered count."""
    problems = []
    owner: dict[int, int] = {}
    for i, sub in enumerate(packing.subdivisions):
        if not subdivision_is_valid(g, sub):
            problems.append(f"subdivision {i} is not a valid subdivision of the pattern")
        for v in sorted(sub.vertices()):
            if not 0 <= v < g.n:
                problems.append(f"subdivision {i} uses vertex {v} outside the graph")
            elif v in owner:
                problems.append(f"subdivisions {owner[v]} and {i} share vertex {v}")
            else:
                owner[v] = i
    return Verdict(not problems, g.n - len(owner), len(packing.subdivisions), problems)


@dataclass
class PackingReport:
    n: int
    d: int
    t: int
    r: int = 0
    leftover: int = 0
    discarded: int = 0
    bound: int = 0
    stage_ms: dict = field(default_factory=dict)
    stages: dict = field(default_factory=dict)
    verdict: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return asdict(self)


def default_params(g: Graph, t: int) -> ParamPack:
    """Default constants, scaled down when the degree ratio is below the default ``c``.

    In a d-regular class with no outside edges e(X) - e(Y) = d(|X| - |Y|) / 2,
    so an odd class can never meet |e(X) - e(Y)| <= beta n^2 unless
    beta >= d / (2 n^2).  Beta is raised to that floor, lifting xi, gamma and
    zeta with it where the ordering requires.
    """
    d = g.regular_degree()
    if d is None:
        raise PreconditionError("graph is not regular")
    if not g.n:
        return ParamPack(t=t)
    params = ParamPack.for_density(d / g.n, t)
    floor = d / (2 * g.n**2)
    if params.beta >= floor:
        return params
    return params.with_(beta=floor, xi=max(params.xi, floor), gamma=max(params.gamma, floor),
                        zeta=max(params.zeta, floor))


def pack_h(g: Graph, t: int, params: ParamPack | None = None, config: EngineConfig | None = None,
           seed: int = 0) -> tuple[KttPacking, PackingReport]:
    """K_{t,t}-packing of a regular graph missing at most r(2t - 1) + |discarded| vertices.

    Stages: decomposition, inter-class balancing (moves, balancing copies,
    trimming), then the per-class packer on the trimmed classes.  The
    balancing copies are part of the output.  Errors keep the stage tag of
    the step that raised them.
    """
    d = g.regular_degree()
    if d is None:
        raise PreconditionError("graph is not regular")
    params = params or default_params(g, t)
    if params.t != t:
        params = params.with_(t=t)
    config = config or EngineConfig()
    report = PackingReport(n=g.n, d=d, t=t, params=params.to_json())
    clock = time.perf_counter

    def timed(stage: str, fn, *args, **kwargs):
        start = clock()
        try:
            return fn(*args, **kwargs)
        except TilingError as exc:
            if exc.stage is None:
                exc.stage = stage
            raise
        finally:
            report.stage_ms[stage] = report.stage_ms.get(stage, 0.0) + 1000 * (clock() - start)

    dec = timed("decompose", expander_decompose, g, params, seed)
    report.r = dec.r
    report.stages["decompose"] = {"labels": [lab.value for lab in dec.labels], "sizes": [len(z) for z in dec.classes]}

    state = timed("balance", build_inter_class_graph, g, dec, params, seed)
    state = timed("balance", move_high_degree_vertices, state)
    balancing = timed("balance", build_balancing_ktt_collection, state, t, config.T)
    trim = timed("balance", trim_to_balance, state, balancing, t, config.T, seed=seed)
    report.discarded = len(trim.discarded)
    report.stages["balance"] = {"moved": len(state.moved), "copies": len(balancing), "discarded": trim.discarded}

    copies: list[KttCopy] = [KttCopy(c.side_a, c.side_b, "L") for c in balancing]
    engine = []
    for i, zone in enumerate(trim.classes):
        sides = trim.sides[i] if trim.labels[i] == Label.ALMOST_BIPARTITE else None
        part = timed("engine", pack_expander, trim.g_prime, zone, t, params, config, seed, sides)
        copies.extend(part.copies)
        engine.append({k: part.meta[k] for k in ("route", "attempts", "leftover") if k in part.meta})
    report.stages["engine"] = engine

    packing = KttPacking(t, copies)
    verdict = verify_packing(g, packing, t)
    report.verdict = verdict.to_json()
    report.leftover = verdict.leftover
    report.bound = dec.r * (2 * t - 1) + report.discarded
    if not verdict.ok:
        raise InvariantError(f"pipeline produced an invalid packing: {verdict.problems[:3]}", stage="verify")
    if verdict.leftover > report.bound:
        raise InvariantError(f"{verdict.leftover} vertices left over, bound {report.bound}", stage="verify")
    return packing, report
