"""Seeded experiment campaigns over instance families, written as JSON and CSV."""

from __future__ import annotations

import csv
import io
import json
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .errors import FormatError, PreconditionError, TilingError
from .graph import Graph, gen_clique_union, gen_complete_bipartite, gen_regular
from .params import EngineConfig, ParamPack
from .pipeline import pack_h, verify_packing, verify_subdivision_packing
from .subdivide import pack_subdivisions

__all__ = ["ExperimentConfig", "make_instance", "parse_pattern", "run_campaign", "CSV_COLUMNS", "FAMILIES"]

CSV_COLUMNS = ["family", "n", "d", "t", "seed", "leftover", "stage", "status", "ms"]

FAMILIES = {
    "regular": ("n", "d"),
    "cliques": ("copies", "k"),
    "bipartite": ("a",),
}


def make_instance(spec: dict, seed: int = 0) -> Graph:
    """Build one graph from a family record such as ``{"family": "regular", "n": 80, "d": 27}``."""
    family = spec.get("family")
    if family not in FAMILIES:
        raise FormatError(f"unknown family {family!r}; choose from {sorted(FAMILIES)}")
    values = {}
    for key in FAMILIES[family]:
        value = spec.get(key)
        if not isinstance(value, int) or isinstance(value, bool) or value < 0:
            raise FormatError(f"family {family} needs a non-negative integer {key!r}")
        values[key] = value
    if family == "regular":
        return gen_regular(values["n"], values["d"], seed=seed)
    if family == "cliques":
        return gen_clique_union(values["copies"], values["k"])
    b = spec.get("b", values["a"])
    if b != values["a"]:
        raise FormatError("bipartite family must be balanced to be regular")
    return gen_complete_bipartite(values["a"], b)


_PATTERN = re.compile(r"^(k|c|p)(\d+)(?:,(\d+))?$")


def parse_pattern(text: str) -> Graph:
    """``k4`` complete, ``k2,3`` complete bipartite, ``c5`` cycle, ``p3`` path on that many vertices."""
    match = _PATTERN.match(text.strip().lower())
    if not match:
        raise FormatError(f"cannot read pattern {text!r}")
    kind, a, b = match.group(1), int(match.group(2)), match.group(3)
    if b is not None:
        if kind != "k":
            raise FormatError(f"only complete bipartite patterns take two sizes: {text!r}")
        return gen_complete_bipartite(a, int(b))
    if kind == "k":
        return gen_clique_union(1, a)
    if kind == "c":
        if a < 3:
            raise FormatError("a cycle needs at least 3 vertices")
        return Graph(a, [(i, (i + 1) % a) for i in range(a)])
    if a < 2:
        raise FormatError("a path needs at least 2 vertices")
    return Graph(a, [(i, i + 1) for i in range(a - 1)])


@dataclass
class ExperimentConfig:
    """What to run: families x seeds, with either ``t`` or a subdivision ``pattern``."""

    families: list[dict]
    seeds: list[int]
    t: int = 2
    pattern: str | None = None
    params: dict | None = None
    budgets: dict = field(default_factory=dict)
    record_ms: bool = False
    workers: int = 1
    out: str = "campaign"

    def __post_init__(self):
        if not self.seeds:
            raise PreconditionError("campaign needs at least one seed")
        if not self.families:
            raise PreconditionError("campaign needs at least one family")
        if any(not isinstance(s, int) or isinstance(s, bool) for s in self.seeds):
            raise FormatError("seeds must be integers")
        for spec in self.families:
            if spec.get("family") == "regular":
                _check_regular(spec)
            else:
                make_instance(spec)
        if self.pattern is not None:
            parse_pattern(self.pattern)
        if self.params is not None:
            ParamPack.from_json(self.params)
        known = set(EngineConfig.__dataclass_fields__)
        if set(self.budgets) - known:
            raise FormatError(f"unknown budgets: {sorted(set(self.budgets) - known)}")
        if self.workers < 1:
            raise FormatError("workers must be positive")

    @classmethod
    def from_json(cls, data: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        if not isinstance(data, dict) or set(data) - known:
            raise FormatError(f"unknown config keys: {sorted(set(data) - known) if isinstance(data, dict) else data}")
        if "families" not in data or "seeds" not in data:
            raise FormatError("config needs 'families' and 'seeds'")
        return cls(**data)

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        try:
            return cls.from_json(json.loads(Path(path).read_text()))
        except json.JSONDecodeError as exc:
            raise FormatError(f"config is not JSON: {exc}") from None


def _check_regular(spec: dict) -> None:
    n, d = spec.get("n"), spec.get("d")
    if not all(isinstance(x, int) and not isinstance(x, bool) and x >= 0 for x in (n, d)):
        raise FormatError("family regular needs non-negative integers 'n' and 'd'")
    if n * d % 2 or (n and d >= n):
        raise FormatError(f"no {d}-regular graph on {n} vertices")


def _run_one(config: ExperimentConfig, spec: dict, seed: int) -> dict:
    row = {"family": spec["family"], "n": "", "d": "", "t": config.pattern or config.t, "seed": seed,
           "leftover": "", "stage": "", "status": "", "ms": 0}
    detail: dict = {"instance": spec, "seed": seed}
    start = time.perf_counter()
    try:
        g = make_instance(spec, seed)
        row["n"], row["d"] = g.n, g.regular_degree()
        params = None
        if config.params is not None:
            params = ParamPack.from_json(config.params)
        if config.pattern is None:
            engine = EngineConfig(**config.budgets)
            packing, report = pack_h(g, config.t, params=params, config=engine, seed=seed)
            verdict = verify_packing(g, packing, config.t)
            detail["report"] = report.to_json()
            if not config.record_ms:
                detail["report"]["stage_ms"] = {}
        else:
            packing = pack_subdivisions(g, parse_pattern(config.pattern), params=params, seed=seed)
            verdict = verify_subdivision_packing(g, packing)
            detail["report"] = packing.report
        detail["verdict"] = verdict.to_json()
        row["leftover"] = verdict.leftover
        row["stage"] = "done"
        row["status"] = "ok" if verdict.ok else "invalid"
    except TilingError as exc:
        row["stage"] = exc.stage or "input"
        row["status"] = "failed"
        detail["error"] = f"{type(exc).__name__}: {exc}"
    except Exception as exc:  # a crash in one instance must not end the campaign
        row["stage"] = "internal"
        row["status"] = "failed"
        detail["error"] = f"{type(exc).__name__}: {exc}"
    if config.record_ms:
        row["ms"] = round(1000 * (time.perf_counter() - start))
    detail["row"] = row
    return detail


def _task(args):
    return _run_one(*args)


def run_campaign(config: ExperimentConfig, out: str | Path | None = None) -> dict:
    """Run every (family, seed) instance and write ``<out>.json`` and ``<out>.csv``.

    Failures are recorded per row and never stop the run.  Rows follow the
    family order, then the seed order, whatever the number of workers.
    Returns the paths and the rows.
    """
    tasks = [(config, spec, seed) for spec in config.families for seed in config.seeds]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_task, tasks))
    else:
        results = [_task(task) for task in tasks]
    rows = [r["row"] for r in results]

    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    base = Path(out if out is not None else config.out)
    csv_path, json_path = base.with_suffix(".csv"), base.with_suffix(".json")
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    csv_path.write_text(buffer.getvalue())
    summary = {
        "instances": len(rows),
        "ok": sum(r["status"] == "ok" for r in rows),
        "failed": sum(r["status"] == "failed" for r in rows),
        "invalid": sum(r["status"] == "invalid" for r in rows),
    }
    json_path.write_text(json.dumps({"summary": summary, "results": results}, indent=2, sort_keys=True) + "\n")
    return {"csv": str(csv_path), "json": str(json_path), "rows": rows, "summary": summary}
