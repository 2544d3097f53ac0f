"""Command line entry point ``tiler``.

Exit codes: 0 when every verification passes, 1 for unusable input,
2 for a failed verification, 3 when a pipeline stage fails.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .campaign import ExperimentConfig, make_instance, parse_pattern, run_campaign
from .errors import FormatError, PreconditionError, TilingError
from .graph import read_edgelist, write_edgelist
from .packing import KttPacking
from .params import EngineConfig, load_params
from .pipeline import pack_h, verify_packing, verify_subdivision_packing
from .subdivide import SubdivisionPacking, pack_subdivisions

OK, BAD_INPUT, VERIFY_FAILED, STAGE_FAILED = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    # usage errors must not collide with the verification-failure code
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(BAD_INPUT, f"{self.prog}: error: {message}\n")


def _write(path: str | None, payload: dict) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _cmd_pack(args) -> int:
    g = read_edgelist(args.input)
    params = load_params(args.params, t=args.t) if args.params else None
    try:
        packing, report = pack_h(g, args.t, params=params, config=EngineConfig(), seed=args.seed)
    except TilingError as exc:
        if isinstance(exc, PreconditionError) and exc.stage is None:
            raise
        _write(args.out, {"status": "failed", "stage": exc.stage, "error": str(exc)})
        return STAGE_FAILED
    verdict = verify_packing(g, packing, args.t)
    _write(args.out, {"status": "ok" if verdict.ok else "invalid", "report": report.to_json(),
                      "packing": packing.to_json()})
    print(f"leftover {verdict.leftover} of {g.n}, {verdict.copies} copies", file=sys.stderr)
    return OK if verdict.ok else VERIFY_FAILED


def _cmd_gen(args) -> int:
    spec = {"family": args.family, "n": args.n, "d": args.d, "copies": args.copies, "k": args.k, "a": args.a}
    g = make_instance({k: v for k, v in spec.items() if v is not None}, seed=args.seed)
    write_edgelist(g, sys.stdout if args.out in (None, "-") else args.out)
    return OK


def _cmd_subdiv(args) -> int:
    pattern = parse_pattern(args.pattern)
    g = read_edgelist(args.input)
    params = load_params(args.params) if args.params else None
    try:
        packing = pack_subdivisions(g, pattern, params=params, seed=args.seed)
    except TilingError as exc:
        if isinstance(exc, PreconditionError) and exc.stage is None:
            raise
        _write(args.out, {"status": "failed", "stage": exc.stage, "error": str(exc)})
        return STAGE_FAILED
    verdict = verify_subdivision_packing(g, packing)
    _write(args.out, {"status": "ok" if verdict.ok else "invalid", "report": packing.report,
                      "packing": packing.to_json()})
    return OK if verdict.ok and verdict.leftover == 0 else VERIFY_FAILED


def _cmd_verify(args) -> int:
    g = read_edgelist(args.graph)
    try:
        data = json.loads(Path(args.packing).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"packing is not JSON: {exc}") from None
    data = data.get("packing", data)
    if "subdivisions" in data:
        verdict = verify_subdivision_packing(g, SubdivisionPacking.from_json(data))
    else:
        packing = KttPacking.from_json(data)
        verdict = verify_packing(g, packing, args.t or packing.t)
    _write(None, verdict.to_json())
    return OK if verdict.ok else VERIFY_FAILED


def _cmd_campaign(args) -> int:
    result = run_campaign(ExperimentConfig.load(args.config), out=args.out)
    print(json.dumps(result["summary"], sort_keys=True))
    if result["summary"]["failed"]:
        return STAGE_FAILED
    return VERIFY_FAILED if result["summary"]["invalid"] else OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tiler", description="K_{t,t} and subdivision packings of dense regular graphs")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("pack", help="K_{t,t}-pack a regular graph")
    p.add_argument("--input", required=True, help="edge list file")
    p.add_argument("--t", type=int, default=2)
    p.add_argument("--params", help="parameter pack JSON")
    p.add_argument("--out", help="report JSON (stdout when omitted)")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(run=_cmd_pack)

    p = sub.add_parser("gen", help="write an instance as an edge list")
    p.add_argument("--family", required=True, choices=["regular", "cliques", "bipartite"])
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--copies", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--a", type=int, help="side size of the balanced complete bipartite graph")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(run=_cmd_gen)

    p = sub.add_parser("subdiv", help="perfect packing by subdivisions of a pattern")
    p.add_argument("--pattern", required=True, help="k4, k2,3, c5 or p3 style")
    p.add_argument("--input", required=True)
    p.add_argument("--params")
    p.add_argument("--out")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(run=_cmd_subdiv)

    p = sub.add_parser("verify", help="check a packing against a graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--packing", required=True)
    p.add_argument("--t", type=int, help="defaults to the t recorded in the packing")
    p.set_defaults(run=_cmd_verify)

    p = sub.add_parser("campaign", help="run a seeded experiment campaign")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="output prefix (overrides the config)")
    p.set_defaults(run=_cmd_campaign)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.run(args)
    except (TilingError, OSError) as exc:
        print(f"tiler: {exc}", file=sys.stderr)
        return BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
