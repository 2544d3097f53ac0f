"""K_{t,t}-packings and subdivision packings of dense regular graphs."""

from .campaign import ExperimentConfig, run_campaign
from .decompose import Decomposition, Label, expander_decompose
from .engine import pack_expander
from .errors import PreconditionError, SearchExhausted, TilingError, ValidationError
from .estimators import ExpanderDecomposer, KttPacker, SubdivisionPacker, check_graph
from .graph import Graph, gen_clique_union, gen_complete_bipartite, gen_regular, read_edgelist, write_edgelist
from .packing import KttCopy, KttPacking
from .params import EngineConfig, ParamPack
from .pipeline import PackingReport, Verdict, pack_h, verify_packing, verify_subdivision_packing
from .subdivide import Subdivision, SubdivisionPacking, pack_subdivisions

__version__ = "0.1.0"

__all__ = [
    "Decomposition",
    "EngineConfig",
    "ExpanderDecomposer",
    "ExperimentConfig",
    "Graph",
    "KttCopy",
    "KttPacker",
    "KttPacking",
    "Label",
    "PackingReport",
    "ParamPack",
    "PreconditionError",
    "SearchExhausted",
    "Subdivision",
    "SubdivisionPacker",
    "SubdivisionPacking",
    "TilingError",
    "ValidationError",
    "Verdict",
    "check_graph",
    "expander_decompose",
    "gen_clique_union",
    "gen_complete_bipartite",
    "gen_regular",
    "pack_expander",
    "pack_h",
    "pack_subdivisions",
    "read_edgelist",
    "run_campaign",
    "verify_packing",
    "verify_subdivision_packing",
    "write_edgelist",
]
