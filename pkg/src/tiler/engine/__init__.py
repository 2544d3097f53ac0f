"""K_{t,t} machinery: biclique search, regularity, clusters and the per-class packer."""

from .biclique import find_biclique, find_ktt_unbalanced, find_split_biclique
from .clusters import (
    ClusterSystem,
    SplitPlan,
    build_cluster_system,
    five_way_split,
    hypergeometric_tail_bound,
    split_sizes,
)
from .covers import (
    build_template_ktt,
    cover_exceptional,
    divisibility_target,
    even_walk,
    fix_divisibility,
    template_counts,
    template_parts,
)
from .expander import pack_expander
from .regularity import eps_regular_test, irregularity_witness, make_super_regular, pair_density
from .tiling import perfect_ktt_tiling, perfect_ktt_tiling_bipartite

__all__ = [
    "ClusterSystem",
    "SplitPlan",
    "build_cluster_system",
    "build_template_ktt",
    "cover_exceptional",
    "divisibility_target",
    "eps_regular_test",
    "even_walk",
    "find_biclique",
    "find_ktt_unbalanced",
    "find_split_biclique",
    "five_way_split",
    "fix_divisibility",
    "hypergeometric_tail_bound",
    "irregularity_witness",
    "make_super_regular",
    "pack_expander",
    "pair_density",
    "perfect_ktt_tiling",
    "perfect_ktt_tiling_bipartite",
    "split_sizes",
    "template_counts",
    "template_parts",
]
