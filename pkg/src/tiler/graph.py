"""Dense simple graphs stored as bitset rows.

Row ``v`` of a :class:`Graph` is a Python ``int`` whose bit ``u`` is set when
``uv`` is an edge.  Neighbourhood counts are popcounts of masked rows, which is
fast enough for the few-hundred-vertex instances this package works with.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence, TextIO

import numpy as np

from .errors import DegenerateCut, FormatError, InfeasibleError, ParityError, PreconditionError

__all__ = [
    "Graph",
    "CutStats",
    "to_mask",
    "members",
    "gen_regular",
    "gen_clique_union",
    "gen_complete_bipartite",
    "cut_stats",
    "bipartite_distance",
    "read_edgelist",
    "write_edgelist",
    "two_coloring",
]


def to_mask(vertices: Iterable[int]) -> int:
    mask = 0
    for v in vertices:
        mask |= 1 << int(v)
    return mask


def members(mask: int) -> list[int]:
    """Vertices of a bitmask in increasing order."""
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


class Graph:
    """Simple undirected graph on vertices ``0..n-1``."""

    __slots__ = ("n", "rows")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = ()):
        if n < 0:
            raise PreconditionError(f"vertex count must be non-negative, got {n}")
        rows = [0] * n
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < n and 0 <= v < n):
                raise PreconditionError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise PreconditionError(f"self-loop at {u}")
            rows[u] |= 1 << v
            rows[v] |= 1 << u
        self.n = n
        self.rows = tuple(rows)

    @classmethod
    def from_rows(cls, rows: Sequence[int]) -> "Graph":
        g = cls.__new__(cls)
        g.n = len(rows)
        g.rows = tuple(rows)
        return g

    @classmethod
    def from_adjacency(cls, matrix) -> "Graph":
        a = np.asarray(matrix)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise PreconditionError("adjacency matrix must be square")
        if np.any(np.diag(a)):
            raise PreconditionError("adjacency matrix has self-loops")
        if not np.array_equal(a != 0, (a != 0).T):
            raise PreconditionError("adjacency matrix is not symmetric")
        us, vs = np.nonzero(np.triu(a != 0, 1))
        return cls(a.shape[0], zip(us.tolist(), vs.tolist()))

    @classmethod
    def from_networkx(cls, nxg) -> "Graph":
        nodes = sorted(nxg.nodes())
        if nodes != list(range(len(nodes))):
            raise PreconditionError("networkx graph must use nodes 0..n-1")
        return cls(len(nodes), nxg.edges())

    def to_networkx(self):
        import networkx as nx

        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self.edges())
        return g

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.num_edges})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Graph) and self.rows == other.rows

    def __hash__(self) -> int:
        return hash(self.rows)

    @property
    def num_edges(self) -> int:
        return sum(r.bit_count() for r in self.rows) // 2

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.rows[u] >> v & 1)

    def neighbors(self, v: int) -> list[int]:
        return members(self.rows[v])

    def degree(self, v: int, within: int | None = None) -> int:
        """Degree of ``v``, optionally counted only into the mask ``within``."""
        row = self.rows[v]
        if within is not None:
            row &= within
        return row.bit_count()

    def degrees(self, within: int | None = None) -> list[int]:
        if within is None:
            return [r.bit_count() for r in self.rows]
        return [(r & within).bit_count() for r in self.rows]

    def regular_degree(self) -> int | None:
        """Common degree if the graph is regular, else None."""
        degs = set(self.degrees())
        if len(degs) > 1:
            return None
        return degs.pop() if degs else 0

    def edges(self) -> list[tuple[int, int]]:
        out = []
        for u, row in enumerate(self.rows):
            for v in members(row >> (u + 1)):
                out.append((u, u + 1 + v))
        return out

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=bool)
        for u, v in self.edges():
            a[u, v] = a[v, u] = True
        return a

    def edges_within(self, mask: int) -> int:
        """e(S) for the vertex mask S."""
        return sum((self.rows[v] & mask).bit_count() for v in members(mask)) // 2

    def edges_between(self, mask_a: int, mask_b: int) -> int:
        """Edges with one end in A and the other in B; A and B must be disjoint."""
        if mask_a & mask_b:
            raise PreconditionError("edges_between needs disjoint vertex sets")
        if (mask_a.bit_count()) > (mask_b.bit_count()):
            mask_a, mask_b = mask_b, mask_a
        return sum((self.rows[v] & mask_b).bit_count() for v in members(mask_a))

    def restrict(self, mask: int) -> "Graph":
        """Same vertex labels, only the edges inside ``mask``."""
        return Graph.from_rows([row & mask if mask >> v & 1 else 0 for v, row in enumerate(self.rows)])

    def induced(self, vertices: Iterable[int]) -> tuple["Graph", list[int]]:
        """Relabelled induced subgraph plus the list mapping new ids to old ids."""
        labels = sorted(set(vertices))
        index = {v: i for i, v in enumerate(labels)}
        rows = []
        for v in labels:
            r = 0
            for u in members(self.rows[v]):
                j = index.get(u)
                if j is not None:
                    r |= 1 << j
            rows.append(r)
        return Graph.from_rows(rows), labels

    def without_edges(self, edges: Iterable[tuple[int, int]]) -> "Graph":
        rows = list(self.rows)
        for u, v in edges:
            rows[u] &= ~(1 << v)
            rows[v] &= ~(1 << u)
        return Graph.from_rows(rows)

    def with_edges(self, edges: Iterable[tuple[int, int]]) -> "Graph":
        rows = list(self.rows)
        for u, v in edges:
            if u == v:
                raise PreconditionError(f"self-loop at {u}")
            rows[u] |= 1 << v
            rows[v] |= 1 << u
        return Graph.from_rows(rows)

    def complement(self) -> "Graph":
        full = (1 << self.n) - 1
        return Graph.from_rows([(full ^ row) & ~(1 << v) for v, row in enumerate(self.rows)])

    def components(self, mask: int | None = None) -> list[int]:
        """Connected components of the graph induced by ``mask``, as masks."""
        if mask is None:
            mask = (1 << self.n) - 1
        comps = []
        left = mask
        while left:
            seed = left & -left
            comp = seed
            frontier = seed
            while frontier:
                nxt = 0
                for v in members(frontier):
                    nxt |= self.rows[v]
                nxt &= mask & ~comp
                comp |= nxt
                frontier = nxt
            comps.append(comp)
            left &= ~comp
        return comps


def two_coloring(g: Graph, mask: int | None = None) -> tuple[int, int] | None:
    """Sides (X, Y) of a proper 2-colouring of G[mask], or None if odd cycle.

    In each component the smallest vertex is put in X.
    """
    if mask is None:
        mask = (1 << g.n) - 1
    side_x = side_y = 0
    for comp in g.components(mask):
        start = comp & -comp
        layer, colour = start, 0
        seen = start
        cx = cy = 0
        while layer:
            if colour == 0:
                cx |= layer
            else:
                cy |= layer
            nxt = 0
            for v in members(layer):
                nxt |= g.rows[v]
            nxt &= comp
            if colour == 0 and nxt & cx or colour == 1 and nxt & cy:
                return None
            layer = nxt & ~seen
            seen |= layer
            colour ^= 1
        for v in members(cx):
            if g.rows[v] & cx:
                return None
        for v in members(cy):
            if g.rows[v] & cy:
                return None
        side_x |= cx
        side_y |= cy
    return side_x, side_y


# --- generators -------------------------------------------------------------


def _pairing(n: int, d: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    stubs = np.repeat(np.arange(n), d)
    rng.shuffle(stubs)
    pairs = stubs.reshape(-1, 2)
    return [(int(a), int(b)) if a <= b else (int(b), int(a)) for a, b in pairs]


def _repair(edges: list[tuple[int, int]], rng: np.random.Generator, max_tries: int) -> list[tuple[int, int]] | None:
    """Double-edge switches that remove loops and parallel edges."""
    count = Counter(edges)
    m = len(edges)

    def bad(e):
        return e[0] == e[1] or count[e] > 1

    defects = [i for i, e in enumerate(edges) if bad(e)]
    tries = 0
    while defects:
        i = defects[-1]
        if not bad(edges[i]):
            defects.pop()
            continue
        if tries == max_tries:
            return None
        tries += 1
        j = int(rng.integers(m))
        a, b = edges[i]
        c, d = edges[j]
        if rng.random() < 0.5:
            c, d = d, c
        e1 = (min(a, c), max(a, c))
        e2 = (min(b, d), max(b, d))
        if j == i or e1[0] == e1[1] or e2[0] == e2[1] or e1 == e2 or count[e1] or count[e2]:
            continue
        count[edges[i]] -= 1
        count[edges[j]] -= 1
        edges[i], edges[j] = e1, e2
        count[e1] += 1
        count[e2] += 1
    return edges


def gen_regular(n: int, d: int, seed: int = 0) -> Graph:
    """Random simple d-regular graph on n vertices.

    Uses a random stub pairing and repairs its loops and parallel edges
    with double-edge switches (up to 100 fresh pairings).  Dense requests
    are generated as complements of sparse ones.
    """
    if n * d % 2:
        raise ParityError(f"n*d = {n * d} is odd")
    if d < 0 or (n > 0 and d >= n):
        raise InfeasibleError(f"no {d}-regular graph on {n} vertices")
    if 2 * d > n - 1:
        return gen_regular(n, n - 1 - d, seed).complement()
    rng = np.random.default_rng(seed)
    if d == 0:
        return Graph(n)
    for _ in range(100):
        fixed = _repair(_pairing(n, d, rng), rng, 200 * n * d)
        if fixed is not None:
            return Graph(n, fixed)
    raise InfeasibleError(f"could not realise a {d}-regular graph on {n} vertices")


def gen_clique_union(copies: int, k: int) -> Graph:
    """Disjoint union of ``copies`` cliques of order k."""
    edges = []
    for c in range(copies):
        base = c * k
        edges.extend((base + i, base + j) for i in range(k) for j in range(i + 1, k))
    return Graph(copies * k, edges)


def gen_complete_bipartite(a: int, b: int) -> Graph:
    """K_{a,b} with sides 0..a-1 and a..a+b-1."""
    return Graph(a + b, [(i, a + j) for i in range(a) for j in range(b)])


# --- cuts -------------------------------------------------------------------


@dataclass(frozen=True)
class CutStats:
    cross_edges: int
    sparsity: float


def cut_stats(g: Graph, side: Iterable[int] | int) -> CutStats:
    """Crossing edges of the cut (S, V-S) and their density over |S||V-S|."""
    mask = side if isinstance(side, int) else to_mask(side)
    size = mask.bit_count()
    if size == 0 or size == g.n:
        raise DegenerateCut("cut side must be a proper non-empty subset")
    rest = ((1 << g.n) - 1) & ~mask
    cross = g.edges_between(mask, rest)
    return CutStats(cross, cross / (size * (g.n - size)))


def bipartite_distance(g: Graph, side: Iterable[int] | int, within: Iterable[int] | int | None = None) -> int:
    """Edges inside X plus edges inside Z - X, where Z defaults to all vertices."""
    mask = side if isinstance(side, int) else to_mask(side)
    if within is None:
        zmask = (1 << g.n) - 1
    else:
        zmask = within if isinstance(within, int) else to_mask(within)
    mask &= zmask
    return g.edges_within(mask) + g.edges_within(zmask & ~mask)


# --- edge-list IO -----------------------------------------------------------


def _parse_edgelist(lines: Iterator[str]) -> Graph:
    rows = [ln.split() for ln in lines if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows or len(rows[0]) != 2:
        raise FormatError("missing 'n m' header line")
    try:
        n, m = int(rows[0][0]), int(rows[0][1])
        pairs = [(int(a), int(b)) for a, b in rows[1:]]
    except ValueError as exc:
        raise FormatError(f"bad edge-list line: {exc}") from None
    if len(pairs) != m:
        raise FormatError(f"header announces {m} edges, found {len(pairs)}")
    seen = set()
    for u, v in pairs:
        if u == v:
            raise FormatError(f"self-loop at {u}")
        if not (0 <= u < n and 0 <= v < n):
            raise FormatError(f"edge ({u}, {v}) out of range for n={n}")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise FormatError(f"duplicate edge {key}")
        seen.add(key)
    return Graph(n, pairs)


def read_edgelist(source: str | Path | TextIO) -> Graph:
    """Read the ``n m`` header plus ``u v`` lines format (0-based ids)."""
    if hasattr(source, "read"):
        return _parse_edgelist(iter(source.read().splitlines()))
    return _parse_edgelist(iter(Path(source).read_text().splitlines()))


def write_edgelist(g: Graph, target: str | Path | TextIO) -> None:
    edges = g.edges()
    text = f"{g.n} {len(edges)}\n" + "".join(f"{u} {v}\n" for u, v in edges)
    if hasattr(target, "write"):
        target.write(text)
    else:
        Path(target).write_text(text)
