"""Density and regularity of vertex-set pairs."""

from __future__ import annotations

import math
from typing import Iterable

import numpy as np

from ..errors import PreconditionError, TooIrregular
from ..graph import Graph, members, to_mask

__all__ = ["pair_density", "irregularity_witness", "eps_regular_test", "make_super_regular"]

EXHAUSTIVE_SIDE = 14


def pair_density(g: Graph, side_a: Iterable[int], side_b: Iterable[int]) -> float:
    side_a, side_b = list(side_a), list(side_b)
    if not side_a or not side_b:
        return 0.0
    bmask = to_mask(side_b)
    return sum(g.degree(a, bmask) for a in side_a) / (len(side_a) * len(side_b))


def _extreme_subsets(bi: np.ndarray, rows_sel: np.ndarray, kmin: int, base: float, eps: float):
    """For each row subset, test the densest and sparsest column subsets of every allowed size.

    ``bi`` is the |A| x |B| biadjacency, ``rows_sel`` a 0/1 matrix of A-subsets.
    Given X, the extreme e(X, Y) over |Y| = k comes from the k columns with the
    largest (or smallest) degree into X, so only X has to be enumerated.
    """
    deg = rows_sel @ bi
    sizes = rows_sel.sum(axis=1)
    desc = -np.sort(-deg, axis=1)
    top = np.cumsum(desc, axis=1)
    bottom = np.cumsum(desc[:, ::-1], axis=1)
    nb = bi.shape[1]
    for k in range(kmin, nb + 1):
        hi = top[:, k - 1] / (sizes * k)
        lo = bottom[:, k - 1] / (sizes * k)
        bad = (hi - base >= eps) | (base - lo >= eps)
        hit = np.flatnonzero(bad)
        if hit.size:
            row = int(hit[0])
            order = np.argsort(-deg[row], kind="stable")
            cols = order[:k] if hi[row] - base >= eps else order[::-1][:k]
            return row, sorted(int(c) for c in cols)
    return None


def irregularity_witness(
    g: Graph, side_a: Iterable[int], side_b: Iterable[int], eps: float, samples: int = 2000, seed: int = 0
) -> tuple[list[int], list[int]] | None:
    """Subsets X, Y with |X| >= eps|A|, |Y| >= eps|B| and |d(X,Y) - d(A,B)| >= eps.

    Every X is enumerated when both sides have at most 14 vertices; otherwise
    ``samples`` random X of the smallest allowed size are drawn.  For each X
    the best Y of every size is found exactly.  None means no witness was seen.
    """
    side_a, side_b = sorted(side_a), sorted(side_b)
    if len(side_a) > len(side_b):
        found = irregularity_witness(g, side_b, side_a, eps, samples, seed)
        return None if found is None else (found[1], found[0])
    na, nb = len(side_a), len(side_b)
    if not na or not nb:
        return None
    bi = np.array([[g.has_edge(a, b) for b in side_b] for a in side_a], dtype=np.int32)
    base = bi.sum() / (na * nb)
    amin, bmin = max(1, math.ceil(eps * na)), max(1, math.ceil(eps * nb))
    if na <= EXHAUSTIVE_SIDE and nb <= EXHAUSTIVE_SIDE:
        idx = np.arange(1, 1 << na, dtype=np.int64)
        sel = ((idx[:, None] >> np.arange(na)) & 1).astype(np.int32)
        sel = sel[sel.sum(axis=1) >= amin]
    else:
        rng = np.random.default_rng(seed)
        sel = np.zeros((samples, na), dtype=np.int32)
        for row in range(samples):
            sel[row, rng.choice(na, size=amin, replace=False)] = 1
    found = _extreme_subsets(bi, sel, bmin, base, eps)
    if found is None:
        return None
    row, cols = found
    return [side_a[k] for k in np.flatnonzero(sel[row])], [side_b[c] for c in cols]


def eps_regular_test(g: Graph, side_a: Iterable[int], side_b: Iterable[int], eps: float,
                     samples: int = 2000, seed: int = 0) -> bool:
    """True when no irregularity witness is found."""
    return irregularity_witness(g, side_a, side_b, eps, samples, seed) is None


def make_super_regular(g: Graph, side_a: Iterable[int], side_b: Iterable[int], eps: float) -> tuple[list[int], list[int]]:
    """Drop low-degree vertices so survivors have cross-degree above (d - 2 eps) * opposite size.

    d is the density of the original pair.  At most eps|A| vertices may leave
    A and eps|B| leave B; otherwise :class:`TooIrregular`.
    """
    side_a, side_b = sorted(side_a), sorted(side_b)
    d = pair_density(g, side_a, side_b)
    if d <= 2 * eps:
        raise PreconditionError(f"density {d:.3f} must exceed 2*eps = {2 * eps:.3f}")
    amask, bmask = to_mask(side_a), to_mask(side_b)
    limit_a, limit_b = math.floor(eps * len(side_a)), math.floor(eps * len(side_b))
    floor = d - 2 * eps
    while True:
        low_a = [v for v in members(amask) if g.degree(v, bmask) <= floor * bmask.bit_count()]
        low_b = [v for v in members(bmask) if g.degree(v, amask) <= floor * amask.bit_count()]
        if not low_a and not low_b:
            break
        amask &= ~to_mask(low_a)
        bmask &= ~to_mask(low_b)
        if len(side_a) - amask.bit_count() > limit_a or len(side_b) - bmask.bit_count() > limit_b:
            raise TooIrregular(
                f"removed {len(side_a) - amask.bit_count()}/{len(side_b) - bmask.bit_count()} vertices, "
                f"limits {limit_a}/{limit_b}"
            )
    return members(amask), members(bmask)
