"""scikit-learn style wrappers around the decomposition and packing pipelines."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .campaign import parse_pattern
from .decompose import expander_decompose
from .errors import FormatError
from .graph import Graph, read_edgelist
from .params import EngineConfig, ParamPack
from .pipeline import default_params, pack_h
from .subdivide import pack_subdivisions

__all__ = ["check_graph", "ExpanderDecomposer", "KttPacker", "SubdivisionPacker"]


def check_graph(G) -> Graph:
    """Accept a Graph, a networkx graph, a square 0/1 adjacency array or an edge-list path."""
    if isinstance(G, Graph):
        return G
    if hasattr(G, "nodes") and hasattr(G, "edges"):
        return Graph.from_networkx(G)
    if isinstance(G, str) or hasattr(G, "__fspath__"):
        return read_edgelist(G)
    try:
        matrix = np.asarray(G)
    except (TypeError, ValueError):
        matrix = None
    if matrix is None or matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise FormatError(f"cannot read a graph from {type(G).__name__}")
    return Graph.from_adjacency(matrix)


def _param_pack(params, g: Graph, t: int) -> ParamPack:
    if params is None:
        return default_params(g, t)
    if isinstance(params, ParamPack):
        return params.with_(t=t)
    return ParamPack.from_json({**params, "t": t})


def _labels_from(groups, n: int) -> np.ndarray:
    labels = np.full(n, -1, dtype=int)
    for i, group in enumerate(groups):
        labels[list(group)] = i
    return labels


class ExpanderDecomposer(BaseEstimator):
    """Partition a dense regular graph into expanding classes.

    After ``fit`` the estimator holds ``decomposition_``, ``classes_``,
    ``class_labels_`` (bipartite status per class) and ``labels_`` (class
    index per vertex).
    """

    def __init__(self, params=None, t: int = 2, random_state: int = 0):
        self.params = params
        self.t = t
        self.random_state = random_state

    def fit(self, G, y=None):
        g = check_graph(G)
        self.decomposition_ = expander_decompose(g, _param_pack(self.params, g, self.t), seed=self.random_state)
        self.classes_ = self.decomposition_.classes
        self.class_labels_ = [lab.value for lab in self.decomposition_.labels]
        self.n_classes_ = self.decomposition_.r
        self.labels_ = _labels_from(self.classes_, g.n)
        return self

    def fit_predict(self, G, y=None) -> np.ndarray:
        return self.fit(G).labels_


class KttPacker(BaseEstimator):
    """Near-perfect K_{t,t}-packing; ``labels_`` gives each vertex its copy index, -1 if uncovered."""

    def __init__(self, t: int = 2, params=None, attempts: int = 25, random_state: int = 0):
        self.t = t
        self.params = params
        self.attempts = attempts
        self.random_state = random_state

    def fit(self, G, y=None):
        g = check_graph(G)
        config = EngineConfig(attempts=self.attempts)
        self.packing_, self.report_ = pack_h(g, self.t, params=_param_pack(self.params, g, self.t), config=config,
                                             seed=self.random_state)
        self.labels_ = _labels_from([c.vertices for c in self.packing_.copies], g.n)
        self.leftover_ = int((self.labels_ < 0).sum())
        return self

    def fit_predict(self, G, y=None) -> np.ndarray:
        return self.fit(G).labels_

    def score(self, G=None, y=None) -> float:
        """Covered fraction of the fitted graph."""
        check_is_fitted(self, "labels_")
        return float((self.labels_ >= 0).mean()) if len(self.labels_) else 1.0


class SubdivisionPacker(BaseEstimator):
    """Perfect packing by subdivisions of ``pattern`` (a Graph or text such as ``"k4"``)."""

    def __init__(self, pattern="k3", params=None, random_state: int = 0):
        self.pattern = pattern
        self.params = params
        self.random_state = random_state

    def fit(self, G, y=None):
        g = check_graph(G)
        pattern = parse_pattern(self.pattern) if isinstance(self.pattern, str) else check_graph(self.pattern)
        params = None if self.params is None else _param_pack(self.params, g, 2)
        self.packing_ = pack_subdivisions(g, pattern, params=params, seed=self.random_state)
        self.labels_ = _labels_from([s.vertices() for s in self.packing_.subdivisions], g.n)
        return self

    def fit_predict(self, G, y=None) -> np.ndarray:
        return self.fit(G).labels_
