"""Input checks shared by the estimator and the functional API."""

from __future__ import annotations

import numpy as np
from sklearn.utils.validation import check_array

from .hypergraph import Hypergraph

__all__ = ["check_hypergraph", "check_features", "check_index_set", "UNLABELED"]

# sklearn's semi-supervised convention for nodes without a label
UNLABELED = -1


def check_hypergraph(hypergraph) -> Hypergraph:
    """Accept a :class:`Hypergraph` or a plain list of hyperedges."""
    if isinstance(hypergraph, Hypergraph):
        return hypergraph
    if hypergraph is None:
        raise ValueError("a hypergraph is required")
    edges = [list(e) for e in hypergraph]
    n = 1 + max((max(e) for e in edges if e), default=-1)
    return Hypergraph(n, edges)


def check_features(X, num_nodes: int) -> np.ndarray:
    X = check_array(X, dtype=np.float64, ensure_all_finite=True)
    if X.shape[0] != num_nodes:
        raise ValueError(f"X has {X.shape[0]} rows but the hypergraph has {num_nodes} nodes")
    return X


def check_index_set(idx, num_nodes: int, name: str) -> np.ndarray:
    idx = np.unique(np.asarray(idx, dtype=np.int64).ravel())
    if idx.size and (idx[0] < 0 or idx[-1] >= num_nodes):
        raise ValueError(f"{name} contains indices outside [0, {num_nodes})")
    return idx
