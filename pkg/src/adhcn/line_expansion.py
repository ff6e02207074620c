"""Line expansion of a hypergraph and the projections between node and pair space.

Every incidence ``(v, e)`` becomes a pair node. Two pair nodes are adjacent
when they share the hypernode or the hyperedge; they can never share both.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .hypergraph import Hypergraph, _scale_symmetric, edge_degrees, incidence_matrix

__all__ = [
    "LEGraph",
    "ProjectionPair",
    "line_expand",
    "projection_matrix",
    "back_projection_matrix",
    "projection_pair",
    "le_norm_operator",
]


@dataclass(frozen=True)
class LEGraph:
    """Line-expanded simple graph.

    ``pairs`` is an ``(L, 2)`` array of ``(node, edge)`` rows in row-major
    order of the incidence matrix. ``adjacency`` is the symmetric ``L x L``
    weighted adjacency with an empty diagonal.
    """

    pairs: np.ndarray
    adjacency: sp.csr_matrix
    num_nodes: int
    num_edges: int
    w_node: float = 1.0
    w_edge: float = 1.0

    @property
    def num_pairs(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class ProjectionPair:
    forward: sp.csr_matrix
    backward: sp.csr_matrix


def _pair_selector(index: np.ndarray, width: int) -> sp.csr_matrix:
    L = len(index)
    return sp.csr_matrix((np.ones(L), (np.arange(L), index)), shape=(L, width))


def _without_diagonal(M: sp.spmatrix) -> sp.csr_matrix:
    M = sp.csr_matrix(M)
    M.setdiag(0)
    M.eliminate_zeros()
    return M


def line_expand(hg: Hypergraph, w_node: float = 1.0, w_edge: float = 1.0) -> LEGraph:
    H = incidence_matrix(hg).tocoo()
    # coo from a sorted csr keeps the row-major scan order
    pairs = np.column_stack([H.row, H.col]).astype(np.int64)
    by_node = _pair_selector(pairs[:, 0], hg.num_nodes)
    by_edge = _pair_selector(pairs[:, 1], hg.num_edges)
    A = w_node * _without_diagonal(by_node @ by_node.T) + w_edge * _without_diagonal(
        by_edge @ by_edge.T
    )
    A = sp.csr_matrix(A)
    A.eliminate_zeros()
    A.sort_indices()
    return LEGraph(pairs, A, hg.num_nodes, hg.num_edges, float(w_node), float(w_edge))


def _check_compatible(hg: Hypergraph, le: LEGraph) -> None:
    if le.num_nodes != hg.num_nodes or le.num_edges != hg.num_edges:
        raise ValueError(
            f"line expansion built for {le.num_nodes} nodes / {le.num_edges} edges, "
            f"hypergraph has {hg.num_nodes} / {hg.num_edges}"
        )
    if le.num_pairs != hg.num_incidences:
        raise ValueError("line expansion pair count does not match the hypergraph")


def projection_matrix(hg: Hypergraph, le: LEGraph) -> sp.csr_matrix:
    """``L x n`` matrix copying each hypernode's row onto its pair nodes."""
    _check_compatible(hg, le)
    return _pair_selector(le.pairs[:, 0], hg.num_nodes)


def back_projection_matrix(hg: Hypergraph, le: LEGraph) -> sp.csr_matrix:
    """``n x L`` inverse-edge-degree weighted average from pairs to hypernodes.

    The pair ``(v, e)`` gets weight ``(1/|e|) / sum_{e' ∋ v} 1/|e'|``, so
    each non-isolated row sums to one.
    """
    _check_compatible(hg, le)
    nodes, edges = le.pairs[:, 0], le.pairs[:, 1]
    inv_size = 1.0 / edge_degrees(hg)[edges]
    norm = np.bincount(nodes, weights=inv_size, minlength=hg.num_nodes)
    values = inv_size / norm[nodes]
    P = sp.csr_matrix(
        (values, (nodes, np.arange(le.num_pairs))), shape=(hg.num_nodes, le.num_pairs)
    )
    P.sort_indices()
    return P


def projection_pair(hg: Hypergraph, le: LEGraph) -> ProjectionPair:
    return ProjectionPair(projection_matrix(hg, le), back_projection_matrix(hg, le))


def le_norm_operator(le: LEGraph) -> sp.csr_matrix:
    """``D^-1/2 (A + 2I) D^-1/2`` with D the row sums of ``A + 2I``."""
    A_tilde = le.adjacency + 2.0 * sp.identity(le.num_pairs, format="csr")
    deg = np.asarray(A_tilde.sum(axis=1)).ravel()
    return _scale_symmetric(A_tilde, deg)
