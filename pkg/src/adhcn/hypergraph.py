"""Hypergraph container and the incidence / degree / convolution operators."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp

__all__ = [
    "Hypergraph",
    "InvalidHypergraphError",
    "incidence_matrix",
    "node_degrees",
    "edge_degrees",
    "hyper_norm_operator",
]


class InvalidHypergraphError(ValueError):
    """Raised when a hypergraph violates its structural invariants."""


@dataclass(frozen=True)
class Hypergraph:
    """Hypernodes ``0..num_nodes-1`` joined by weighted hyperedges.

    Hyperedges are stored sorted ascending. A repeated node inside one
    hyperedge is an error rather than being silently merged.
    """

    num_nodes: int
    hyperedges: tuple[tuple[int, ...], ...]
    edge_weights: tuple[float, ...] = field(default=())

    def __init__(
        self,
        num_nodes: int,
        hyperedges: Sequence[Sequence[int]],
        edge_weights: Sequence[float] | None = None,
    ):
        num_nodes = int(num_nodes)
        if num_nodes < 1:
            raise InvalidHypergraphError("num_nodes must be >= 1")
        edges = []
        for i, edge in enumerate(hyperedges):
            members = [int(v) for v in edge]
            if not members:
                raise InvalidHypergraphError(f"hyperedge {i} is empty")
            if len(set(members)) != len(members):
                raise InvalidHypergraphError(f"hyperedge {i} contains a duplicate node")
            lo, hi = min(members), max(members)
            if lo < 0 or hi >= num_nodes:
                raise InvalidHypergraphError(
                    f"hyperedge {i} references node outside [0, {num_nodes})"
                )
            edges.append(tuple(sorted(members)))
        if not edges:
            raise InvalidHypergraphError("a hypergraph needs at least one hyperedge")
        if edge_weights is None or len(edge_weights) == 0:
            weights = (1.0,) * len(edges)
        else:
            weights = tuple(float(w) for w in edge_weights)
            if len(weights) != len(edges):
                raise InvalidHypergraphError(
                    f"got {len(weights)} edge weights for {len(edges)} hyperedges"
                )
            if not all(np.isfinite(w) and w > 0 for w in weights):
                raise InvalidHypergraphError("edge weights must be finite and > 0")
        object.__setattr__(self, "num_nodes", num_nodes)
        object.__setattr__(self, "hyperedges", tuple(edges))
        object.__setattr__(self, "edge_weights", weights)

    @property
    def num_edges(self) -> int:
        return len(self.hyperedges)

    @property
    def num_incidences(self) -> int:
        return sum(len(e) for e in self.hyperedges)

    def relabel(self, perm: Sequence[int]) -> "Hypergraph":
        """Return the hypergraph with node ``v`` renamed to ``perm[v]``."""
        perm = np.asarray(perm)
        return Hypergraph(
            self.num_nodes,
            [[int(perm[v]) for v in e] for e in self.hyperedges],
            self.edge_weights,
        )


def incidence_matrix(hg: Hypergraph) -> sp.csr_matrix:
    """Binary ``n x m`` incidence matrix H with H[v, e] = 1 iff v is in e."""
    rows = np.fromiter((v for e in hg.hyperedges for v in e), dtype=np.int64)
    cols = np.repeat(np.arange(hg.num_edges), [len(e) for e in hg.hyperedges])
    H = sp.csr_matrix(
        (np.ones(len(rows)), (rows, cols)), shape=(hg.num_nodes, hg.num_edges)
    )
    H.sort_indices()
    return H


def node_degrees(hg: Hypergraph) -> np.ndarray:
    """Weighted node degrees: sum of the weights of incident hyperedges."""
    return incidence_matrix(hg) @ np.asarray(hg.edge_weights)


def edge_degrees(hg: Hypergraph) -> np.ndarray:
    """Hyperedge cardinalities."""
    return np.array([len(e) for e in hg.hyperedges], dtype=np.float64)


def _scale_symmetric(K: sp.spmatrix, deg: np.ndarray) -> sp.csr_matrix:
    """``K[i, j] / sqrt(deg[i] * deg[j])``, zero where either degree is 0.

    The product of degrees commutes, so a symmetric K stays bitwise symmetric.
    """
    K = K.tocoo()
    prod = deg[K.row] * deg[K.col]
    keep = prod > 0
    data = K.data[keep] / np.sqrt(prod[keep])
    out = sp.csr_matrix((data, (K.row[keep], K.col[keep])), shape=K.shape)
    out.eliminate_zeros()
    out.sort_indices()
    return out


def hyper_norm_operator(hg: Hypergraph) -> sp.csr_matrix:
    """Normalized hypergraph convolution operator.

    Computes ``Dv^-1/2 H W De^-1 H^T Dv^-1/2``. Rows and columns of
    isolated nodes are zero.
    """
    H = incidence_matrix(hg)
    scale = np.asarray(hg.edge_weights) / edge_degrees(hg)
    K = H @ sp.diags(scale) @ H.T
    return _scale_symmetric(K, node_degrees(hg))
