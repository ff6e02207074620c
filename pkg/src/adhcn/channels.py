"""Single-layer convolution channels and dropout."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

__all__ = [
    "ChannelParams",
    "random_stream",
    "dropout_mask",
    "relu",
    "hypergraph_channel_forward",
    "le_channel_forward",
    "le_back_project",
]

# stream ids for the per-channel dropout generators
HG_STREAM = 0
LE_STREAM = 1


@dataclass
class ChannelParams:
    weight: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        self.weight = np.asarray(self.weight, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.weight.ndim != 2 or self.bias.shape != (self.weight.shape[1],):
            raise ValueError(
                f"channel weight {self.weight.shape} and bias {self.bias.shape} disagree"
            )


def random_stream(seed: int, *keys: int) -> np.random.Generator:
    """Independent generator derived from ``seed`` and a tuple of integer keys."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, keys)]))


def dropout_mask(shape, rate: float, stream: np.random.Generator) -> np.ndarray:
    """Inverted-dropout mask: 0 with probability ``rate``, else ``1/(1-rate)``."""
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must lie in [0, 1), got {rate}")
    if rate == 0.0:
        return np.ones(shape)
    keep = stream.random(shape) >= rate
    return keep / (1.0 - rate)


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def _conv(op, X, params: ChannelParams, name: str) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or op.shape[1] != X.shape[0] or op.shape[0] != op.shape[1]:
        raise ValueError(f"{name}: operator {op.shape} cannot act on features {X.shape}")
    if X.shape[1] != params.weight.shape[0]:
        raise ValueError(
            f"{name}: features have {X.shape[1]} columns, weight expects "
            f"{params.weight.shape[0]}"
        )
    return relu((op @ X) @ params.weight + params.bias)


def hypergraph_channel_forward(op, X_h, params: ChannelParams) -> np.ndarray:
    """``ReLU(op X_h W + b)`` over hypernodes."""
    return _conv(op, X_h, params, "hypergraph channel")


def le_channel_forward(op, X_l, params: ChannelParams) -> np.ndarray:
    """``ReLU(op X_l W + b)`` over pair nodes."""
    return _conv(op, X_l, params, "line-expansion channel")


def le_back_project(back: sp.spmatrix, Z_pairs) -> np.ndarray:
    Z_pairs = np.asarray(Z_pairs, dtype=np.float64)
    if back.shape[1] != Z_pairs.shape[0]:
        raise ValueError(
            f"back projection {back.shape} cannot act on pair embeddings {Z_pairs.shape}"
        )
    return np.asarray(back @ Z_pairs)
