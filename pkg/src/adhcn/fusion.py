"""Combining the two channel embeddings into one representation per node.

The attention scorer is shared across channels: for node ``i`` and channel
``t`` the score is ``q . tanh(W z_ti + b)`` and the channel weights are the
softmax of the scores over channels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "AttentionParams",
    "CommConvParams",
    "FusionOutput",
    "attention_fuse",
    "fixed_alpha_fuse",
    "commconv_fuse",
    "attend",
    "attend_backward",
    "softmax",
]


@dataclass
class AttentionParams:
    proj_weight: np.ndarray
    proj_bias: np.ndarray
    query: np.ndarray


@dataclass
class CommConvParams:
    weight: np.ndarray
    bias: np.ndarray


@dataclass
class FusionOutput:
    fused: np.ndarray
    weights: np.ndarray


def softmax(x: np.ndarray, axis: int = -1) -> np.ndarray:
    shifted = x - x.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=axis, keepdims=True)


def _same_shape(Z_l, Z_h):
    Z_l = np.asarray(Z_l, dtype=np.float64)
    Z_h = np.asarray(Z_h, dtype=np.float64)
    if Z_l.shape != Z_h.shape or Z_l.ndim != 2:
        raise ValueError(f"channel outputs differ in shape: {Z_l.shape} vs {Z_h.shape}")
    return Z_l, Z_h


def attend(channels, att: AttentionParams):
    """Attention-weighted sum of ``channels``.

    Returns ``(fused, weights, hidden)``; ``hidden`` holds the tanh
    activations per channel and is what the reverse pass needs.
    """
    hidden = [np.tanh(Z @ att.proj_weight.T + att.proj_bias) for Z in channels]
    scores = np.column_stack([U @ att.query for U in hidden])
    weights = softmax(scores, axis=1)
    fused = sum(weights[:, [t]] * Z for t, Z in enumerate(channels))
    return fused, weights, hidden


def attend_backward(channels, att: AttentionParams, weights, hidden, d_fused):
    """Reverse pass of :func:`attend`.

    Returns the gradients w.r.t. each channel input and a dict of gradients
    for the attention parameters.
    """
    d_weights = np.column_stack([(d_fused * Z).sum(axis=1) for Z in channels])
    d_scores = weights * (d_weights - (weights * d_weights).sum(axis=1, keepdims=True))
    d_proj_weight = np.zeros_like(att.proj_weight)
    d_proj_bias = np.zeros_like(att.proj_bias)
    d_query = np.zeros_like(att.query)
    d_channels = []
    for t, (Z, U) in enumerate(zip(channels, hidden)):
        d_query += U.T @ d_scores[:, t]
        d_pre = np.outer(d_scores[:, t], att.query) * (1.0 - U * U)
        d_proj_weight += d_pre.T @ Z
        d_proj_bias += d_pre.sum(axis=0)
        d_channels.append(weights[:, [t]] * d_fused + d_pre @ att.proj_weight)
    grads = {"proj_weight": d_proj_weight, "proj_bias": d_proj_bias, "query": d_query}
    return d_channels, grads


def attention_fuse(Z_l, Z_h, params: AttentionParams, include_common: bool = True) -> FusionOutput:
    """Fuse ``[Z_l, Z_h]`` or ``[Z_l, Z_h, (Z_l + Z_h) / 2]`` by attention."""
    Z_l, Z_h = _same_shape(Z_l, Z_h)
    channels = [Z_l, Z_h]
    if include_common:
        channels.append((Z_l + Z_h) / 2.0)
    fused, weights, _ = attend(channels, params)
    return FusionOutput(fused, weights)


def fixed_alpha_fuse(Z_l, Z_h, alpha: float) -> FusionOutput:
    """``Z_h + alpha * Z_l``; weight rows report ``(alpha, 1)``."""
    Z_l, Z_h = _same_shape(Z_l, Z_h)
    weights = np.tile([float(alpha), 1.0], (Z_l.shape[0], 1))
    return FusionOutput(Z_h + alpha * Z_l, weights)


def commconv_fuse(Z_l, Z_h, att: AttentionParams, cc: CommConvParams) -> FusionOutput:
    """Attention fusion whose common channel is the mean of an affine map of both."""
    Z_l, Z_h = _same_shape(Z_l, Z_h)
    Z_c = ((Z_h @ cc.weight + cc.bias) + (Z_l @ cc.weight + cc.bias)) / 2.0
    fused, weights, _ = attend([Z_l, Z_h, Z_c], att)
    return FusionOutput(fused, weights)
