"""Dual-channel model: parameters, forward pass, loss and its exact gradients."""

from __future__ import annotations

import copy
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .channels import ChannelParams, relu
from .fusion import AttentionParams, CommConvParams, attend, attend_backward, softmax
from .hypergraph import Hypergraph, hyper_norm_operator
from .line_expansion import back_projection_matrix, le_norm_operator, line_expand, projection_matrix

__all__ = [
    "NumericalError",
    "Strategy",
    "parse_strategy",
    "STRATEGY_NAMES",
    "GraphOperators",
    "ModelParams",
    "init_params",
    "forward",
    "classify",
    "cross_entropy",
    "compute_gradients",
    "loss_value",
    "DECAYED",
]


class NumericalError(ArithmeticError):
    """A non-finite value appeared in the forward or reverse pass."""


STRATEGY_NAMES = ("attention", "attention-nocommon", "commconv", "fixed", "le-only", "hg-only")


@dataclass(frozen=True)
class Strategy:
    kind: str
    alpha: float | None = None

    @property
    def uses_hg(self) -> bool:
        return self.kind != "le-only"

    @property
    def uses_le(self) -> bool:
        return self.kind != "hg-only"

    @property
    def uses_attention(self) -> bool:
        return self.kind in ("attention", "attention-nocommon", "commconv")

    def __str__(self) -> str:
        return f"fixed:{self.alpha:g}" if self.kind == "fixed" else self.kind


def parse_strategy(text) -> Strategy:
    """Parse ``attention``, ``fixed:0.3``, ``le-only`` and friends."""
    if isinstance(text, Strategy):
        return text
    text = str(text).strip()
    if text.startswith("fixed:"):
        try:
            alpha = float(text.split(":", 1)[1])
        except ValueError:
            raise ValueError(f"cannot parse alpha in fusion strategy {text!r}") from None
        if not 0.0 <= alpha <= 1.0:
            raise ValueError(f"fixed fusion alpha must lie in [0, 1], got {alpha}")
        return Strategy("fixed", alpha)
    if text not in STRATEGY_NAMES or text == "fixed":
        raise ValueError(
            f"unknown fusion strategy {text!r}; expected one of "
            "attention, attention-nocommon, commconv, fixed:<alpha>, le-only, hg-only"
        )
    return Strategy(text)


@dataclass(frozen=True)
class GraphOperators:
    """Everything the forward pass needs from the hypergraph, built once."""

    hyper_op: sp.csr_matrix
    le_op: sp.csr_matrix
    projection: sp.csr_matrix
    back_projection: sp.csr_matrix

    @classmethod
    def from_hypergraph(cls, hg: Hypergraph) -> "GraphOperators":
        le = line_expand(hg)
        return cls(
            hyper_norm_operator(hg),
            le_norm_operator(le),
            projection_matrix(hg, le),
            back_projection_matrix(hg, le),
        )

    @property
    def num_nodes(self) -> int:
        return self.hyper_op.shape[0]

    @property
    def num_pairs(self) -> int:
        return self.le_op.shape[0]


@dataclass
class ModelParams:
    classifier_weight: np.ndarray
    classifier_bias: np.ndarray
    hg_channel: ChannelParams | None = None
    le_channel: ChannelParams | None = None
    attention: AttentionParams | None = None
    commconv: CommConvParams | None = None

    def named_arrays(self) -> dict[str, np.ndarray]:
        """Parameter arrays keyed by dotted name. The arrays are live references."""
        out = {}
        if self.hg_channel is not None:
            out["hg_channel.weight"] = self.hg_channel.weight
            out["hg_channel.bias"] = self.hg_channel.bias
        if self.le_channel is not None:
            out["le_channel.weight"] = self.le_channel.weight
            out["le_channel.bias"] = self.le_channel.bias
        if self.attention is not None:
            out["attention.proj_weight"] = self.attention.proj_weight
            out["attention.proj_bias"] = self.attention.proj_bias
            out["attention.query"] = self.attention.query
        if self.commconv is not None:
            out["commconv.weight"] = self.commconv.weight
            out["commconv.bias"] = self.commconv.bias
        out["classifier.weight"] = self.classifier_weight
        out["classifier.bias"] = self.classifier_bias
        return out

    def copy(self) -> "ModelParams":
        return copy.deepcopy(self)

    @classmethod
    def from_arrays(cls, arrays: dict[str, np.ndarray]) -> "ModelParams":
        a = {k: np.array(v, dtype=np.float64) for k, v in arrays.items()}
        params = cls(a["classifier.weight"], a["classifier.bias"])
        if "hg_channel.weight" in a:
            params.hg_channel = ChannelParams(a["hg_channel.weight"], a["hg_channel.bias"])
        if "le_channel.weight" in a:
            params.le_channel = ChannelParams(a["le_channel.weight"], a["le_channel.bias"])
        if "attention.query" in a:
            params.attention = AttentionParams(
                a["attention.proj_weight"], a["attention.proj_bias"], a["attention.query"]
            )
        if "commconv.weight" in a:
            params.commconv = CommConvParams(a["commconv.weight"], a["commconv.bias"])
        return params


# parameters that receive L2 decay; biases are exempt
DECAYED = frozenset(
    {
        "hg_channel.weight",
        "le_channel.weight",
        "attention.proj_weight",
        "attention.query",
        "commconv.weight",
        "classifier.weight",
    }
)


def _glorot(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def init_params(
    num_features: int, hidden: int, num_classes: int, strategy, rng: np.random.Generator
) -> ModelParams:
    """Glorot-uniform weights, zero biases."""
    strategy = parse_strategy(strategy)
    params = ModelParams(
        classifier_weight=_glorot(rng, hidden, num_classes),
        classifier_bias=np.zeros(num_classes),
    )
    if strategy.uses_hg:
        params.hg_channel = ChannelParams(_glorot(rng, num_features, hidden), np.zeros(hidden))
    if strategy.uses_le:
        params.le_channel = ChannelParams(_glorot(rng, num_features, hidden), np.zeros(hidden))
    if strategy.uses_attention:
        params.attention = AttentionParams(
            _glorot(rng, hidden, hidden), np.zeros(hidden), _glorot(rng, hidden, 1).ravel()
        )
    if strategy.kind == "commconv":
        params.commconv = CommConvParams(_glorot(rng, hidden, hidden), np.zeros(hidden))
    return params


def _finite(name: str, value: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(value)):
        raise NumericalError(f"non-finite values in {name}")
    return value


def forward(params: ModelParams, ops: GraphOperators, X, strategy, masks=None) -> dict:
    """Run the full pipeline and return every intermediate.

    ``masks`` is ``None`` (evaluation) or a pair of dropout masks for the
    hypernode features and the projected pair features.
    """
    strategy = parse_strategy(strategy)
    X = np.asarray(X, dtype=np.float64)
    c = {"strategy": strategy}
    Z_l = Z_h = None
    if strategy.uses_hg:
        X_h = X if masks is None else X * masks[0]
        c["S_h"] = np.asarray(ops.hyper_op @ X_h)
        hg = params.hg_channel
        c["pre_h"] = _finite("hypergraph pre-activation", c["S_h"] @ hg.weight + hg.bias)
        Z_h = c["Z_h"] = relu(c["pre_h"])
    if strategy.uses_le:
        X_l = np.asarray(ops.projection @ X)
        if masks is not None:
            X_l = X_l * masks[1]
        c["S_l"] = np.asarray(ops.le_op @ X_l)
        le = params.le_channel
        c["pre_l"] = _finite("line-expansion pre-activation", c["S_l"] @ le.weight + le.bias)
        c["Zt_l"] = relu(c["pre_l"])
        Z_l = c["Z_l"] = np.asarray(ops.back_projection @ c["Zt_l"])

    kind = strategy.kind
    if kind == "hg-only":
        fused, weights = Z_h, np.ones((Z_h.shape[0], 1))
    elif kind == "le-only":
        fused, weights = Z_l, np.ones((Z_l.shape[0], 1))
    elif kind == "fixed":
        fused = Z_h + strategy.alpha * Z_l
        weights = np.tile([strategy.alpha, 1.0], (Z_h.shape[0], 1))
    else:
        channels = [Z_l, Z_h]
        if kind == "attention":
            channels.append((Z_l + Z_h) / 2.0)
        elif kind == "commconv":
            cc = params.commconv
            channels.append(((Z_h @ cc.weight + cc.bias) + (Z_l @ cc.weight + cc.bias)) / 2.0)
        fused, weights, hidden = attend(channels, params.attention)
        c["channels"], c["hidden"] = channels, hidden
    c["fused"] = _finite("fused embedding", fused)
    c["weights"] = weights
    c["logits"] = _finite("logits", fused @ params.classifier_weight + params.classifier_bias)
    c["probs"] = softmax(c["logits"], axis=1)
    return c


def classify(Z_out, weight, bias) -> np.ndarray:
    """Row-softmax of ``Z_out W + b``."""
    Z_out = np.asarray(Z_out, dtype=np.float64)
    if Z_out.shape[1] != np.shape(weight)[0] or np.shape(weight)[1] != np.shape(bias)[0]:
        raise ValueError(
            f"classifier shapes disagree: Z {Z_out.shape}, W {np.shape(weight)}, b {np.shape(bias)}"
        )
    return softmax(Z_out @ weight + bias, axis=1)


PROB_FLOOR = 1e-12


def cross_entropy(probs, labels, mask) -> float:
    """Mean negative log-likelihood of the true class over ``mask``."""
    mask = np.asarray(mask, dtype=np.int64)
    if mask.size == 0:
        raise ValueError("cross entropy over an empty mask")
    p = np.asarray(probs)[mask, np.asarray(labels)[mask]]
    return float(-np.mean(np.log(np.maximum(p, PROB_FLOOR))))


def loss_value(params: ModelParams, ops, X, labels, mask, strategy, weight_decay, masks=None) -> float:
    """Objective minimised in training: cross entropy plus L2 on weight matrices."""
    cache = forward(params, ops, X, strategy, masks)
    penalty = sum(
        float(np.sum(a * a)) for k, a in params.named_arrays().items() if k in DECAYED
    )
    return cross_entropy(cache["probs"], labels, mask) + 0.5 * weight_decay * penalty


def compute_gradients(
    params: ModelParams, ops, X, labels, mask, strategy, weight_decay: float, masks=None
):
    """Exact gradients of :func:`loss_value` for a fixed set of dropout masks.

    Returns ``(loss, grads, cache)`` where ``grads`` is keyed like
    :meth:`ModelParams.named_arrays`. ReLU has subgradient 0 at 0.
    """
    strategy = parse_strategy(strategy)
    labels = np.asarray(labels)
    mask = np.asarray(mask, dtype=np.int64)
    c = forward(params, ops, X, strategy, masks)
    probs = c["probs"]
    loss = cross_entropy(probs, labels, mask)

    d_logits = np.zeros_like(probs)
    picked = probs[mask, labels[mask]]
    d_logits[mask] = probs[mask]
    d_logits[mask, labels[mask]] -= 1.0
    # rows where the floor is active contribute a constant, hence zero gradient
    d_logits[mask[picked < PROB_FLOOR]] = 0.0
    d_logits /= len(mask)

    g = {
        "classifier.weight": c["fused"].T @ d_logits,
        "classifier.bias": d_logits.sum(axis=0),
    }
    d_fused = _finite("fused-embedding gradient", d_logits @ params.classifier_weight.T)

    kind = strategy.kind
    d_Z_l = d_Z_h = None
    if kind == "hg-only":
        d_Z_h = d_fused
    elif kind == "le-only":
        d_Z_l = d_fused
    elif kind == "fixed":
        d_Z_h = d_fused
        d_Z_l = strategy.alpha * d_fused
    else:
        d_channels, g_att = attend_backward(
            c["channels"], params.attention, c["weights"], c["hidden"], d_fused
        )
        for k, v in g_att.items():
            g[f"attention.{k}"] = v
        d_Z_l, d_Z_h = d_channels[0], d_channels[1]
        if kind == "attention":
            d_Z_l = d_Z_l + d_channels[2] / 2.0
            d_Z_h = d_Z_h + d_channels[2] / 2.0
        elif kind == "commconv":
            cc = params.commconv
            d_common = d_channels[2] / 2.0
            g["commconv.weight"] = (c["Z_h"] + c["Z_l"]).T @ d_common
            g["commconv.bias"] = 2.0 * d_common.sum(axis=0)
            d_Z_l = d_Z_l + d_common @ cc.weight.T
            d_Z_h = d_Z_h + d_common @ cc.weight.T

    if strategy.uses_hg:
        d_pre = _finite("hypergraph-channel gradient", d_Z_h * (c["pre_h"] > 0))
        g["hg_channel.weight"] = c["S_h"].T @ d_pre
        g["hg_channel.bias"] = d_pre.sum(axis=0)
    if strategy.uses_le:
        d_Zt = np.asarray(ops.back_projection.T @ d_Z_l)
        d_pre = _finite("line-expansion-channel gradient", d_Zt * (c["pre_l"] > 0))
        g["le_channel.weight"] = c["S_l"].T @ d_pre
        g["le_channel.bias"] = d_pre.sum(axis=0)

    arrays = params.named_arrays()
    penalty = 0.0
    for k in arrays:
        if k in DECAYED:
            g[k] = g[k] + weight_decay * arrays[k]
            penalty += float(np.sum(arrays[k] ** 2))
    loss += 0.5 * weight_decay * penalty
    if not np.isfinite(loss):
        raise NumericalError("non-finite loss")
    return loss, {k: g[k] for k in arrays}, c
