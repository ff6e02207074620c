"""Full-batch training loop with Adam and validation-based early stopping."""

from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .channels import HG_STREAM, LE_STREAM, dropout_mask, random_stream
from .data import Dataset
from .metrics import confusion, summarize
from .model import (
    GraphOperators,
    ModelParams,
    NumericalError,
    compute_gradients,
    cross_entropy,
    forward,
    init_params,
    parse_strategy,
)

__all__ = [
    "TrainConfig",
    "TrainReport",
    "AdamState",
    "adam_step",
    "draw_masks",
    "fit_params",
    "evaluate",
    "train",
]

logger = logging.getLogger(__name__)

# stream keys: parameter init, then per-epoch dropout
INIT_KEY = 10
DROPOUT_KEY = 11


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.001
    weight_decay: float = 0.0005
    dropout: float = 0.5
    hidden: int = 64
    max_epochs: int = 200
    patience: int = 50
    seed: int = 0
    fusion_strategy: str = "attention"

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be >= 0")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must lie in [0, 1)")
        if self.hidden < 1:
            raise ValueError("hidden must be >= 1")
        if self.max_epochs < 0 or self.patience < 1:
            raise ValueError("max_epochs must be >= 0 and patience >= 1")
        object.__setattr__(self, "fusion_strategy", str(parse_strategy(self.fusion_strategy)))

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class TrainReport:
    train_loss: list = field(default_factory=list)
    train_acc: list = field(default_factory=list)
    val_acc: list = field(default_factory=list)
    val_loss: list = field(default_factory=list)
    best_epoch: int = 0
    epochs_run: int = 0
    metrics: dict = field(default_factory=dict)
    wall_clock_seconds: float = 0.0


@dataclass
class AdamState:
    m: dict
    v: dict
    t: int = 0

    @classmethod
    def zeros_like(cls, params: ModelParams) -> "AdamState":
        arrays = params.named_arrays()
        return cls(
            {k: np.zeros_like(a) for k, a in arrays.items()},
            {k: np.zeros_like(a) for k, a in arrays.items()},
        )


def adam_step(params: ModelParams, grads: dict, state: AdamState, lr: float,
              beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
    """Bias-corrected Adam update, applied in place. Returns ``(params, state)``."""
    state.t += 1
    c1 = 1.0 - beta1 ** state.t
    c2 = 1.0 - beta2 ** state.t
    for name, p in params.named_arrays().items():
        g = grads[name]
        m = state.m[name]
        v = state.v[name]
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * g * g
        p -= lr * (m / c1) / (np.sqrt(v / c2) + eps)
    return params, state


def draw_masks(n: int, num_pairs: int, d: int, rate: float, seed: int, epoch: int):
    """Dropout masks for one step; each channel owns its stream."""
    if rate == 0.0:
        return None
    return (
        dropout_mask((n, d), rate, random_stream(seed, DROPOUT_KEY, epoch, HG_STREAM)),
        dropout_mask((num_pairs, d), rate, random_stream(seed, DROPOUT_KEY, epoch, LE_STREAM)),
    )


def _accuracy(probs, labels, idx) -> float:
    if len(idx) == 0:
        return float("nan")
    # argmax picks the lowest index on ties
    return float(np.mean(probs[idx].argmax(axis=1) == labels[idx]))


def fit_params(ops: GraphOperators, X, labels, train_idx, val_idx, num_classes: int,
               config: TrainConfig):
    """Optimise the model on ``train_idx``; select the epoch by validation accuracy.

    Returns ``(best_params, report)``; ``report.metrics`` is left empty.
    """
    X = np.asarray(X, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    train_idx = np.asarray(train_idx, dtype=np.int64)
    val_idx = np.asarray(val_idx, dtype=np.int64)
    strategy = parse_strategy(config.fusion_strategy)
    params = init_params(
        X.shape[1], config.hidden, num_classes, strategy, random_stream(config.seed, INIT_KEY)
    )
    state = AdamState.zeros_like(params)
    report = TrainReport()
    best = params.copy()
    best_key = None
    stale = 0
    start = time.perf_counter()
    for epoch in range(1, config.max_epochs + 1):
        masks = draw_masks(X.shape[0], ops.num_pairs, X.shape[1], config.dropout, config.seed, epoch)
        try:
            # overflow is reported as NumericalError, so numpy's warnings add nothing
            with np.errstate(over="ignore", invalid="ignore"):
                loss, grads, _ = compute_gradients(
                    params, ops, X, labels, train_idx, strategy, config.weight_decay, masks
                )
                adam_step(params, grads, state, config.learning_rate)
                probs = forward(params, ops, X, strategy)["probs"]
        except NumericalError as exc:
            raise NumericalError(f"training diverged at epoch {epoch}: {exc}") from None
        if not np.all(np.isfinite(probs)):
            raise NumericalError(f"training diverged at epoch {epoch}: non-finite predictions")
        report.train_loss.append(loss)
        report.train_acc.append(_accuracy(probs, labels, train_idx))
        report.epochs_run = epoch
        if len(val_idx):
            val_acc = _accuracy(probs, labels, val_idx)
            val_loss = cross_entropy(probs, labels, val_idx)
            report.val_acc.append(val_acc)
            report.val_loss.append(val_loss)
            key = (val_acc, -val_loss)
            if best_key is None or key > best_key:
                best_key, best, report.best_epoch, stale = key, params.copy(), epoch, 0
            else:
                stale += 1
            logger.debug("epoch %d loss %.6f val_acc %.4f", epoch, loss, val_acc)
            if stale >= config.patience:
                break
        else:
            best, report.best_epoch = params.copy(), epoch
    report.wall_clock_seconds = time.perf_counter() - start
    return best, report


def evaluate(params: ModelParams, ops: GraphOperators, X, labels, idx, num_classes: int, strategy) -> dict:
    probs = forward(params, ops, X, strategy)["probs"]
    cm = confusion(labels, probs.argmax(axis=1), idx, num_classes)
    return summarize(cm)


def train(dataset: Dataset, config: TrainConfig, ops: GraphOperators | None = None):
    """Train on the dataset's splits and score train/val/test.

    Returns ``(params, report)``.
    """
    if dataset.splits is None:
        raise ValueError("dataset has no splits; build them with make_splits first")
    if ops is None:
        ops = GraphOperators.from_hypergraph(dataset.hypergraph)
    s = dataset.splits
    params, report = fit_params(
        ops, dataset.features, dataset.labels, s.train, s.val, dataset.num_classes, config
    )
    for part in ("train", "val", "test"):
        idx = getattr(s, part)
        if len(idx):
            report.metrics[part] = evaluate(
                params, ops, dataset.features, dataset.labels, idx,
                dataset.num_classes, config.fusion_strategy,
            )
    return params, report
