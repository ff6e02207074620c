"""Central finite-difference check of the analytic gradients."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import random_stream
from .hypergraph import Hypergraph
from .model import (
    GraphOperators,
    ModelParams,
    compute_gradients,
    forward,
    init_params,
    loss_value,
    parse_strategy,
)

__all__ = ["GradcheckInstance", "random_instance", "finite_difference", "check_gradients"]

KINK_MARGIN = 1e-4


@dataclass
class GradcheckInstance:
    ops: GraphOperators
    X: np.ndarray
    labels: np.ndarray
    mask: np.ndarray
    params: ModelParams
    strategy: str


def _random_hypergraph(rng, n: int, m: int) -> Hypergraph:
    edges = [list(rng.choice(n, size=int(rng.integers(2, 5)), replace=False)) for _ in range(m)]
    # keep every node covered so both channels see all of them
    for v in np.setdiff1d(np.arange(n), np.concatenate(edges)):
        edges[int(rng.integers(m))].append(v)
    return Hypergraph(n, edges)


def random_instance(seed: int = 0, strategy="attention", n: int = 12, m: int = 6,
                    d: int = 5, h: int = 4, c: int = 3) -> GradcheckInstance:
    """Seeded instance whose ReLU pre-activations all sit away from the kink."""
    strategy = parse_strategy(strategy)
    rng = random_stream(seed, 99)
    hg = _random_hypergraph(rng, n, m)
    ops = GraphOperators.from_hypergraph(hg)
    X = rng.normal(size=(n, d))
    labels = rng.integers(0, c, size=n)
    mask = np.sort(rng.choice(n, size=max(2, (2 * n) // 3), replace=False))
    for _ in range(1000):
        params = init_params(d, h, c, strategy, rng)
        for name, a in params.named_arrays().items():
            if name.endswith("bias"):
                a[...] = rng.normal(scale=0.5, size=a.shape)
        cache = forward(params, ops, X, strategy)
        pre = [cache[k] for k in ("pre_h", "pre_l") if k in cache]
        if all(np.min(np.abs(p)) >= KINK_MARGIN for p in pre):
            return GradcheckInstance(ops, X, labels, mask, params, str(strategy))
    raise RuntimeError("could not draw parameters away from ReLU kinks")


def finite_difference(inst: GradcheckInstance, weight_decay: float, eps: float = 1e-6) -> dict:
    """Central differences of the loss for every parameter entry."""
    out = {}
    arrays = inst.params.named_arrays()
    for name, a in arrays.items():
        g = np.zeros_like(a)
        for idx in np.ndindex(a.shape):
            old = a[idx]
            a[idx] = old + eps
            up = loss_value(inst.params, inst.ops, inst.X, inst.labels, inst.mask, inst.strategy, weight_decay)
            a[idx] = old - eps
            down = loss_value(inst.params, inst.ops, inst.X, inst.labels, inst.mask, inst.strategy, weight_decay)
            a[idx] = old
            g[idx] = (up - down) / (2 * eps)
        out[name] = g
    return out


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """Worst elementwise ``|a - n| / max(|a|, |n|)``; the denominator is floored
    at 1e-8 so entries that are zero in both (dead ReLU units) count as exact."""
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-8)
    return float(np.max(np.abs(analytic - numeric) / scale))


def check_gradients(seed: int = 0, strategy="attention", eps: float = 1e-6,
                    weight_decay: float = 5e-4, corrupt: str | None = None, **shape) -> dict:
    """Return ``{parameter name: relative error}`` for one seeded instance.

    ``corrupt`` names a parameter whose analytic gradient is deliberately
    perturbed; it exists so callers can confirm the check actually fails.
    """
    inst = random_instance(seed, strategy, **shape)
    _, grads, _ = compute_gradients(
        inst.params, inst.ops, inst.X, inst.labels, inst.mask, inst.strategy, weight_decay
    )
    if corrupt is not None:
        if corrupt not in grads:
            raise KeyError(f"no parameter named {corrupt!r}")
        grads[corrupt] = grads[corrupt] * 1.5 + 1e-3
    numeric = finite_difference(inst, weight_decay, eps)
    return {k: relative_error(grads[k], numeric[k]) for k in grads}
