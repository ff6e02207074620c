"""HGJSON datasets, deterministic splits and a planted-partition generator."""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import jsonschema
import numpy as np

from .channels import random_stream
from .hypergraph import Hypergraph, InvalidHypergraphError

__all__ = [
    "SchemaError",
    "SplitSpec",
    "Dataset",
    "SynthConfig",
    "load_hgjson",
    "load_hypergraph",
    "save_hgjson",
    "dataset_to_dict",
    "dataset_from_dict",
    "dataset_checksum",
    "gen_planted_partition",
    "make_splits",
]


class SchemaError(ValueError):
    """An HGJSON document or dataset violates the format."""


HGJSON_SCHEMA = {
    "type": "object",
    "required": ["name", "num_hypernodes", "hyperedges", "labels", "num_classes"],
    "properties": {
        "name": {"type": "string"},
        "num_hypernodes": {"type": "integer", "minimum": 1},
        "hyperedges": {
            "type": "array",
            "minItems": 1,
            "items": {"type": "array", "minItems": 1, "items": {"type": "integer"}},
        },
        "hyperedge_weights": {"type": "array", "items": {"type": "number"}},
        "features": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
        "features_csv": {"type": "string"},
        "labels": {"type": "array", "items": {"type": "integer"}},
        "num_classes": {"type": "integer", "minimum": 2},
        "splits": {
            "type": "object",
            "required": ["train", "val", "test"],
            "properties": {
                k: {"type": "array", "items": {"type": "integer"}} for k in ("train", "val", "test")
            },
        },
    },
}


@dataclass(frozen=True)
class SplitSpec:
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray

    def __post_init__(self):
        for k in ("train", "val", "test"):
            object.__setattr__(self, k, np.asarray(getattr(self, k), dtype=np.int64).ravel())

    def validate(self, num_nodes: int) -> None:
        parts = [self.train, self.val, self.test]
        if self.train.size == 0:
            raise SchemaError("splits.train must not be empty")
        joined = np.concatenate(parts)
        if joined.size and (joined.min() < 0 or joined.max() >= num_nodes):
            raise SchemaError(f"split index outside [0, {num_nodes})")
        if len(np.unique(joined)) != joined.size:
            raise SchemaError("splits overlap or repeat an index")

    def __eq__(self, other):
        return isinstance(other, SplitSpec) and all(
            np.array_equal(getattr(self, k), getattr(other, k)) for k in ("train", "val", "test")
        )


@dataclass(frozen=True)
class Dataset:
    name: str
    hypergraph: Hypergraph
    features: np.ndarray
    labels: np.ndarray
    num_classes: int
    splits: SplitSpec | None = None

    def __post_init__(self):
        X = np.array(self.features, dtype=np.float64)
        y = np.array(self.labels, dtype=np.int64).ravel()
        n = self.hypergraph.num_nodes
        if X.ndim != 2 or X.shape[0] != n:
            raise SchemaError(f"features must have {n} rows, got shape {X.shape}")
        if not np.all(np.isfinite(X)):
            raise SchemaError("features contain NaN or Inf")
        if y.shape[0] != n:
            raise SchemaError(f"labels must have {n} entries, got {y.shape[0]}")
        if self.num_classes < 2:
            raise SchemaError("num_classes must be >= 2")
        if y.min() < 0 or y.max() >= self.num_classes:
            raise SchemaError(f"labels must lie in [0, {self.num_classes})")
        if self.splits is not None:
            self.splits.validate(n)
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)

    def with_splits(self, splits: SplitSpec) -> "Dataset":
        return Dataset(self.name, self.hypergraph, self.features, self.labels, self.num_classes, splits)

    def __eq__(self, other):
        return (
            isinstance(other, Dataset)
            and self.name == other.name
            and self.hypergraph == other.hypergraph
            and self.num_classes == other.num_classes
            and np.array_equal(self.features, other.features)
            and np.array_equal(self.labels, other.labels)
            and self.splits == other.splits
        )


def _validate(doc, schema) -> None:
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SchemaError(f"{where}: {exc.message}") from None


def _read_json(path: Path):
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from None


def _read_features_csv(path: Path) -> np.ndarray:
    rows = []
    try:
        with open(path, newline="") as fh:
            for i, row in enumerate(csv.reader(fh)):
                if not row:
                    continue
                try:
                    rows.append([float(x) for x in row])
                except ValueError:
                    raise SchemaError(f"{path}: row {i} has a non-numeric entry") from None
    except OSError as exc:
        raise SchemaError(f"cannot read features_csv {path}: {exc}") from None
    if rows and len({len(r) for r in rows}) > 1:
        raise SchemaError(f"{path}: ragged feature rows")
    return np.array(rows, dtype=np.float64)


def dataset_from_dict(doc: dict, base_dir: Path | None = None) -> Dataset:
    """Validate an HGJSON document and build the dataset it describes."""
    _validate(doc, HGJSON_SCHEMA)
    if ("features" in doc) == ("features_csv" in doc):
        raise SchemaError("exactly one of 'features' or 'features_csv' is required")
    if "features" in doc:
        rows = doc["features"]
        if len({len(r) for r in rows}) > 1:
            raise SchemaError("features: ragged feature rows")
        X = np.array(rows, dtype=np.float64)
    else:
        X = _read_features_csv(Path(base_dir or ".") / doc["features_csv"])
    try:
        hg = Hypergraph(doc["num_hypernodes"], doc["hyperedges"], doc.get("hyperedge_weights"))
    except InvalidHypergraphError as exc:
        raise SchemaError(f"hyperedges: {exc}") from None
    splits = None
    if "splits" in doc:
        s = doc["splits"]
        splits = SplitSpec(s["train"], s["val"], s["test"])
    return Dataset(doc["name"], hg, X, doc["labels"], doc["num_classes"], splits)


def dataset_to_dict(ds: Dataset) -> dict:
    doc = {
        "name": ds.name,
        "num_hypernodes": ds.hypergraph.num_nodes,
        "hyperedges": [list(e) for e in ds.hypergraph.hyperedges],
        "hyperedge_weights": list(ds.hypergraph.edge_weights),
        "features": ds.features.tolist(),
        "labels": ds.labels.tolist(),
        "num_classes": int(ds.num_classes),
    }
    if ds.splits is not None:
        doc["splits"] = {k: getattr(ds.splits, k).tolist() for k in ("train", "val", "test")}
    return doc


def load_hgjson(path) -> Dataset:
    path = Path(path)
    doc = _read_json(path)
    return dataset_from_dict(doc, base_dir=path.parent)


def load_hypergraph(path) -> Hypergraph:
    """Read only the structural fields of an HGJSON document."""
    path = Path(path)
    doc = _read_json(path)
    schema = dict(HGJSON_SCHEMA, required=["num_hypernodes", "hyperedges"])
    _validate(doc, schema)
    try:
        return Hypergraph(doc["num_hypernodes"], doc["hyperedges"], doc.get("hyperedge_weights"))
    except InvalidHypergraphError as exc:
        raise SchemaError(f"hyperedges: {exc}") from None


def save_hgjson(ds: Dataset, path) -> None:
    # json writes floats with repr, the shortest round-trip decimal form
    Path(path).write_text(json.dumps(dataset_to_dict(ds)), encoding="utf-8")


def dataset_checksum(ds: Dataset) -> str:
    canonical = json.dumps(dataset_to_dict(ds), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class SynthConfig:
    num_nodes: int = 600
    num_classes: int = 4
    num_edges: int = 300
    edge_size: int = 4
    p_intra: float = 0.9
    feature_dim: int = 16
    noise_sigma: float = 0.5
    seed: int = 42

    def __post_init__(self):
        if self.num_classes < 2:
            raise ValueError("num_classes must be >= 2")
        if self.edge_size < 2:
            raise ValueError("edge_size must be >= 2")
        if self.edge_size > self.num_nodes:
            raise ValueError("edge_size exceeds num_nodes")
        if self.num_nodes < self.num_classes:
            raise ValueError("need at least one node per class")
        if self.num_edges < 1:
            raise ValueError("num_edges must be >= 1")
        if not 0.0 < self.p_intra <= 1.0:
            raise ValueError("p_intra must lie in (0, 1]")
        if self.feature_dim < self.num_classes:
            raise ValueError("feature_dim must be >= num_classes to hold one-hot centroids")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")


def _deal(deck: list, members: np.ndarray, size: int, rng: np.random.Generator) -> list:
    """Take ``size`` distinct nodes from a shuffled deck, reshuffling when it runs out."""
    chosen, held = [], []
    while len(chosen) < size:
        if not deck:
            deck.extend(rng.permutation(members).tolist())
        v = deck.pop()
        (held if v in chosen else chosen).append(v)
    deck.extend(held)
    return chosen


def gen_planted_partition(cfg: SynthConfig, name: str | None = None) -> Dataset:
    """Planted-partition hypergraph with noisy one-hot class centroids as features.

    Labels are assigned round-robin. Each hyperedge is drawn inside one
    class with probability ``p_intra`` and from all nodes otherwise. Nodes
    are dealt from shuffled decks (one per class plus a global one) so every
    node is covered before any node repeats within a deck.
    """
    n, c = cfg.num_nodes, cfg.num_classes
    labels = np.arange(n) % c
    members = [np.flatnonzero(labels == k) for k in range(c)]
    everyone = np.arange(n)
    rng = random_stream(cfg.seed, 0)
    class_decks: list[list] = [[] for _ in range(c)]
    global_deck: list = []
    edges = []
    for _ in range(cfg.num_edges):
        if rng.random() < cfg.p_intra:
            for _attempt in range(100):
                k = int(rng.integers(c))
                if len(members[k]) >= cfg.edge_size:
                    break
            else:
                raise ValueError(
                    f"no class with at least {cfg.edge_size} nodes after 100 attempts"
                )
            edges.append(_deal(class_decks[k], members[k], cfg.edge_size, rng))
        else:
            edges.append(_deal(global_deck, everyone, cfg.edge_size, rng))

    frng = random_stream(cfg.seed, 1)
    X = np.zeros((n, cfg.feature_dim))
    X[np.arange(n), labels] = 1.0
    if cfg.noise_sigma > 0:
        X += frng.normal(0.0, cfg.noise_sigma, size=X.shape)
    return Dataset(name or f"planted-{n}-{c}-s{cfg.seed}", Hypergraph(n, edges), X, labels, c)


def make_splits(labels, train_per_class: int = 20, val_total: int | None = None, seed: int = 0) -> SplitSpec:
    """Stratified train split plus uniformly drawn validation; the rest is test.

    ``val_total`` defaults to 500 or 10% of the nodes, whichever is smaller.
    """
    labels = np.asarray(labels, dtype=np.int64)
    n = labels.shape[0]
    if val_total is None:
        val_total = min(500, n // 10)
    rng = random_stream(seed, 2)
    train = []
    for k in np.unique(labels):
        idx = np.flatnonzero(labels == k)
        if len(idx) < train_per_class:
            raise ValueError(
                f"class {k} has {len(idx)} nodes, fewer than train_per_class={train_per_class}"
            )
        train.append(rng.permutation(idx)[:train_per_class])
    train = np.sort(np.concatenate(train))
    rest = rng.permutation(np.setdiff1d(np.arange(n), train))
    if val_total > len(rest):
        raise ValueError(f"val_total={val_total} exceeds the {len(rest)} nodes left")
    val = np.sort(rest[:val_total])
    test = np.sort(rest[val_total:])
    return SplitSpec(train, val, test)

