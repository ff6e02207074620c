"""Plain-text checkpoints tagged ``adhcn-ckpt-v1``."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .model import ModelParams

FORMAT_TAG = "adhcn-ckpt-v1"

__all__ = ["FORMAT_TAG", "save_checkpoint", "load_checkpoint"]


def save_checkpoint(path, params: ModelParams, config: dict) -> None:
    """Write config echo, shapes and row-major values.

    Floats go through ``json`` which emits ``repr``, so every value
    survives the round trip bit for bit.
    """
    doc = {
        "format": FORMAT_TAG,
        "config": config,
        "parameters": [
            {"name": name, "shape": list(a.shape), "values": a.ravel().tolist()}
            for name, a in params.named_arrays().items()
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


def load_checkpoint(path) -> tuple[ModelParams, dict]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("format") != FORMAT_TAG:
        raise ValueError(f"{path}: expected format {FORMAT_TAG!r}, found {doc.get('format')!r}")
    arrays = {
        p["name"]: np.array(p["values"], dtype=np.float64).reshape(p["shape"])
        for p in doc["parameters"]
    }
    return ModelParams.from_arrays(arrays), doc["config"]
