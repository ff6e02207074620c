"""Strategy sweeps over datasets and seeds, written as markdown and CSV."""

from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np

from .data import Dataset
from .model import GraphOperators
from .training import TrainConfig, train

__all__ = ["REPORT_STRATEGIES", "run_sweep", "summarize_sweep", "to_markdown", "to_csv", "sweep_workers"]

REPORT_STRATEGIES = (
    ["attention", "attention-nocommon", "commconv"]
    + [f"fixed:{a / 10:g}" for a in range(1, 10)]
    + ["le-only", "hg-only"]
)

METRIC_COLUMNS = (("acc", "Acc"), ("macro_recall", "R"), ("macro_f1", "F1"))


def sweep_workers() -> int:
    """Process count from ``ADHCN_THREADS``; unset or 0 means sequential."""
    raw = os.environ.get("ADHCN_THREADS", "0").strip() or "0"
    return max(0, int(raw))


def _cell(dataset: Dataset, config: TrainConfig, ops=None):
    try:
        _, report = train(dataset, config, ops)
    except (ArithmeticError, ValueError) as exc:
        return {"error": str(exc)}
    return report.metrics["test"]


def run_sweep(datasets, seeds, base: TrainConfig, strategies=REPORT_STRATEGIES, workers: int = 0):
    """Train every (dataset, strategy, seed) cell.

    Returns ``{(dataset name, strategy): [per-seed test metrics or {"error": ...}]}``.
    A failing cell is recorded and the sweep carries on.
    """
    jobs = [
        (ds, replace(base, fusion_strategy=s, seed=int(seed)))
        for ds in datasets
        for s in strategies
        for seed in seeds
    ]
    if workers > 0:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_cell, *zip(*jobs)))
    else:
        ops_cache = {id(ds): GraphOperators.from_hypergraph(ds.hypergraph) for ds in datasets}
        results = [_cell(ds, cfg, ops_cache[id(ds)]) for ds, cfg in jobs]
    out: dict = {}
    for (ds, cfg), res in zip(jobs, results):
        out.setdefault((ds.name, str(cfg.fusion_strategy)), []).append(res)
    return out


def summarize_sweep(results: dict) -> list[dict]:
    """Mean and population std over seeds for each cell."""
    rows = []
    for (name, strategy), cells in results.items():
        ok = [c for c in cells if "error" not in c]
        row = {"dataset": name, "strategy": strategy, "n_seeds": len(cells), "n_failed": len(cells) - len(ok)}
        for key, _ in METRIC_COLUMNS:
            vals = np.array([c[key] for c in ok])
            row[f"{key}_mean"] = float(vals.mean()) if ok else None
            row[f"{key}_std"] = float(vals.std()) if ok else None
        if len(ok) < len(cells):
            row["error"] = next(c["error"] for c in cells if "error" in c)
        rows.append(row)
    return rows


def to_markdown(rows: list[dict]) -> str:
    lines = []
    for name in dict.fromkeys(r["dataset"] for r in rows):
        lines += [f"### {name}", "", "| strategy | Acc | R | F1 |", "|---|---|---|---|"]
        for r in (r for r in rows if r["dataset"] == name):
            if r[f"{METRIC_COLUMNS[0][0]}_mean"] is None:
                cells = [f"failed: {r['error']}"] * 3
            else:
                cells = [f"{r[k + '_mean']:.3f} ± {r[k + '_std']:.3f}" for k, _ in METRIC_COLUMNS]
                if r["n_failed"]:
                    cells[0] += f" ({r['n_failed']} failed)"
            lines.append(f"| {r['strategy']} | " + " | ".join(cells) + " |")
        lines.append("")
    return "\n".join(lines)


def to_csv(rows: list[dict]) -> str:
    fields = ["dataset", "strategy", "n_seeds", "n_failed"] + [
        f"{k}_{s}" for k, _ in METRIC_COLUMNS for s in ("mean", "std")
    ]
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: ("" if r.get(k) is None else repr(r[k]) if isinstance(r[k], float) else r[k]) for k in fields})
    return buf.getvalue()
