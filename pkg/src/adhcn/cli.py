"""Command line entry point: ``adhcn {train,expand,gensynth,gradcheck,report}``.

Exit codes: 0 success, 1 usage, 2 data or schema problem, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from collections import Counter
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from threadpoolctl import threadpool_limits

from .checkpoint import save_checkpoint
from .data import (
    SchemaError,
    SynthConfig,
    dataset_checksum,
    gen_planted_partition,
    load_hgjson,
    load_hypergraph,
    make_splits,
    save_hgjson,
)
from .gradcheck import check_gradients
from .hypergraph import InvalidHypergraphError
from .line_expansion import line_expand
from .model import GraphOperators, NumericalError, forward, init_params, parse_strategy
from .report import REPORT_STRATEGIES, run_sweep, summarize_sweep, sweep_workers, to_csv, to_markdown
from .training import TrainConfig, train

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3

GRADCHECK_STRATEGIES = ("attention", "attention-nocommon", "commconv", "fixed:0.5", "le-only", "hg-only")

log = logging.getLogger("adhcn")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _fusion(text: str) -> str:
    try:
        return str(parse_strategy(text))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_training_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--lr", type=float, default=0.001)
    p.add_argument("--weight-decay", type=float, default=0.0005)
    p.add_argument("--hidden", type=int, default=64)
    p.add_argument("--dropout", type=float, default=0.5)
    p.add_argument("--patience", type=int, default=50)
    p.add_argument("--split-seed", type=int, default=0,
                   help="seed for splits when the dataset file carries none")
    p.add_argument("--train-per-class", type=int, default=20)
    p.add_argument("--val-total", type=int, default=None)


def _config(args, fusion: str) -> TrainConfig:
    try:
        return TrainConfig(
            learning_rate=args.lr,
            weight_decay=args.weight_decay,
            dropout=args.dropout,
            hidden=args.hidden,
            max_epochs=args.epochs,
            patience=args.patience,
            seed=args.seed,
            fusion_strategy=fusion,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _load_with_splits(path, args):
    ds = load_hgjson(path)
    if ds.splits is None:
        ds = ds.with_splits(
            make_splits(ds.labels, args.train_per_class, args.val_total, args.split_seed)
        )
    return ds


def _write_rows(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if header:
            w.writerow(header)
        w.writerows(rows)


def _fmt(x: float) -> str:
    return "" if x is None or np.isnan(x) else repr(float(x))


def cmd_train(args) -> int:
    config = _config(args, args.fusion)
    ds = _load_with_splits(args.data, args)
    ops = GraphOperators.from_hypergraph(ds.hypergraph)
    params, report = train(ds, config, ops)
    cache = forward(params, ops, ds.features, config.fusion_strategy)

    deterministic = sweep_workers() == 0
    doc = {
        "format": "adhcn-metrics-v1",
        "dataset": ds.name,
        "config": config.to_dict(),
        "seed": config.seed,
        "epochs_run": report.epochs_run,
        "best_epoch": report.best_epoch,
        **{part: report.metrics.get(part) for part in ("train", "val", "test")},
        "fusion_weights_mean": cache["weights"].mean(axis=0).tolist(),
        # timing varies run to run, so it is left out in deterministic mode
        "wall_clock_seconds": None if deterministic else report.wall_clock_seconds,
    }
    Path(args.out_metrics).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    val = report.val_acc or [None] * report.epochs_run
    _write_rows(
        args.out_curves,
        ["epoch", "train_loss", "train_acc", "val_acc"],
        [
            [i + 1, _fmt(report.train_loss[i]), _fmt(report.train_acc[i]), _fmt(val[i])]
            for i in range(report.epochs_run)
        ],
    )
    if args.out_embeddings:
        _write_rows(args.out_embeddings, None, [[repr(float(v)) for v in row] for row in cache["fused"]])
    if args.checkpoint:
        save_checkpoint(args.checkpoint, params, config.to_dict())
    test = report.metrics.get("test")
    if test:
        print(f"test acc {test['acc']:.4f}  macro-R {test['macro_recall']:.4f}  "
              f"macro-F1 {test['macro_f1']:.4f}  (best epoch {report.best_epoch}/{report.epochs_run})")
    if not deterministic:
        log.info("wall clock %.2fs", report.wall_clock_seconds)
    return EXIT_OK


def cmd_expand(args) -> int:
    hg = load_hypergraph(args.data)
    le = line_expand(hg)
    upper = sp.triu(le.adjacency, k=1).tocoo()
    doc = {
        "pairs": le.pairs.tolist(),
        "edges": [[int(i), int(j), float(w)] for i, j, w in zip(upper.row, upper.col, upper.data)],
    }
    text = json.dumps(doc)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    elif not args.stats:
        print(text)
    if args.stats:
        degrees = np.diff(le.adjacency.indptr)
        print(f"pairs: {le.num_pairs}")
        print(f"edges: {upper.nnz}")
        print("degree histogram:")
        for deg, count in sorted(Counter(degrees.tolist()).items()):
            print(f"  {deg}: {count}")
    return EXIT_OK


def cmd_gensynth(args) -> int:
    try:
        cfg = SynthConfig(
            num_nodes=args.nodes, num_classes=args.classes, num_edges=args.edges,
            edge_size=args.edge_size, p_intra=args.p_intra, feature_dim=args.feature_dim,
            noise_sigma=args.noise, seed=args.seed,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    ds = gen_planted_partition(cfg, name=args.name)
    if not args.no_splits:
        ds = ds.with_splits(make_splits(ds.labels, args.train_per_class, args.val_total, args.seed))
    save_hgjson(ds, args.out)
    print(f"wrote {args.out} ({cfg.num_nodes} nodes, {cfg.num_edges} hyperedges) sha256 {dataset_checksum(ds)}")
    return EXIT_OK


def cmd_gradcheck(args) -> int:
    strategies = GRADCHECK_STRATEGIES if args.fusion == "all" else (_fusion(args.fusion),)
    print(f"finite-difference check: eps={args.eps:g} tol={args.tol:g} seed={args.seed}")
    worst = 0.0
    for strategy in strategies:
        try:
            errors = check_gradients(
                args.seed, strategy, eps=args.eps, weight_decay=args.weight_decay,
                corrupt=args.corrupt if args.corrupt in _param_names(strategy) else None,
            )
        except KeyError as exc:
            raise UsageError(str(exc)) from None
        for name, err in errors.items():
            worst = max(worst, err)
            status = "ok" if err < args.tol else "FAIL"
            print(f"  {strategy:<20} {name:<24} {err:.3e}  {status}")
    print(f"max relative error {worst:.3e}")
    return EXIT_OK if worst < args.tol else EXIT_NUMERIC


def _param_names(strategy) -> set:
    return set(init_params(2, 2, 2, strategy, np.random.default_rng(0)).named_arrays())


def cmd_report(args) -> int:
    base = _config(args, "attention")
    datasets = [_load_with_splits(p, args) for p in args.data]
    strategies = [_fusion(s) for s in args.strategies] if args.strategies else REPORT_STRATEGIES
    results = run_sweep(datasets, args.seeds, base, strategies, workers=sweep_workers())
    rows = summarize_sweep(results)
    md = to_markdown(rows)
    if args.out_md:
        Path(args.out_md).write_text(md, encoding="utf-8")
    else:
        print(md)
    if args.out_csv:
        Path(args.out_csv).write_text(to_csv(rows), encoding="utf-8")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="adhcn", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="train and evaluate on an HGJSON dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--fusion", type=_fusion, default="attention")
    _add_training_flags(p)
    p.add_argument("--out-metrics", default="metrics.json")
    p.add_argument("--out-curves", default="curves.csv")
    p.add_argument("--out-embeddings")
    p.add_argument("--checkpoint")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("expand", help="write the line expansion of a hypergraph")
    p.add_argument("--data", required=True)
    p.add_argument("--out")
    p.add_argument("--stats", action="store_true")
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("gensynth", help="generate a planted-partition dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--name")
    p.add_argument("--nodes", type=int, default=600)
    p.add_argument("--classes", type=int, default=4)
    p.add_argument("--edges", type=int, default=300)
    p.add_argument("--edge-size", type=int, default=4)
    p.add_argument("--p-intra", type=float, default=0.9)
    p.add_argument("--feature-dim", type=int, default=16)
    p.add_argument("--noise", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--train-per-class", type=int, default=20)
    p.add_argument("--val-total", type=int, default=None)
    p.add_argument("--no-splits", action="store_true")
    p.set_defaults(func=cmd_gensynth)

    p = sub.add_parser("gradcheck", help="compare gradients with central finite differences")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eps", type=float, default=1e-6)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--weight-decay", type=float, default=0.0005)
    p.add_argument("--fusion", default="all", help="a fusion strategy or 'all'")
    p.add_argument("--corrupt", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("report", help="strategy sweep over datasets and seeds")
    p.add_argument("--data", nargs="+", required=True)
    p.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    p.add_argument("--strategies", nargs="+")
    p.add_argument("--out-md")
    p.add_argument("--out-csv")
    _add_training_flags(p)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(message)s")
    try:
        # single-threaded BLAS keeps reductions, and so outputs, reproducible
        with threadpool_limits(limits=1):
            return args.func(args)
    except UsageError as exc:
        print(f"adhcn {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SchemaError, InvalidHypergraphError, FileNotFoundError, ValueError) as exc:
        print(f"adhcn {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"adhcn {args.command}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
