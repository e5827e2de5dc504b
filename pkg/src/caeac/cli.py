"""Command line interface: ``caeac {train,eval,grid,compare}``.

Exit codes: 0 success, 2 configuration error, 3 data error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import bench
from .bench import ConfigError, DataError, TrialConfig
from .caeac import CAEAC
from .metrics import accuracy, ari, nmi

EXIT_OK, EXIT_CONFIG, EXIT_DATA = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma separated list of integers, got {text!r}") from None


def _add_data_args(p):
    p.add_argument("--data", required=True, help="CSV file with one label column")
    p.add_argument("--label-col", default="-1", help="label column index or header name (default: last)")
    p.add_argument("--no-header", action="store_true", help="the CSV has no header row")
    p.add_argument("--whitespace", action="store_true", help="fields are separated by whitespace, not commas")
    p.add_argument("--normalize", action="store_true", help="min-max scale every attribute (off by default)")


def _add_model_args(p):
    p.add_argument("--variant", default="base", choices=["base", "individual", "clustering"])
    p.add_argument("--lambda", dest="lam", type=int, default=50)
    p.add_argument("--amax", dest="a_max", type=int, default=10)
    p.add_argument("--predict-metric", default="cim", choices=["cim", "euclidean"])


def _add_eval_args(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--eval-mode", default="train", choices=["train", "holdout"])
    p.add_argument("--holdout-fraction", type=float, default=0.5)
    p.add_argument("--threads", type=int, default=None, help="worker threads (default: CAEAC_THREADS or all cores)")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="caeac", description="Growing CIM-based clustering and class-incremental classification.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="fit a classifier on a CSV and save it as JSON")
    _add_data_args(p)
    _add_model_args(p)
    p.add_argument("--seed", type=int, default=None, help="shuffle rows with this seed before training")
    p.add_argument("--out", required=True)

    p = sub.add_parser("eval", help="score a saved model on a CSV")
    p.add_argument("--model", required=True)
    _add_data_args(p)
    p.add_argument("--out", default=None, help="write the JSON report here instead of stdout")

    p = sub.add_parser("trials", help="seeded repeated trials for one configuration")
    _add_data_args(p)
    _add_model_args(p)
    _add_eval_args(p)
    p.add_argument("--out", default=None)

    p = sub.add_parser("grid", help="grid search over lambda and a_max")
    _add_data_args(p)
    p.add_argument("--variant", default="base", choices=["base", "individual", "clustering"])
    p.add_argument("--predict-metric", default="cim", choices=["cim", "euclidean"])
    p.add_argument("--lambdas", type=_int_list, default=list(bench.DEFAULT_LAMBDAS))
    p.add_argument("--amaxes", type=_int_list, default=list(bench.DEFAULT_A_MAXES))
    _add_eval_args(p)
    p.add_argument("--out", default=None)

    p = sub.add_parser("compare", help="Friedman / Nemenyi comparison of saved reports")
    p.add_argument("--reports", nargs="+", required=True, help="report files; NAME=path sets the algorithm name")
    p.add_argument("--metrics", default="accuracy,nmi,ari")
    p.add_argument("--per-trial", action="store_true", help="use every trial as a measurement, not just means")
    p.add_argument("--alpha", type=float, default=0.05, choices=[0.05, 0.10])
    p.add_argument("--out", default=None)
    return ap


def _load(args) -> bench.Dataset:
    ds = bench.load_csv(args.data, args.label_col, header=not args.no_header, delimiter=None if args.whitespace else ",")
    if args.normalize:
        ds.X = bench.min_max_normalize(ds.X)
        ds.provenance += " (min-max normalized)"
    return ds


def _emit(doc: dict, out) -> None:
    text = json.dumps(doc, indent=1, sort_keys=True, default=_jsonable)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _jsonable(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def cmd_train(args) -> int:
    TrialConfig(args.variant, args.lam, args.a_max, predict_metric=args.predict_metric)
    ds = _load(args)
    order = np.arange(ds.n) if args.seed is None else bench.trial_rng(args.seed, 0).permutation(ds.n)
    clf = CAEAC(args.lam, args.a_max, args.variant, args.predict_metric)
    clf.fit(ds.X[order], [ds.y[i] for i in order])
    clf.save(args.out)
    print(f"trained {len(clf.class_order)} classes, {clf.n_nodes} nodes, {clf.n_clusters} clusters -> {args.out}")
    return EXIT_OK


def cmd_eval(args) -> int:
    try:
        clf = CAEAC.load(args.model)
    except FileNotFoundError:
        raise DataError(f"{args.model}: no such file") from None
    except (json.JSONDecodeError, KeyError, TypeError) as e:
        raise DataError(f"{args.model}: not a model file ({e})") from None
    ds = _load(args)
    if clf.dim is not None and ds.d != clf.dim:
        raise DataError(f"{args.data} has {ds.d} attributes, the model expects {clf.dim}")
    pred = clf.predict(ds.X)
    doc = {
        "schema_version": bench.SCHEMA_VERSION,
        "kind": "eval",
        "model": str(args.model),
        "dataset": ds.describe(),
        "accuracy": accuracy(pred, ds.y),
        "nmi": nmi(pred, ds.y),
        "ari": ari(pred, ds.y) if ds.n >= 2 else 1.0,
        "node_count": clf.n_nodes,
        "cluster_count": clf.n_clusters,
    }
    _emit(doc, args.out)
    return EXIT_OK


def cmd_trials(args) -> int:
    cfg = TrialConfig(
        args.variant, args.lam, args.a_max, args.seed, args.trials, args.eval_mode, args.holdout_fraction, args.predict_metric
    )
    _emit(bench.run_trials(_load(args), cfg, args.threads), args.out)
    return EXIT_OK


def cmd_grid(args) -> int:
    # validate every cell before loading data so config errors win
    for lam in args.lambdas:
        for a in args.amaxes:
            TrialConfig(args.variant, lam, a, args.seed, args.trials, args.eval_mode, args.holdout_fraction, args.predict_metric)
    rep = bench.grid_search(
        _load(args),
        args.variant,
        args.lambdas,
        args.amaxes,
        args.trials,
        args.seed,
        args.eval_mode,
        args.holdout_fraction,
        args.predict_metric,
        args.threads,
    )
    _emit(rep, args.out)
    return EXIT_OK


def cmd_compare(args) -> int:
    metrics = [m.strip() for m in args.metrics.split(",") if m.strip()]
    if not metrics or any(m not in bench.METRICS for m in metrics):
        raise ConfigError(f"metrics must be drawn from {bench.METRICS}")
    grouped: dict[str, list] = {}
    for item in args.reports:
        name, sep, path = item.partition("=")
        if not sep:
            path = item
        try:
            doc = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise DataError(f"{path}: no such file") from None
        except json.JSONDecodeError as e:
            raise DataError(f"{path}: invalid JSON ({e})") from None
        if doc.get("schema_version") != bench.SCHEMA_VERSION or doc.get("kind") not in ("trials", "grid"):
            raise DataError(f"{path}: not a trials or grid report of schema {bench.SCHEMA_VERSION}")
        if not sep:
            name = doc["variant"] if doc["kind"] == "grid" else doc["config"]["variant"]
        grouped.setdefault(name, []).append(doc)
    table = bench.measurements_table(grouped, metrics, args.per_trial)
    _emit(bench.compare_algorithms(table, args.alpha), args.out)
    return EXIT_OK


COMMANDS = {"train": cmd_train, "eval": cmd_eval, "trials": cmd_trials, "grid": cmd_grid, "compare": cmd_compare}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except ConfigError as e:
        print(f"caeac: config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as e:
        print(f"caeac: data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as e:  # shape or label problems surfacing from the models
        print(f"caeac: data error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
