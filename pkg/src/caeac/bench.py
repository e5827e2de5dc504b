"""Evaluation harness: CSV loading, seeded trials, grid search, comparisons.

Every trial shuffles the training rows with its own generator,
``numpy.random.Generator(PCG64(SeedSequence([seed, trial])))``, so a report
can be reproduced from the seed it records regardless of thread scheduling.
"""

from __future__ import annotations

import csv
import dataclasses
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .caeac import CAEAC
from .cim import CimVariant
from .metrics import accuracy, ari, friedman_nemenyi, nmi

SCHEMA_VERSION = 1
PRNG_NAME = "numpy PCG64 seeded by SeedSequence([seed, trial])"
DEFAULT_LAMBDAS = tuple(range(10, 101, 10))
DEFAULT_A_MAXES = tuple(range(2, 21, 2))
METRICS = ("accuracy", "nmi", "ari")


class ConfigError(ValueError):
    """Bad user configuration (CLI exit code 2)."""


class DataError(ValueError):
    """Unreadable or malformed data (CLI exit code 3)."""


@dataclass
class Dataset:
    name: str
    X: np.ndarray
    y: list
    provenance: str = ""

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def classes(self) -> list:
        return sorted(set(self.y))

    def describe(self) -> dict:
        return {"name": self.name, "n": self.n, "d": self.d, "classes": len(self.classes), "provenance": self.provenance}


def load_csv(path, label_column=-1, header: bool = True, name: str | None = None, delimiter: str | None = ",") -> Dataset:
    """Read a numeric CSV with one label column.

    ``label_column`` is a column index (negative counts from the end) or, when
    ``header`` is true, a column name. Labels are kept as strings.
    ``delimiter=None`` splits on runs of whitespace (UCI ``.txt`` style).
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"{path}: no such file")
    with path.open(newline="") as fh:
        reader = (line.split() for line in fh) if delimiter is None else csv.reader(fh, delimiter=delimiter)
        rows = [(i, r) for i, r in enumerate(reader, start=1) if r and any(c.strip() for c in r)]
    if header:
        if not rows:
            raise DataError(f"{path}: empty file")
        _, names = rows.pop(0)
        names = [c.strip() for c in names]
    else:
        names = None
    if not rows:
        raise DataError(f"{path}: no data rows")

    width = len(rows[0][1])
    if names is not None and len(names) != width:
        raise DataError(f"{path}:{rows[0][0]}: {width} fields but the header has {len(names)}")
    if isinstance(label_column, str) and not label_column.lstrip("-").isdigit():
        if names is None or label_column not in names:
            raise DataError(f"{path}: label column {label_column!r} not found")
        lc = names.index(label_column)
    else:
        lc = int(label_column)
        if not -width <= lc < width:
            raise DataError(f"{path}: label column {lc} out of range for {width} columns")
        lc %= width
    if width < 2:
        raise DataError(f"{path}: need at least one feature column besides the label")

    X = np.empty((len(rows), width - 1))
    y = []
    for r, (line, fields) in enumerate(rows):
        if len(fields) != width:
            raise DataError(f"{path}:{line}: expected {width} fields, got {len(fields)}")
        feats = fields[:lc] + fields[lc + 1 :]
        try:
            X[r] = [float(v) for v in feats]
        except ValueError:
            bad = next(v for v in feats if not _is_float(v))
            raise DataError(f"{path}:{line}: non-numeric feature value {bad!r}") from None
        if not np.all(np.isfinite(X[r])):
            raise DataError(f"{path}:{line}: missing or non-finite feature value")
        label = fields[lc].strip()
        if not label:
            raise DataError(f"{path}:{line}: empty label")
        y.append(label)
    return Dataset(name or path.stem, X, y, str(path))


def _is_float(v: str) -> bool:
    try:
        float(v)
        return True
    except ValueError:
        return False


def min_max_normalize(X: np.ndarray) -> np.ndarray:
    lo, hi = X.min(axis=0), X.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    return (X - lo) / span


@dataclass
class TrialConfig:
    variant: str = "base"
    lam: int = 50
    a_max: int = 10
    seed: int = 0
    trials: int = 20
    eval_mode: str = "train"
    holdout_fraction: float = 0.5
    predict_metric: str = "cim"

    def __post_init__(self):
        try:
            self.variant = CimVariant.parse(self.variant).value
        except ValueError as e:
            raise ConfigError(str(e)) from None
        if int(self.lam) != self.lam or self.lam < 4 or self.lam % 2:
            raise ConfigError(f"lambda must be an even integer >= 4, got {self.lam}")
        if int(self.a_max) != self.a_max or self.a_max < 1:
            raise ConfigError(f"a_max must be a positive integer, got {self.a_max}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.eval_mode not in ("train", "holdout"):
            raise ConfigError(f"eval_mode must be 'train' or 'holdout', got {self.eval_mode!r}")
        if not 0.0 < self.holdout_fraction < 1.0:
            raise ConfigError("holdout fraction must lie in (0, 1)")
        if self.predict_metric not in ("cim", "euclidean"):
            raise ConfigError(f"unknown predict metric {self.predict_metric!r}")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(trial)])))


def worker_count(requested: int | None = None) -> int:
    if requested is None:
        env = os.environ.get("CAEAC_THREADS", "").strip()
        requested = int(env) if env.isdigit() and int(env) > 0 else (os.cpu_count() or 1)
    return max(1, int(requested))


def run_trial(dataset: Dataset, config: TrialConfig, trial: int) -> dict:
    """Shuffle, fit, evaluate. Errors are caught and recorded in the result."""
    rng = trial_rng(config.seed, trial)
    order = rng.permutation(dataset.n)
    if config.eval_mode == "holdout":
        n_test = max(1, int(round(dataset.n * config.holdout_fraction)))
        test_idx, train_idx = order[:n_test], order[n_test:]
    else:
        train_idx = test_idx = order
    y = dataset.y
    rec: dict = {"trial": trial, "error": None}
    try:
        clf = CAEAC(config.lam, config.a_max, config.variant, config.predict_metric)
        t0 = time.perf_counter()
        clf.fit(dataset.X[train_idx], [y[i] for i in train_idx])
        rec["train_seconds"] = time.perf_counter() - t0
        pred = clf.predict(dataset.X[test_idx])
        truth = [y[i] for i in test_idx]
        rec["accuracy"] = accuracy(pred, truth)
        rec["nmi"] = nmi(pred, truth)
        rec["ari"] = ari(pred, truth) if len(truth) >= 2 else 1.0
        rec["node_count"] = clf.n_nodes
        rec["cluster_count"] = clf.n_clusters
    except Exception as e:  # recorded, never raised: one bad trial must not kill a grid
        rec["error"] = f"{type(e).__name__}: {e}"
    return rec


def _summarize(trials: list[dict]) -> tuple[dict, dict]:
    ok = [t for t in trials if t["error"] is None]
    mean, std = {}, {}
    for key in METRICS + ("node_count", "cluster_count", "train_seconds"):
        vals = np.array([t[key] for t in ok], dtype=np.float64)
        mean[key] = float(vals.mean()) if vals.size else None
        std[key] = float(vals.std()) if vals.size else None
    return mean, std


def _report(dataset: Dataset, config: TrialConfig, trials: list[dict]) -> dict:
    mean, std = _summarize(trials)
    failed = sum(t["error"] is not None for t in trials)
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "trials",
        "dataset": dataset.describe(),
        "config": config.to_dict(),
        "prng": PRNG_NAME,
        "trials": trials,
        "mean": mean,
        "std": std,
        "n_failed": failed,
        "excluded": failed == len(trials),
    }


def _run_many(jobs, workers: int | None):
    n = worker_count(workers)
    if n == 1 or len(jobs) == 1:
        return [run_trial(*job) for job in jobs]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(lambda job: run_trial(*job), jobs))


def run_trials(dataset: Dataset, config: TrialConfig, workers: int | None = None) -> dict:
    results = _run_many([(dataset, config, t) for t in range(config.trials)], workers)
    return _report(dataset, config, results)


def grid_search(
    dataset: Dataset,
    variant="base",
    lambdas: Sequence[int] = DEFAULT_LAMBDAS,
    a_maxes: Sequence[int] = DEFAULT_A_MAXES,
    trials: int = 20,
    seed: int = 0,
    eval_mode: str = "train",
    holdout_fraction: float = 0.5,
    predict_metric: str = "cim",
    workers: int | None = None,
) -> dict:
    """Run every (lambda, a_max) cell and pick the highest mean accuracy.

    Ties go to the smaller lambda, then the smaller a_max. Cells whose trials
    all failed are kept in the report but flagged ``excluded``.
    """
    if not lambdas or not a_maxes:
        raise ConfigError("the parameter grid is empty")
    configs = [
        TrialConfig(variant, lam, a, seed, trials, eval_mode, holdout_fraction, predict_metric)
        for lam in lambdas
        for a in a_maxes
    ]
    jobs = [(dataset, cfg, t) for cfg in configs for t in range(cfg.trials)]
    flat = _run_many(jobs, workers)
    cells = []
    for c, cfg in enumerate(configs):
        cells.append(_report(dataset, cfg, flat[c * trials : (c + 1) * trials]))
    best = pick_best(cells)
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "grid",
        "dataset": dataset.describe(),
        "variant": CimVariant.parse(variant).value,
        "seed": seed,
        "trials": trials,
        "eval_mode": eval_mode,
        "prng": PRNG_NAME,
        "grid": {"lambda": list(lambdas), "a_max": list(a_maxes)},
        "best": best,
        "cells": cells,
    }


def pick_best(cells: Sequence[dict]) -> dict | None:
    """Best cell summary from a list of trial reports (pure post-processing)."""
    live = [c for c in cells if not c["excluded"]]
    if not live:
        return None
    win = min(live, key=lambda c: (-c["mean"]["accuracy"], c["config"]["lam"], c["config"]["a_max"]))
    return {"lam": win["config"]["lam"], "a_max": win["config"]["a_max"], "mean": win["mean"], "std": win["std"]}


def compare_algorithms(reports: Mapping[str, Sequence[float]], alpha: float = 0.05) -> dict:
    """Friedman / Nemenyi summary for ``{algorithm: [metric values ...]}``.

    All algorithms must report the same number of measurements, in the same
    order (e.g. one per dataset and metric).
    """
    names = list(reports)
    if len(names) < 2:
        raise ConfigError("comparison needs at least two algorithms")
    lengths = {len(reports[n]) for n in names}
    if len(lengths) != 1:
        raise ConfigError(f"algorithms report different numbers of measurements: {sorted(lengths)}")
    table = np.array([list(map(float, reports[n])) for n in names])
    try:
        res = friedman_nemenyi(table, alpha)
    except ValueError as e:
        raise ConfigError(str(e)) from None
    ranks = res["mean_ranks"]
    order = np.argsort(ranks, kind="stable")
    sig = res["pairwise_significant"]
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "comparison",
        "algorithms": names,
        "n_measurements": table.shape[1],
        "statistic": res["statistic"],
        "friedman_p": res["friedman_p"],
        "friedman_rejected": bool(res["friedman_p"] < alpha),
        "alpha": alpha,
        "critical_distance": res["critical_distance"],
        "mean_ranks": {names[i]: float(ranks[i]) for i in range(len(names))},
        "rank_listing": [[names[i], float(ranks[i])] for i in order],
        "significant_pairs": [
            [names[i], names[j]] for i in range(len(names)) for j in range(i + 1, len(names)) if sig[i, j]
        ],
    }


def strip_timing(report: dict) -> dict:
    """Copy of a report without wall-clock fields (for reproducibility checks)."""
    if isinstance(report, dict):
        return {k: strip_timing(v) for k, v in report.items() if k != "train_seconds"}
    if isinstance(report, list):
        return [strip_timing(v) for v in report]
    return report


def report_measurements(report: dict, metrics: Sequence[str] = METRICS, per_trial: bool = False) -> dict:
    """Flatten a trials or grid report into ``{(dataset, metric[, trial]): value}``."""
    ds = report["dataset"]["name"]
    if report["kind"] == "grid":
        best = report["best"]
        if best is None:
            raise DataError(f"report for {ds} has no usable grid cell")
        cell = next(c for c in report["cells"] if c["config"]["lam"] == best["lam"] and c["config"]["a_max"] == best["a_max"])
    else:
        cell = report
    out = {}
    for m in metrics:
        if per_trial:
            for t in cell["trials"]:
                if t["error"] is None:
                    out[(ds, m, t["trial"])] = t[m]
        else:
            v = cell["mean"][m]
            out[(ds, m)] = float("nan") if v is None else v
    return out


def measurements_table(reports: Mapping[str, Sequence[dict]], metrics=METRICS, per_trial=False) -> dict:
    """``{algorithm: [values]}`` aligned on the measurement keys shared by all."""
    flat = {}
    for name, reps in reports.items():
        merged: dict = {}
        for r in reps:
            merged.update(report_measurements(r, metrics, per_trial))
        flat[name] = merged
    keys = sorted(set.intersection(*(set(v) for v in flat.values())), key=str)
    if not keys:
        raise DataError("the reports share no (dataset, metric) measurements")
    table = {name: [flat[name][k] for k in keys] for name in flat}
    if any(math.isnan(v) for vals in table.values() for v in vals):
        raise DataError("a report has no successful trials for a compared measurement")
    return table
