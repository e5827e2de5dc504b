"""Accuracy, NMI, ARI and the Friedman / Nemenyi comparison."""

from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy import stats

# Nemenyi critical values q_alpha (studentized range / sqrt(2)), k = 2..10
NEMENYI_Q = {
    0.05: (1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164),
    0.10: (1.645, 2.052, 2.291, 2.459, 2.589, 2.693, 2.780, 2.855, 2.920),
}


def _pairing(pred: Sequence, truth: Sequence, min_n: int = 1):
    pred, truth = list(pred), list(truth)
    if len(pred) != len(truth):
        raise ValueError(f"length mismatch: {len(pred)} predictions, {len(truth)} labels")
    if len(pred) < min_n:
        raise ValueError(f"need at least {min_n} labelled items, got {len(pred)}")
    return pred, truth


def contingency(a: Sequence, b: Sequence) -> np.ndarray:
    """Counts table with one row per distinct label of ``a``."""
    _, ia = np.unique(np.asarray(a, dtype=object).astype(str), return_inverse=True)
    _, ib = np.unique(np.asarray(b, dtype=object).astype(str), return_inverse=True)
    table = np.zeros((ia.max() + 1, ib.max() + 1), dtype=np.int64)
    np.add.at(table, (ia, ib), 1)
    return table


def accuracy(pred: Sequence, truth: Sequence) -> float:
    pred, truth = _pairing(pred, truth)
    return sum(p == t for p, t in zip(pred, truth)) / len(pred)


def _entropy(counts: np.ndarray, n: int) -> float:
    p = counts[counts > 0] / n
    return float(-(p * np.log(p)).sum())


def nmi(pred: Sequence, truth: Sequence) -> float:
    """Mutual information normalized by sqrt(H(U) H(V))."""
    pred, truth = _pairing(pred, truth)
    table = contingency(pred, truth)
    n = table.sum()
    rows, cols = table.sum(axis=1), table.sum(axis=0)
    hu, hv = _entropy(rows, n), _entropy(cols, n)
    if table.shape[0] == 1 and table.shape[1] == 1:
        return 1.0
    if hu == 0.0 or hv == 0.0:
        return 0.0
    nz = table > 0
    pij = table[nz] / n
    outer = np.outer(rows, cols)[nz] / (n * n)
    mi = float((pij * np.log(pij / outer)).sum())
    return float(min(max(mi / np.sqrt(hu * hv), 0.0), 1.0))


def _comb2(x) -> int:
    return sum(int(c) * (int(c) - 1) // 2 for c in np.ravel(x))


def ari(pred: Sequence, truth: Sequence) -> float:
    """Hubert-Arabie adjusted Rand index.

    Pair counts are exact Python integers and the index is formed with a
    single final division, so simple cases come out exact (e.g. -0.5).
    """
    pred, truth = _pairing(pred, truth, min_n=2)
    table = contingency(pred, truth)
    n = int(table.sum())
    index = _comb2(table)
    sum_a = _comb2(table.sum(axis=1))
    sum_b = _comb2(table.sum(axis=0))
    total = n * (n - 1) // 2
    # (index - sa sb / T) / ((sa + sb) / 2 - sa sb / T), scaled by 2T
    num = 2 * (index * total - sum_a * sum_b)
    den = (sum_a + sum_b) * total - 2 * sum_a * sum_b
    if den == 0:
        return 1.0
    return num / den


def nemenyi_q(k: int, alpha: float = 0.05) -> float:
    if k < 2:
        raise ValueError("need at least two algorithms")
    table = NEMENYI_Q.get(alpha)
    if table is not None and k <= len(table) + 1:
        return table[k - 2]
    return float(stats.studentized_range.ppf(1.0 - alpha, k, np.inf) / np.sqrt(2.0))


def rank_rows(results) -> np.ndarray:
    """Rank algorithms (rows) within each measurement column; 1 = highest value."""
    r = np.asarray(results, dtype=np.float64)
    return np.column_stack([stats.rankdata(-r[:, j]) for j in range(r.shape[1])])


def friedman_nemenyi(results, alpha: float = 0.05) -> dict:
    """Friedman test over ``results[algorithm, measurement]`` plus Nemenyi CD.

    Higher values are better. The statistic is the plain chi-square form
    (no tie correction); the p-value uses the chi-square approximation with
    k - 1 degrees of freedom.
    """
    r = np.asarray(results, dtype=np.float64)
    if r.ndim != 2 or r.shape[0] < 2 or r.shape[1] < 2:
        raise ValueError(f"need a (k >= 2) x (N >= 2) table, got shape {r.shape}")
    if not np.all(np.isfinite(r)):
        raise ValueError("results must be finite")
    k, n = r.shape
    ranks = rank_rows(r)
    mean_ranks = ranks.mean(axis=1)
    stat = 12.0 * n / (k * (k + 1)) * float((mean_ranks**2).sum()) - 3.0 * n * (k + 1)
    if abs(stat) < 1e-9:  # all rank sums equal; clear rounding residue
        stat = 0.0
    p = float(stats.chi2.sf(stat, k - 1))
    cd = nemenyi_q(k, alpha) * np.sqrt(k * (k + 1) / (6.0 * n))
    diff = np.abs(mean_ranks[:, None] - mean_ranks[None, :])
    return {
        "statistic": float(stat),
        "friedman_p": p,
        "mean_ranks": mean_ranks,
        "critical_distance": float(cd),
        "pairwise_significant": diff > cd,
        "alpha": alpha,
    }
