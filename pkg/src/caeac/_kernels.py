"""Hot loops: CIM from a batch of points to every prototype.

All three CIM forms share one kernel. Attributes are mapped to groups by
``group_of`` and each group has one bandwidth:

* base       -> one group holding every attribute
* individual -> one group per attribute
* clustering -> the attribute grouping

The compiled and numpy versions agree to rounding (~1e-15), not bitwise,
because the numpy path sums groups through a matmul.
"""

import numpy as np

from . import _accel


def _grouped_cim_numpy(X, W, group_of, group_size, sigma):
    n, d = X.shape
    K = W.shape[0]
    J = group_size.shape[0]
    if K == 0:
        return np.empty((n, 0))
    s = sigma[group_of]
    diff = X[:, None, :] - W[None, :, :]
    kern = np.exp(-(diff * diff) / (2.0 * s * s))
    onehot = np.zeros((d, J))
    onehot[np.arange(d), group_of] = 1.0
    corr = (kern @ onehot) / group_size
    return np.sqrt(np.maximum(1.0 - corr, 0.0)).sum(axis=2) / J


def _grouped_cim_loop(X, W, group_of, group_size, sigma):
    n, d = X.shape
    K = W.shape[0]
    J = group_size.shape[0]
    out = np.empty((n, K))
    acc = np.empty(J)
    two_s2 = 2.0 * sigma * sigma
    for a in range(n):
        for k in range(K):
            for g in range(J):
                acc[g] = 0.0
            for i in range(d):
                g = group_of[i]
                diff = X[a, i] - W[k, i]
                acc[g] += np.exp(-(diff * diff) / two_s2[g])
            total = 0.0
            for g in range(J):
                v = 1.0 - acc[g] / group_size[g]
                if v < 0.0:
                    v = 0.0
                total += np.sqrt(v)
            out[a, k] = total / J
    return out


_grouped_cim_nb = _accel.njit(_grouped_cim_loop)


def grouped_cim(X, W, group_of, group_size, sigma):
    """CIM matrix of shape ``(len(X), len(W))``.

    ``group_of`` is an int array of length d, ``group_size`` the float size of
    each group and ``sigma`` the per-group bandwidth.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    W = np.ascontiguousarray(W, dtype=np.float64)
    group_of = np.ascontiguousarray(group_of, dtype=np.int64)
    group_size = np.ascontiguousarray(group_size, dtype=np.float64)
    sigma = np.ascontiguousarray(sigma, dtype=np.float64)
    if _accel.ENABLE_NUMBA:
        return _grouped_cim_nb(X, W, group_of, group_size, sigma)
    return _grouped_cim_numpy(X, W, group_of, group_size, sigma)


def _two_smallest_loop(v):
    """Indices of the smallest and second smallest entries, lowest index on ties."""
    n = v.shape[0]
    i1 = -1
    i2 = -1
    for i in range(n):
        if i1 < 0 or v[i] < v[i1]:
            i2 = i1
            i1 = i
        elif i2 < 0 or v[i] < v[i2]:
            i2 = i
    return i1, i2


_two_smallest_nb = _accel.njit(_two_smallest_loop)


def two_smallest(v):
    v = np.ascontiguousarray(v, dtype=np.float64)
    if _accel.ENABLE_NUMBA:
        return _two_smallest_nb(v)
    if v.shape[0] == 0:
        return -1, -1
    i1 = int(np.argmin(v))
    if v.shape[0] == 1:
        return i1, -1
    rest = v.copy()
    rest[i1] = np.inf
    i2 = int(np.argmin(rest))
    # every other entry is +inf as well: argmin would pick index 0 == i1
    if i2 == i1:
        i2 = 1 if i1 == 0 else 0
    return i1, i2
