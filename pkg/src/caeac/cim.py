"""Correntropy-induced metric (CIM) and kernel bandwidth estimation.

These are the reference, one-pair-at-a-time implementations. The batched
versions used during training live in :mod:`caeac._kernels` and are checked
against the functions here.
"""

from __future__ import annotations

import enum
from typing import Sequence

import numpy as np

SIGMA_FLOOR = 1e-6


class CimVariant(str, enum.Enum):
    BASE = "base"
    INDIVIDUAL = "individual"
    CLUSTERING = "clustering"

    @classmethod
    def parse(cls, value) -> "CimVariant":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            names = ", ".join(v.value for v in cls)
            raise ValueError(f"unknown CIM variant {value!r} (expected one of {names})") from None


class BandwidthError(ValueError):
    """Raised for a zero, negative or non-finite kernel bandwidth."""


def _check_sigma(sigma) -> np.ndarray:
    s = np.asarray(sigma, dtype=np.float64)
    if not np.all(np.isfinite(s)) or np.any(s <= 0):
        raise BandwidthError(f"kernel bandwidth must be positive, got {sigma!r}")
    return s


def _pair(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape[0]} vs {y.shape[0]}")
    if x.shape[0] == 0:
        raise ValueError("vectors must have at least one attribute")
    return x, y


def gaussian_kernel(u, v, sigma):
    """Unnormalized Gaussian kernel ``exp(-(u - v)**2 / (2 sigma**2))``.

    Works element-wise on arrays. The missing ``1/(sqrt(2 pi) sigma)``
    coefficient is what keeps CIM inside [0, 1].
    """
    s = _check_sigma(sigma)
    diff = np.asarray(u, dtype=np.float64) - np.asarray(v, dtype=np.float64)
    out = np.exp(-(diff * diff) / (2.0 * s * s))
    return float(out) if np.ndim(out) == 0 else out


def correntropy(x, y, sigma: float) -> float:
    x, y = _pair(x, y)
    s = float(_check_sigma(sigma))
    return float(np.mean(gaussian_kernel(x, y, s)))


def cim(x, y, sigma: float) -> float:
    """CIM with one bandwidth shared by every attribute."""
    c = correntropy(x, y, sigma)
    return float(np.sqrt(max(1.0 - c, 0.0)))


def cim_individual(x, y, sigmas) -> float:
    """Average of the per-attribute CIMs, each with its own bandwidth."""
    x, y = _pair(x, y)
    s = _check_sigma(sigmas).ravel()
    if s.shape != x.shape:
        raise ValueError(f"need {x.shape[0]} bandwidths, got {s.shape[0]}")
    k = gaussian_kernel(x, y, s)
    return float(np.mean(np.sqrt(np.maximum(1.0 - k, 0.0))))


def cim_clustering(x, y, grouping, sigmas) -> float:
    """Average over attribute groups of the CIM inside each group.

    ``grouping`` is an :class:`~caeac.grouping.AttributeGrouping` or anything
    with a ``groups`` attribute; a plain list of index lists is accepted too.
    """
    from .grouping import AttributeGrouping

    x, y = _pair(x, y)
    if not isinstance(grouping, AttributeGrouping):
        grouping = AttributeGrouping(getattr(grouping, "groups", grouping), x.shape[0])
    elif grouping.n_features != x.shape[0]:
        raise ValueError(f"grouping covers {grouping.n_features} attributes, vectors have {x.shape[0]}")
    s = _check_sigma(sigmas).ravel()
    if s.shape[0] != grouping.n_groups:
        raise ValueError(f"need {grouping.n_groups} group bandwidths, got {s.shape[0]}")
    terms = []
    for idx, sj in zip(grouping.groups, s):
        idx = list(idx)
        c = float(np.mean(gaussian_kernel(x[idx], y[idx], sj)))
        terms.append(np.sqrt(max(1.0 - c, 0.0)))
    return float(np.mean(terms))


# --- bandwidth estimation ---------------------------------------------------


def silverman_factor(dim: int, lam: int) -> float:
    """``(4 / (2 + dim)) ** (1 / (4 + dim)) * lam ** (-1 / (4 + dim))``.

    Gaussian kernel of order 2; multiply by an attribute's standard deviation
    to get its bandwidth.
    """
    if dim < 1:
        raise ValueError("dimension must be >= 1")
    if lam < 1:
        raise ValueError("lambda must be a positive integer")
    e = 1.0 / (4.0 + dim)
    return (4.0 / (2.0 + dim)) ** e * float(lam) ** (-e)


def _window(window) -> np.ndarray:
    w = np.asarray(window, dtype=np.float64)
    if w.ndim == 1:
        w = w[:, None]
    if w.ndim != 2 or w.shape[0] == 0 or w.shape[1] == 0:
        raise ValueError("bandwidth window must be a non-empty list of vectors")
    return w


def window_std(window) -> np.ndarray:
    """Population standard deviation of every attribute (divides by n)."""
    return _window(window).std(axis=0)


def estimate_bandwidth_per_attribute(window, lam: int) -> np.ndarray:
    """Silverman bandwidth of each attribute, floored at ``SIGMA_FLOOR``."""
    w = _window(window)
    sig = silverman_factor(w.shape[1], lam) * w.std(axis=0)
    return np.maximum(sig, SIGMA_FLOOR)


def estimate_bandwidth(window, lam: int) -> tuple[np.ndarray, float]:
    """Per-attribute bandwidths and their median (the shared bandwidth)."""
    vec = estimate_bandwidth_per_attribute(window, lam)
    return vec, max(float(np.median(vec)), SIGMA_FLOOR)


def group_silverman_scale(grouping, d: int, lam: int) -> np.ndarray:
    """Per-attribute multiplier turning full-d bandwidths into group-size ones.

    A bandwidth computed with the full dimensionality ``d`` in the Silverman
    factor is rescaled so its factor uses the size of the attribute's group.
    """
    full = silverman_factor(d, lam)
    scale = np.empty(d)
    for idx in grouping.groups:
        scale[list(idx)] = silverman_factor(len(idx), lam) / full
    return scale


def estimate_group_bandwidths(window, grouping, lam: int) -> np.ndarray:
    """Mean Silverman bandwidth of each attribute group.

    The Silverman factor of group ``j`` uses that group's size, not ``d``.
    """
    w = _window(window)
    if grouping.n_features != w.shape[1]:
        raise ValueError(f"grouping covers {grouping.n_features} attributes, window has {w.shape[1]}")
    gamma = w.std(axis=0)
    out = np.empty(grouping.n_groups)
    for j, idx in enumerate(grouping.groups):
        idx = list(idx)
        out[j] = np.mean(silverman_factor(len(idx), lam) * gamma[idx])
    return np.maximum(out, SIGMA_FLOOR)


def group_bandwidths_from_attributes(attr_sigmas, grouping, lam: int) -> np.ndarray:
    """Group bandwidths from stored per-attribute (full-d) bandwidths.

    Equal to :func:`estimate_group_bandwidths` on the window the attribute
    bandwidths came from, up to rounding and the floor.
    """
    a = np.atleast_2d(np.asarray(attr_sigmas, dtype=np.float64))
    d = a.shape[1]
    scaled = a * group_silverman_scale(grouping, d, lam)
    out = np.empty((a.shape[0], grouping.n_groups))
    for j, idx in enumerate(grouping.groups):
        out[:, j] = scaled[:, list(idx)].mean(axis=1)
    out = np.maximum(out, SIGMA_FLOOR)
    return out if np.ndim(attr_sigmas) > 1 else out[0]


def pairwise_cim(points: Sequence, sigma: float) -> np.ndarray:
    """Dense base-CIM matrix between all rows of ``points``."""
    from ._kernels import grouped_cim

    p = _window(points)
    d = p.shape[1]
    s = float(_check_sigma(sigma))
    return grouped_cim(p, p, np.zeros(d, dtype=np.int64), np.array([float(d)]), np.array([s]))
