"""Attribute grouping for the clustering-based CIM.

Attributes whose values live on similar ranges are put in the same group so
they can share a kernel bandwidth.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cim import estimate_bandwidth, pairwise_cim


@dataclass(frozen=True)
class AttributeGrouping:
    """A partition of the attribute indices ``0..d-1``.

    Groups are stored sorted, and ordered by their smallest index, so two
    equal partitions always compare and serialize the same way.
    """

    groups: tuple
    n_features: int = field(default=-1)

    def __init__(self, groups, n_features: int | None = None):
        canon = tuple(sorted((tuple(sorted(int(i) for i in g)) for g in groups), key=lambda g: g[:1]))
        d = sum(len(g) for g in canon) if n_features is None or n_features < 0 else int(n_features)
        flat = [i for g in canon for i in g]
        if any(len(g) == 0 for g in canon):
            raise ValueError("attribute groups must be non-empty")
        if sorted(flat) != list(range(d)):
            raise ValueError(f"groups {list(map(list, canon))} are not a partition of 0..{d - 1}")
        object.__setattr__(self, "groups", canon)
        object.__setattr__(self, "n_features", d)

    @classmethod
    def single(cls, d: int) -> "AttributeGrouping":
        return cls([range(d)], d)

    @classmethod
    def singletons(cls, d: int) -> "AttributeGrouping":
        return cls([[i] for i in range(d)], d)

    @property
    def n_groups(self) -> int:
        return len(self.groups)

    @property
    def group_sizes(self) -> list[int]:
        return [len(g) for g in self.groups]

    def group_index(self) -> np.ndarray:
        """Group number of every attribute (length ``n_features``)."""
        out = np.empty(self.n_features, dtype=np.int64)
        for j, g in enumerate(self.groups):
            out[list(g)] = j
        return out

    def to_list(self) -> list[list[int]]:
        return [list(g) for g in self.groups]


def attribute_summaries(window) -> np.ndarray:
    """One 2-D point per attribute: (mean, std) of its values over the window."""
    w = np.asarray(window, dtype=np.float64)
    if w.ndim != 2 or w.shape[0] == 0:
        raise ValueError("grouping window must be a non-empty list of vectors")
    return np.column_stack([w.mean(axis=0), w.std(axis=0)])


def _components(n: int, edges) -> list[list[int]]:
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    comps: dict[int, list[int]] = {}
    for i in range(n):
        comps.setdefault(find(i), []).append(i)
    return list(comps.values())


def group_attributes(window, lam: int) -> AttributeGrouping:
    """Group attributes with similar value ranges.

    Every attribute is summarized by its (mean, std) over the window. A shared
    Silverman bandwidth is estimated from those summary points and the CIM
    between every pair of attributes is computed. Each attribute is then
    linked to its most similar attribute when that CIM does not exceed the
    average pairwise CIM; the connected components are the groups.
    """
    w = np.asarray(window, dtype=np.float64)
    if w.ndim != 2 or w.shape[0] == 0:
        raise ValueError("grouping window must be a non-empty list of vectors")
    d = w.shape[1]
    if d < 2:
        return AttributeGrouping.single(d)

    pts = attribute_summaries(w)
    _, sigma = estimate_bandwidth(pts, lam)
    dist = pairwise_cim(pts, sigma)
    off = ~np.eye(d, dtype=bool)
    gate = dist[off].mean()
    np.fill_diagonal(dist, np.inf)
    edges = []
    for i in range(d):
        j = int(np.argmin(dist[i]))
        if dist[i, j] <= gate:
            edges.append((i, j))
    return AttributeGrouping(_components(d, edges), d)
