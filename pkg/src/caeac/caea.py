"""CIM-based ART with Edge and Age (CAEA).

A growing topological clusterer. The first ``lam/2`` inputs become prototype
nodes and fix the vigilance threshold; later inputs either create a node,
update their best-matching node, or update it and connect it to the
second-best one. Edges age and expire, and nodes left without edges are
dropped every ``lam`` inputs.
"""

from __future__ import annotations

import enum
import json
from collections import deque
from typing import Iterable, NamedTuple

import numpy as np

from . import _kernels
from .cim import (
    SIGMA_FLOOR,
    CimVariant,
    estimate_bandwidth,
    estimate_bandwidth_per_attribute,
    group_bandwidths_from_attributes,
)
from .grouping import AttributeGrouping, group_attributes

NEIGHBOR_RATE = 10.0


class Case(enum.IntEnum):
    """Outcome of the vigilance test."""

    CREATE = 1  # Case I: new node
    UPDATE = 2  # Case II: move the winner
    CONNECT = 3  # Case III: move winner and neighbors, link the two winners


class Winners(NamedTuple):
    k1: int
    k2: int | None
    v1: float
    v2: float | None


def vigilance_case(v1: float, v2: float | None, threshold: float) -> Case:
    if v1 > threshold:
        return Case.CREATE
    if v2 is None or v2 > threshold:
        return Case.UPDATE
    return Case.CONNECT


def _pack_sigma(variant, sigma, d, grouping):
    """(group_of, group_size, sigma) arrays for the batched kernel."""
    if variant is CimVariant.BASE:
        return np.zeros(d, dtype=np.int64), np.array([float(d)]), np.atleast_1d(np.asarray(sigma, float))
    if variant is CimVariant.INDIVIDUAL:
        return np.arange(d, dtype=np.int64), np.ones(d), np.asarray(sigma, float)
    return grouping.group_index(), np.asarray(grouping.group_sizes, float), np.asarray(sigma, float)


def variant_cim_matrix(X, W, sigma, variant, grouping=None) -> np.ndarray:
    """CIM of the active variant between every row of X and every row of W."""
    variant = CimVariant.parse(variant)
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    W = np.atleast_2d(np.asarray(W, dtype=np.float64))
    g_of, g_size, s = _pack_sigma(variant, sigma, X.shape[1], grouping)
    return _kernels.grouped_cim(X, W, g_of, g_size, s)


def compute_vigilance_threshold(nodes, sigma, variant=CimVariant.BASE, grouping=None) -> float:
    """Mean over nodes of the CIM to their most similar other node."""
    nodes = np.atleast_2d(np.asarray(nodes, dtype=np.float64))
    if nodes.shape[0] < 2:
        raise ValueError("the vigilance threshold needs at least two nodes")
    dist = variant_cim_matrix(nodes, nodes, sigma, variant, grouping)
    np.fill_diagonal(dist, np.inf)
    return float(dist.min(axis=1).mean())


class CAEA:
    """Growing CIM-based ART clusterer with edges and ages.

    Parameters
    ----------
    lam : int
        Even interval (>= 4). Half of it is the initial node count and the
        bandwidth window; every ``lam`` inputs isolated nodes are dropped.
    a_max : int
        Edges older than this are deleted.
    variant : {"base", "individual", "clustering"}
        Which CIM form is used for similarity.
    allow_empty : bool
        If False (default) the scheduled pruning is skipped when no node has
        an edge, so a model never forgets everything it has learned. Set True
        for the literal rule, which may leave the model empty.

    The model is mutated in place; it is not safe to train one instance from
    several threads at once.
    """

    def __init__(self, lam: int = 50, a_max: int = 10, variant="base", allow_empty: bool = False):
        if int(lam) != lam or lam < 4 or lam % 2:
            raise ValueError(f"lambda must be an even integer >= 4, got {lam!r}")
        if int(a_max) != a_max or a_max < 1:
            raise ValueError(f"a_max must be a positive integer, got {a_max!r}")
        self.lam = int(lam)
        self.a_max = int(a_max)
        self.variant = CimVariant.parse(variant)
        self.allow_empty = bool(allow_empty)
        self.dim: int | None = None
        self.v_threshold: float | None = None
        self.grouping: AttributeGrouping | None = None
        self.input_count = 0
        self._next_id = 0
        self._n = 0
        self._recent: deque = deque(maxlen=self.lam)
        self._init_buffer: list[np.ndarray] = []
        self.last_winners: Winners | None = None
        self._alloc(0, 8)

    # ------------------------------------------------------------------ storage

    def _alloc(self, d: int, cap: int) -> None:
        self._W = np.zeros((cap, d))
        self._M = np.zeros(cap, dtype=np.int64)
        self._ids = np.zeros(cap, dtype=np.int64)
        self._A = np.full((cap, cap), -1, dtype=np.int64)
        if self.variant is CimVariant.BASE:
            self._S = np.zeros(cap)
        else:
            self._S = np.zeros((cap, d))
        self._G = np.zeros((cap, 0))

    def _grow(self) -> None:
        cap = self._W.shape[0]
        if self._n < cap:
            return
        new = max(8, 2 * cap)

        def pad(a, fill=0):
            shape = (new,) + a.shape[1:]
            out = np.full(shape, fill, dtype=a.dtype)
            out[:cap] = a
            return out

        self._W, self._M, self._ids, self._S, self._G = (pad(a) for a in (self._W, self._M, self._ids, self._S, self._G))
        A = np.full((new, new), -1, dtype=np.int64)
        A[:cap, :cap] = self._A
        self._A = A

    @property
    def n_nodes(self) -> int:
        return self._n

    @property
    def weights(self) -> np.ndarray:
        return self._W[: self._n]

    @property
    def counters(self) -> np.ndarray:
        return self._M[: self._n]

    @property
    def bandwidths(self) -> np.ndarray:
        """Stored node bandwidths: scalars for base, per-attribute vectors otherwise."""
        return self._S[: self._n]

    @property
    def node_ids(self) -> np.ndarray:
        """Creation serial of every live node (stable across pruning)."""
        return self._ids[: self._n]

    @property
    def ages(self) -> np.ndarray:
        """Edge age matrix; -1 marks a missing edge."""
        return self._A[: self._n, : self._n]

    @property
    def initialized(self) -> bool:
        return self.v_threshold is not None

    def edges(self) -> list[tuple[int, int, int]]:
        iu, ju = np.nonzero(np.triu(self.ages >= 0, k=1))
        return [(int(i), int(j), int(self._A[i, j])) for i, j in zip(iu, ju)]

    def neighbors(self, k: int) -> np.ndarray:
        return np.flatnonzero(self._A[k, : self._n] >= 0)

    # ------------------------------------------------------------- bandwidths

    def _node_sigma(self) -> np.ndarray:
        """Bandwidth in the kernel's per-group layout, one row per node."""
        if self.variant is CimVariant.CLUSTERING:
            return self._G[: self._n]
        return self.bandwidths

    def mean_bandwidth(self):
        """Element-wise mean of the node bandwidths (a float for base)."""
        if self._n == 0:
            raise ValueError("model has no nodes")
        m = self._node_sigma().mean(axis=0)
        return float(m) if self.variant is CimVariant.BASE else m

    def _estimate_sigma(self, window):
        if self.variant is CimVariant.BASE:
            return estimate_bandwidth(window, self.lam)[1]
        return estimate_bandwidth_per_attribute(window, self.lam)

    def _group_sigma(self, attr_sigmas) -> np.ndarray:
        return group_bandwidths_from_attributes(attr_sigmas, self.grouping, self.lam)

    def refresh_grouping(self, window=None) -> None:
        """Recompute the attribute grouping and every node's group bandwidths."""
        if self.variant is not CimVariant.CLUSTERING:
            return
        if window is None:
            window = np.asarray(self._recent)
        self.grouping = group_attributes(window, self.lam)
        if self._n:
            self._G = np.zeros((self._W.shape[0], self.grouping.n_groups))
            self._G[: self._n] = self._group_sigma(self.bandwidths)
        else:
            self._G = np.zeros((self._W.shape[0], self.grouping.n_groups))

    # ------------------------------------------------------------ similarity

    def similarity(self, X) -> np.ndarray:
        """CIM between each row of X and each node, using the mean bandwidth."""
        return variant_cim_matrix(X, self.weights, self.mean_bandwidth(), self.variant, self.grouping)

    def select_winners(self, x) -> Winners:
        if self._n == 0:
            raise ValueError("cannot select winners in an empty model")
        v = self.similarity(x)[0]
        k1, k2 = _kernels.two_smallest(v)
        if k2 < 0:
            return Winners(int(k1), None, float(v[k1]), None)
        return Winners(int(k1), int(k2), float(v[k1]), float(v[k2]))

    # -------------------------------------------------------------- mutation

    def _check_input(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64).ravel()
        if self.dim is None:
            if x.shape[0] == 0:
                raise ValueError("inputs need at least one attribute")
            self.dim = x.shape[0]
            self._alloc(self.dim, 8)
            if self.variant is CimVariant.CLUSTERING:
                self.grouping = AttributeGrouping.single(self.dim)
                self._G = np.zeros((8, 1))
        elif x.shape[0] != self.dim:
            raise ValueError(f"input has {x.shape[0]} attributes, model expects {self.dim}")
        if not np.all(np.isfinite(x)):
            raise ValueError("inputs must be finite")
        return x

    def _add_node(self, x, sigma) -> int:
        self._grow()
        k = self._n
        self._W[k] = x
        self._M[k] = 1
        self._ids[k] = self._next_id
        self._next_id += 1
        self._S[k] = sigma
        self._A[k, :] = -1
        self._A[:, k] = -1
        if self.variant is CimVariant.CLUSTERING:
            self._G[k] = self._group_sigma(np.asarray(sigma)[None, :])[0]
        self._n += 1
        return k

    def _trailing_window(self, x) -> np.ndarray:
        half = self.lam // 2
        if self._recent:
            return np.asarray(list(self._recent)[-half:])
        return x[None, :]

    def init_step(self, x) -> None:
        """Insert ``x`` directly as a node (fewer than ``lam/2`` nodes exist)."""
        if self.initialized:
            # refilling after pruning: the threshold is kept, the node gets
            # its own bandwidth from the trailing window like a Case I node
            self._add_node(x, self._estimate_sigma(self._trailing_window(x)))
            return

        self._init_buffer.append(x)
        buf = np.asarray(self._init_buffer)
        if self.variant is CimVariant.CLUSTERING:
            self.grouping = group_attributes(buf, self.lam)
            self._G = np.zeros((self._W.shape[0], self.grouping.n_groups))
        sigma = self._estimate_sigma(buf)
        self._add_node(x, sigma)
        # provisional until the buffer is full: every init node shares it
        self._S[: self._n] = sigma
        if self.variant is CimVariant.CLUSTERING:
            self._G[: self._n] = self._group_sigma(self.bandwidths)

        if self._n == self.lam // 2:
            shared = self.mean_bandwidth()
            self.v_threshold = compute_vigilance_threshold(self.weights, shared, self.variant, self.grouping)
            self._init_buffer = []

    def _age_edges(self, k1: int) -> None:
        n = self._n
        row = self._A[k1, :n]
        live = row >= 0
        row[live] += 1
        self._A[:n, k1] = row
        dead = row > self.a_max
        if dead.any():
            row[dead] = -1
            self._A[:n, k1] = row

    def learn_step(self, x) -> Case:
        """One vigilance-test step on an initialized model."""
        w = self.select_winners(x)
        self.last_winners = w
        self._age_edges(w.k1)
        case = vigilance_case(w.v1, w.v2, self.v_threshold)
        if case is Case.CREATE:
            self._add_node(x, self._estimate_sigma(self._trailing_window(x)))
            return case

        k1 = w.k1
        self._M[k1] += 1
        self._W[k1] += (x - self._W[k1]) / self._M[k1]
        if case is Case.CONNECT:
            k2 = w.k2
            for j in self.neighbors(k2):
                self._W[j] += (x - self._W[j]) / (NEIGHBOR_RATE * self._M[j])
            self._A[k1, k2] = 0
            self._A[k2, k1] = 0
        return case

    def prune_isolated(self) -> int:
        """Drop every node without edges. Returns how many were removed."""
        n = self._n
        if n == 0:
            return 0
        keep = (self._A[:n, :n] >= 0).any(axis=1)
        removed = int(n - keep.sum())
        if removed == 0:
            return 0
        idx = np.flatnonzero(keep)
        m = idx.shape[0]
        self._W[:m] = self._W[idx]
        self._M[:m] = self._M[idx]
        self._ids[:m] = self._ids[idx]
        self._S[:m] = self._S[idx]
        self._G[:m] = self._G[idx]
        sub = self._A[np.ix_(idx, idx)]
        self._A[:, :] = -1
        self._A[:m, :m] = sub
        self._n = m
        return removed

    def step(self, x) -> Case | None:
        """Present one input. Returns the vigilance case, or None for a direct insert."""
        x = self._check_input(x)
        self.input_count += 1
        if self._n < self.lam // 2:
            self.init_step(x)
            case = None
        else:
            case = self.learn_step(x)
        self._recent.append(x)
        if self.input_count % self.lam == 0:
            if self.allow_empty or np.any(self.ages >= 0):
                self.prune_isolated()
            if self.initialized:
                self.refresh_grouping()
        return case

    def train(self, X: Iterable) -> "CAEA":
        X = np.asarray(X, dtype=np.float64)
        if X.size == 0:
            return self
        if X.ndim != 2:
            raise ValueError("training data must be a 2-D array")
        for x in X:
            self.step(x)
        return self

    # ------------------------------------------------------------- inspection

    def connected_components(self) -> list[list[int]]:
        """Edge-connected node sets; an isolated node is its own component."""
        n = self._n
        seen = np.zeros(n, dtype=bool)
        adj = self.ages >= 0
        comps = []
        for start in range(n):
            if seen[start]:
                continue
            stack = [start]
            seen[start] = True
            comp = []
            while stack:
                k = stack.pop()
                comp.append(k)
                for j in np.flatnonzero(adj[k]):
                    if not seen[j]:
                        seen[j] = True
                        stack.append(int(j))
            comps.append(sorted(comp))
        return comps

    def audit(self) -> None:
        """Raise AssertionError if a structural invariant is broken."""
        n = self._n
        A = self.ages
        assert np.array_equal(A, A.T), "edge ages are not symmetric"
        assert np.all(np.diag(A) == -1), "self edge present"
        assert np.all(A <= self.a_max), "edge older than a_max"
        assert np.all(self._A[n:, :] == -1) and np.all(self._A[:, n:] == -1), "edge to a dead node"
        assert np.all(self.counters >= 1), "node counter below 1"
        assert n <= self.input_count, "more nodes than inputs"
        if self._n and self.variant is not CimVariant.BASE:
            assert self.bandwidths.shape == (n, self.dim)
        assert np.all(self.bandwidths >= SIGMA_FLOOR), "bandwidth below floor"
        if not self.initialized:
            assert not np.any(A >= 0), "edges exist before initialization"
        else:
            assert 0.0 <= self.v_threshold <= 1.0
        if self.variant is CimVariant.CLUSTERING and self.grouping is not None:
            assert self.grouping.n_features == self.dim
            assert self._G.shape[1] == self.grouping.n_groups

    # ---------------------------------------------------------- serialization

    def to_dict(self) -> dict:
        nodes = []
        for k in range(self._n):
            bw = self._S[k]
            nodes.append(
                {
                    "id": int(self._ids[k]),
                    "weight": [float(v) for v in self._W[k]],
                    "bandwidth": float(bw) if np.ndim(bw) == 0 else [float(v) for v in bw],
                    "counter": int(self._M[k]),
                }
            )
        out = {
            "lambda": self.lam,
            "a_max": self.a_max,
            "variant": self.variant.value,
            "allow_empty": self.allow_empty,
            "dim": self.dim,
            "v_threshold": self.v_threshold,
            "input_count": self.input_count,
            "next_id": self._next_id,
            "nodes": nodes,
            "edges": [list(e) for e in self.edges()],
            "recent": [[float(v) for v in r] for r in self._recent],
            "init_buffer": [[float(v) for v in r] for r in self._init_buffer],
        }
        if self.variant is CimVariant.CLUSTERING:
            out["grouping"] = self.grouping.to_list() if self.grouping is not None else None
        return out

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, **kw)

    @classmethod
    def from_dict(cls, doc: dict) -> "CAEA":
        m = cls(doc["lambda"], doc["a_max"], doc["variant"], doc.get("allow_empty", False))
        m.v_threshold = doc.get("v_threshold")
        m.input_count = int(doc.get("input_count", 0))
        dim = doc.get("dim")
        nodes = doc.get("nodes", [])
        if dim is None and nodes:
            dim = len(nodes[0]["weight"])
        if dim is not None:
            m.dim = int(dim)
            m._alloc(m.dim, max(8, len(nodes)))
        if m.variant is CimVariant.CLUSTERING and m.dim is not None:
            groups = doc.get("grouping")
            m.grouping = AttributeGrouping(groups, m.dim) if groups else AttributeGrouping.single(m.dim)
            m._G = np.zeros((m._W.shape[0], m.grouping.n_groups))
        for node in nodes:
            k = m._add_node(np.asarray(node["weight"], dtype=np.float64), np.asarray(node["bandwidth"], dtype=np.float64))
            m._M[k] = int(node["counter"])
            m._ids[k] = int(node.get("id", k))
        m._next_id = int(doc.get("next_id", len(nodes)))
        for i, j, age in doc.get("edges", []):
            m._A[i, j] = m._A[j, i] = int(age)
        m._recent.extend(np.asarray(r, dtype=np.float64) for r in doc.get("recent", []))
        m._init_buffer = [np.asarray(r, dtype=np.float64) for r in doc.get("init_buffer", [])]
        return m

    @classmethod
    def from_json(cls, text: str) -> "CAEA":
        return cls.from_dict(json.loads(text))

    def __repr__(self) -> str:
        return (
            f"CAEA(lam={self.lam}, a_max={self.a_max}, variant={self.variant.value!r}, "
            f"nodes={self._n}, edges={len(self.edges())}, inputs={self.input_count})"
        )
