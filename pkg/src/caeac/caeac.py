"""Class-incremental classifier built from one CAEA model per class."""

from __future__ import annotations

import json
from typing import Hashable, Iterable, Sequence

import numpy as np

from .caea import CAEA
from .cim import CimVariant

PREDICT_METRICS = ("cim", "euclidean")


class NotFittedError(RuntimeError):
    pass


class CAEAC:
    """Nearest-prototype classifier with an independent CAEA per class.

    Training data of one class only ever touches that class's model, so new
    classes (or more data for old ones) can be learned at any time without
    disturbing what was learned before.

    Parameters
    ----------
    lam, a_max, variant
        Passed to every per-class :class:`~caeac.caea.CAEA`.
    predict_metric : {"cim", "euclidean"}
        How a query is compared with the pooled prototypes. ``"cim"`` scores
        each node with the variant's CIM and its own class model's mean
        bandwidth.
    """

    def __init__(self, lam: int = 50, a_max: int = 10, variant="base", predict_metric: str = "cim"):
        CAEA(lam, a_max, variant)  # validates the configuration
        if predict_metric not in PREDICT_METRICS:
            raise ValueError(f"predict_metric must be one of {PREDICT_METRICS}, got {predict_metric!r}")
        self.lam = int(lam)
        self.a_max = int(a_max)
        self.variant = CimVariant.parse(variant)
        self.predict_metric = predict_metric
        self.models: dict[Hashable, CAEA] = {}
        self.class_order: list = []
        self.dim: int | None = None

    def _check(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.ndim != 2:
            raise ValueError("expected a 2-D feature array")
        if self.dim is not None and X.shape[0] and X.shape[1] != self.dim:
            raise ValueError(f"data has {X.shape[1]} attributes, model expects {self.dim}")
        return X

    def fit(self, X, y: Sequence) -> "CAEAC":
        """Learn a batch; may be called repeatedly (continual learning)."""
        X = self._check(X)
        y = list(y)
        if len(y) != X.shape[0]:
            raise ValueError(f"{X.shape[0]} rows but {len(y)} labels")
        if not y:
            return self
        if self.dim is None:
            self.dim = X.shape[1]
        rows: dict = {}
        for i, label in enumerate(y):
            rows.setdefault(label, []).append(i)
        for label, idx in rows.items():
            if label not in self.models:
                self.models[label] = CAEA(self.lam, self.a_max, self.variant)
                self.class_order.append(label)
            self.models[label].train(X[idx])
        return self

    partial_fit = fit

    def _scores(self, X) -> tuple[np.ndarray, np.ndarray]:
        """Best score and owning class position for every query row."""
        n = X.shape[0]
        best = np.full(n, np.inf)
        owner = np.full(n, -1, dtype=np.int64)
        for pos, label in enumerate(self.class_order):
            model = self.models[label]
            if model.n_nodes == 0:
                continue
            if self.predict_metric == "euclidean":
                diff = X[:, None, :] - model.weights[None, :, :]
                s = np.sqrt((diff * diff).sum(axis=2))
            else:
                s = model.similarity(X)
            m = s.min(axis=1)
            better = m < best  # strict: earlier classes win ties
            best[better] = m[better]
            owner[better] = pos
        return best, owner

    def predict(self, X) -> list:
        X = self._check(X)
        if not any(m.n_nodes for m in self.models.values()):
            raise NotFittedError("no class model has any nodes yet")
        if X.shape[0] == 0:
            return []
        _, owner = self._scores(X)
        return [self.class_order[k] for k in owner]

    def predict_one(self, x):
        return self.predict(np.asarray(x, dtype=np.float64)[None, :])[0]

    # ------------------------------------------------------------ reporting

    @property
    def n_nodes(self) -> int:
        return sum(m.n_nodes for m in self.models.values())

    @property
    def n_clusters(self) -> int:
        return sum(len(m.connected_components()) for m in self.models.values())

    # --------------------------------------------------------- serialization

    def to_dict(self) -> dict:
        return {
            "config": {
                "lambda": self.lam,
                "a_max": self.a_max,
                "variant": self.variant.value,
                "predict_metric": self.predict_metric,
            },
            "classes": {str(label): self.models[label].to_dict() for label in self.class_order},
            "class_order": [str(label) for label in self.class_order],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, **kw)

    @classmethod
    def from_dict(cls, doc: dict) -> "CAEAC":
        cfg = doc["config"]
        clf = cls(cfg["lambda"], cfg["a_max"], cfg["variant"], cfg.get("predict_metric", "cim"))
        for label in doc["class_order"]:
            clf.models[label] = CAEA.from_dict(doc["classes"][label])
            clf.class_order.append(label)
            if clf.dim is None:
                clf.dim = clf.models[label].dim
        return clf

    @classmethod
    def from_json(cls, text: str) -> "CAEAC":
        return cls.from_dict(json.loads(text))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json(indent=1))

    @classmethod
    def load(cls, path) -> "CAEAC":
        with open(path) as fh:
            return cls.from_json(fh.read())


def predict_batch(model: CAEAC, xs: Iterable) -> list:
    xs = list(xs)
    if not xs:
        return []
    return model.predict(np.asarray(xs, dtype=np.float64))
