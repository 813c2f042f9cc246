"""Random decision forest over fixed-length feature vectors.

Each tree is grown unpruned on a bootstrap resample. At every node a random
subset of features is examined and the axis-aligned split with the lowest
weighted Gini impurity is taken; candidate thresholds are midpoints between
consecutive distinct values. Equal-impurity candidates resolve to the
lowest feature index, then the lowest threshold. Trees are independent and
each draws from its own stream seeded by ``(random_state, tree_index)``,
so results do not depend on ``n_jobs``.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed
from numba import njit
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .exceptions import DegenerateData, DimensionMismatch


@dataclass
class Tree:
    """Flat node arrays; ``feature == -1`` marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    counts: np.ndarray  # (n_nodes, n_classes) class histogram at each node

    @property
    def n_nodes(self):
        return len(self.feature)

    def apply(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        while True:
            f = self.feature[node]
            internal = f >= 0
            if not internal.any():
                return node
            r, n, fi = rows[internal], node[internal], f[internal]
            go_left = X[r, fi] <= self.threshold[n]
            node[internal] = np.where(go_left, self.left[n], self.right[n])

    def votes(self, X: np.ndarray) -> np.ndarray:
        # argmax returns the first maximum: ties go to the smallest class index
        return np.argmax(self.counts[self.apply(X)], axis=1)

    def to_dict(self):
        nodes = []
        for i in range(self.n_nodes):
            if self.feature[i] < 0:
                nodes.append({"leaf": self.counts[i].tolist()})
            else:
                nodes.append({"feature": int(self.feature[i]), "threshold": float(self.threshold[i]),
                              "left": int(self.left[i]), "right": int(self.right[i]),
                              "counts": self.counts[i].tolist()})
        return {"nodes": nodes}

    @classmethod
    def from_dict(cls, d, n_classes):
        nodes = d["nodes"]
        n = len(nodes)
        feature = np.full(n, -1, dtype=np.int64)
        threshold = np.zeros(n)
        left = np.full(n, -1, dtype=np.int64)
        right = np.full(n, -1, dtype=np.int64)
        counts = np.zeros((n, n_classes), dtype=np.int64)
        for i, node in enumerate(nodes):
            if "leaf" in node:
                counts[i] = node["leaf"]
            else:
                feature[i], threshold[i] = node["feature"], node["threshold"]
                left[i], right[i] = node["left"], node["right"]
                counts[i] = node["counts"]
        return cls(feature, threshold, left, right, counts)


@njit(cache=True)
def _split_kernel(X, y, idx, feats, n_classes, min_leaf):
    n = idx.shape[0]
    best_imp = np.inf
    best_f = -1
    best_t = 0.0
    vals = np.empty(n)
    left = np.zeros(n_classes)
    total = np.zeros(n_classes)
    for r in range(n):
        total[y[idx[r]]] += 1.0
    for fi in range(feats.shape[0]):
        f = feats[fi]
        for r in range(n):
            vals[r] = X[idx[r], f]
        order = np.argsort(vals, kind="mergesort")
        left[:] = 0.0
        for pos in range(n - 1):
            left[y[idx[order[pos]]]] += 1.0
            nL = pos + 1.0
            nR = n - nL
            lo = vals[order[pos]]
            hi = vals[order[pos + 1]]
            if not hi > lo or nL < min_leaf or nR < min_leaf:
                continue
            sqL = 0.0
            sqR = 0.0
            for c in range(n_classes):
                sqL += left[c] * left[c]
                rc = total[c] - left[c]
                sqR += rc * rc
            # n * weighted Gini = sum over sides of (n_side - sum_c count_c^2 / n_side)
            imp = (nL - sqL / nL) + (nR - sqR / nR)
            if imp < best_imp:
                best_imp = imp
                best_f = f
                t = lo + (hi - lo) / 2.0
                if not (lo <= t and t < hi):
                    t = lo
                best_t = t
    return best_f, best_t


def _best_split(X, y, idx, feats, n_classes, min_leaf):
    """Return (feature, threshold) or None if no candidate separates the node."""
    f, t = _split_kernel(X, y, idx, feats.astype(np.int64), n_classes, min_leaf)
    if f < 0:
        return None
    return int(f), float(t)


def grow_tree(X, y, n_classes, max_features, max_depth=None, min_samples_leaf=1,
              rng=None, sample_idx=None) -> Tree:
    """Grow one unpruned tree on rows ``sample_idx`` (with repeats) of ``X``."""
    rng = np.random.default_rng(rng)
    D = X.shape[1]
    if sample_idx is None:
        sample_idx = np.arange(X.shape[0])
    feature, threshold, left, right, counts = [], [], [], [], []

    def new_node(idx):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        counts.append(np.bincount(y[idx], minlength=n_classes))
        return len(feature) - 1

    stack = [(new_node(sample_idx), sample_idx, 0)]
    while stack:
        node, idx, depth = stack.pop()
        hist = counts[node]
        if (np.count_nonzero(hist) <= 1 or len(idx) < 2 * min_samples_leaf
                or (max_depth is not None and depth >= max_depth)):
            continue
        feats = np.sort(rng.choice(D, size=max_features, replace=False))
        split = _best_split(X, y, idx, feats, n_classes, min_samples_leaf)
        if split is None and max_features < D:
            # every drawn feature is constant here: keep drawing until one splits
            rest = rng.permutation(np.setdiff1d(np.arange(D), feats))
            for start in range(0, len(rest), max_features):
                split = _best_split(X, y, idx, np.sort(rest[start:start + max_features]),
                                    n_classes, min_samples_leaf)
                if split is not None:
                    break
        if split is None:
            continue
        f, t = split
        go_left = X[idx, f] <= t
        feature[node], threshold[node] = f, t
        li, ri = idx[go_left], idx[~go_left]
        left[node] = new_node(li)
        right[node] = new_node(ri)
        # push right first so the left subtree is numbered first
        stack.append((right[node], ri, depth + 1))
        stack.append((left[node], li, depth + 1))
    return Tree(np.array(feature, dtype=np.int64), np.array(threshold, dtype=float),
                np.array(left, dtype=np.int64), np.array(right, dtype=np.int64),
                np.array(counts, dtype=np.int64).reshape(-1, n_classes))


def _fit_one(X, y, n_classes, max_features, max_depth, min_leaf, seed, index):
    rng = np.random.default_rng(np.random.SeedSequence([seed, index]))
    boot = rng.integers(0, X.shape[0], size=X.shape[0])
    return grow_tree(X, y, n_classes, max_features, max_depth, min_leaf, rng, boot), boot


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 500
    features_per_split: str | int = "sqrt"
    max_depth: int | None = None
    min_samples_leaf: int = 1
    rng_seed: int = 0


class RandomDecisionForest(ClassifierMixin, BaseEstimator):
    """Bagged Gini trees with majority voting.

    Parameters
    ----------
    n_trees : int
    features_per_split : "sqrt" or int
        Candidate features examined per node; "sqrt" means ``ceil(sqrt(D))``.
    max_depth : int or None
    min_samples_leaf : int
    random_state : int
    n_jobs : int or None
        Trees are trained in parallel; the fitted model does not depend on it.
    oob_score : bool
        Compute ``oob_score_`` from out-of-bag votes.
    """

    def __init__(self, n_trees=500, features_per_split="sqrt", max_depth=None,
                 min_samples_leaf=1, random_state=0, n_jobs=None, oob_score=False):
        self.n_trees = n_trees
        self.features_per_split = features_per_split
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.random_state = random_state
        self.n_jobs = n_jobs
        self.oob_score = oob_score

    def _max_features(self, D):
        m = self.features_per_split
        if m == "sqrt":
            return max(1, math.ceil(math.sqrt(D)))
        m = int(m)
        if not 1 <= m <= D:
            raise ValueError(f"features_per_split={m} outside [1, {D}]")
        return m

    def fit(self, X, y):
        if len(X) == 0:
            raise DegenerateData("empty training set")
        X, y = check_X_y(X, y, dtype=np.float64)
        if X.shape[0] < 2:
            raise DegenerateData("need at least two training samples")
        self.classes_, y_idx = np.unique(y, return_inverse=True)
        if len(self.classes_) < 2:
            warnings.warn("single class in training data; every prediction will be that class",
                          RuntimeWarning, stacklevel=2)
        self.n_features_in_ = X.shape[1]
        m = self._max_features(X.shape[1])
        Xf = np.asfortranarray(X)
        seed = 0 if self.random_state is None else int(self.random_state)
        fitted = Parallel(n_jobs=self.n_jobs)(
            delayed(_fit_one)(Xf, y_idx, len(self.classes_), m, self.max_depth,
                              self.min_samples_leaf, seed, i)
            for i in range(self.n_trees)
        )
        self.trees_ = [t for t, _ in fitted]
        if self.oob_score:
            votes = np.zeros((X.shape[0], len(self.classes_)))
            for tree, boot in fitted:
                oob = np.setdiff1d(np.arange(X.shape[0]), boot)
                if len(oob):
                    votes[oob, tree.votes(X[oob])] += 1
            seen = votes.sum(axis=1) > 0
            self.oob_score_ = float(np.mean(np.argmax(votes[seen], axis=1) == y_idx[seen]))
        return self

    def _check(self, X):
        check_is_fitted(self, "trees_")
        X = check_array(X, dtype=np.float64, ensure_2d=False)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.n_features_in_:
            raise DimensionMismatch(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        return X

    def vote_counts(self, X) -> np.ndarray:
        X = self._check(X)
        votes = np.zeros((X.shape[0], len(self.classes_)), dtype=np.int64)
        rows = np.arange(X.shape[0])
        for tree in self.trees_:
            np.add.at(votes, (rows, tree.votes(X)), 1)
        return votes

    def predict_proba(self, X) -> np.ndarray:
        """Fraction of trees voting for each class (columns follow ``classes_``)."""
        votes = self.vote_counts(X)
        return votes / votes.sum(axis=1, keepdims=True)

    def predict(self, X) -> np.ndarray:
        return self.classes_[np.argmax(self.vote_counts(X), axis=1)]

    def to_dict(self) -> dict:
        check_is_fitted(self, "trees_")
        return {
            "classes": self.classes_.tolist(),
            "n_features": int(self.n_features_in_),
            "params": {k: v for k, v in self.get_params().items() if k != "n_jobs"},
            "trees": [t.to_dict() for t in self.trees_],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d) -> "RandomDecisionForest":
        params = dict(d["params"])
        params.pop("oob_score", None)
        model = cls(**params)
        model.classes_ = np.asarray(d["classes"])
        model.n_features_in_ = int(d["n_features"])
        model.trees_ = [Tree.from_dict(t, len(model.classes_)) for t in d["trees"]]
        return model


def train_forest(X, y, params: ForestParams = ForestParams(), n_jobs=None) -> RandomDecisionForest:
    return RandomDecisionForest(
        n_trees=params.n_trees, features_per_split=params.features_per_split,
        max_depth=params.max_depth, min_samples_leaf=params.min_samples_leaf,
        random_state=params.rng_seed, n_jobs=n_jobs,
    ).fit(X, y)


def predict(model: RandomDecisionForest, x):
    """Label of a single feature vector."""
    return model.predict(np.asarray(x, dtype=float)[None, :])[0]


def predict_proba(model: RandomDecisionForest, x) -> np.ndarray:
    return model.predict_proba(np.asarray(x, dtype=float)[None, :])[0]
