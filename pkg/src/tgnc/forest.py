"""Gini decision trees and bagged random forests with leaf-purity
confidence.

Confidence is the mean, over trees, of the fraction of each landing
leaf's training samples belonging to that leaf's own majority class,
so it is always in [0.5, 1] for binary data and independent of the
cross-tree vote. Vote ties (in a leaf or across trees) break toward
risky: the application prefers false positives over missed risky users.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyTrainingSet
from .seeding import child_seed


@dataclass(frozen=True)
class ConfidentPrediction:
    label: int          # 0 safe, 1 risky
    confidence: float   # mean leaf purity, in [0, 1]


@dataclass(frozen=True)
class ForestConfig:
    n_estimators: int = 100
    max_depth: int | None = 5
    features_per_split: int | None = None  # None -> ceil(sqrt(d))
    bootstrap: bool = True
    seed: int = 0


class DecisionTree:
    """Flat-array binary tree. feature[i] == -1 marks a leaf; counts[i]
    holds the (safe, risky) training counts that reached node i."""

    def __init__(self):
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.counts: list[tuple[int, int]] = []
        self.n_features = 0
        self.max_depth: int | None = None

    def _add_node(self, counts: tuple[int, int]) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.counts.append(counts)
        return len(self.feature) - 1

    def apply(self, x: np.ndarray) -> int:
        node = 0
        while self.feature[node] >= 0:
            if x[self.feature[node]] <= self.threshold[node]:
                node = self.left[node]
            else:
                node = self.right[node]
        return node

    def leaf_vote(self, x: np.ndarray) -> tuple[int, float]:
        """(majority label, leaf purity) at the landing leaf."""
        if x.shape[0] != self.n_features:
            raise DimensionMismatch(
                f"expected {self.n_features} features, got {x.shape[0]}")
        safe, risky = self.counts[self.apply(x)]
        label = 1 if risky >= safe else 0
        purity = max(safe, risky) / (safe + risky)
        return label, purity

    def predict_confident(self, x: np.ndarray) -> ConfidentPrediction:
        label, purity = self.leaf_vote(np.asarray(x, dtype=np.float64))
        return ConfidentPrediction(label=label, confidence=purity)

    def to_dict(self) -> dict:
        def node(i: int) -> dict:
            if self.feature[i] < 0:
                return {"counts": list(self.counts[i])}
            return {
                "feature": self.feature[i],
                "threshold": self.threshold[i],
                "left": node(self.left[i]),
                "right": node(self.right[i]),
            }
        return {"n_features": self.n_features, "max_depth": self.max_depth, "root": node(0)}

    @classmethod
    def from_dict(cls, data: dict) -> "DecisionTree":
        tree = cls()
        tree.n_features = data["n_features"]
        tree.max_depth = data["max_depth"]

        def build(obj: dict) -> int:
            if "counts" in obj:
                return tree._add_node(tuple(obj["counts"]))
            i = tree._add_node((0, 0))
            tree.feature[i] = obj["feature"]
            tree.threshold[i] = obj["threshold"]
            tree.left[i] = build(obj["left"])
            tree.right[i] = build(obj["right"])
            return i

        build(data["root"])
        return tree


def _gini_best_split(X: np.ndarray, y: np.ndarray, feature_ids: np.ndarray):
    """Best (feature, threshold) by weighted Gini over midpoint splits.

    Features are scanned in ascending index order and thresholds
    ascending, with strictly-better updates only, so ties resolve to the
    smallest feature index then the smallest threshold.
    """
    n = y.shape[0]
    total_risky = int(y.sum())
    best = (np.inf, -1, 0.0)  # (gini, feature, threshold)
    for f in feature_ids:
        vals = X[:, f]
        order = np.argsort(vals, kind="stable")
        sv = vals[order]
        sy = y[order]
        cut = np.nonzero(sv[:-1] < sv[1:])[0]  # split after position i
        if cut.size == 0:
            continue
        n_left = cut + 1
        risky_left = np.cumsum(sy)[cut]
        n_right = n - n_left
        risky_right = total_risky - risky_left
        p1l = risky_left / n_left
        p1r = risky_right / n_right
        gini = (n_left * (2.0 * p1l * (1.0 - p1l)) + n_right * (2.0 * p1r * (1.0 - p1r))) / n
        k = int(np.argmin(gini))
        if gini[k] < best[0]:
            thr = (sv[cut[k]] + sv[cut[k] + 1]) / 2.0
            best = (float(gini[k]), int(f), float(thr))
    return best


def fit_tree(X: np.ndarray, y: np.ndarray, max_depth: int | None = 5,
             features_per_split: int | None = None, seed: int = 0) -> DecisionTree:
    """Greedy Gini tree on binary labels.

    Splits fall on midpoints between consecutive distinct sorted feature
    values; growth stops at max_depth (None = unbounded), on a pure
    node, or below 2 samples. When features_per_split < d, that many
    features are subsampled per split from a seeded stream.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.int64)
    if X.shape[0] == 0:
        raise EmptyTrainingSet("cannot fit a tree on zero samples")
    if X.shape[0] != y.shape[0]:
        raise DimensionMismatch("feature rows and labels differ in length")
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("labels must be binary 0/1")
    d = X.shape[1]
    fps = d if features_per_split is None else min(features_per_split, d)
    rng = np.random.default_rng(child_seed(seed, "split-features"))
    tree = DecisionTree()
    tree.n_features = d
    tree.max_depth = max_depth

    def grow(rows: np.ndarray, depth: int) -> int:
        ys = y[rows]
        counts = (int((ys == 0).sum()), int((ys == 1).sum()))
        if (
            rows.shape[0] < 2
            or counts[0] == 0
            or counts[1] == 0
            or (max_depth is not None and depth >= max_depth)
        ):
            return tree._add_node(counts)
        if fps < d:
            feats = np.sort(rng.choice(d, size=fps, replace=False))
        else:
            feats = np.arange(d)
        gini, feature, threshold = _gini_best_split(X[rows], ys, feats)
        if feature < 0:  # all candidate features constant on these rows
            return tree._add_node(counts)
        node = tree._add_node(counts)
        tree.feature[node] = feature
        tree.threshold[node] = threshold
        mask = X[rows, feature] <= threshold
        tree.left[node] = grow(rows[mask], depth + 1)
        tree.right[node] = grow(rows[~mask], depth + 1)
        return node

    grow(np.arange(X.shape[0]), 0)
    return tree


class RandomForest:
    def __init__(self, trees: list[DecisionTree], cfg: ForestConfig):
        self.trees = trees
        self.cfg = cfg

    @property
    def n_features(self) -> int:
        return self.trees[0].n_features

    def predict_confident(self, x: np.ndarray) -> ConfidentPrediction:
        """Majority vote over trees (tie -> risky); confidence is the
        mean landing-leaf purity across all trees."""
        x = np.asarray(x, dtype=np.float64)
        votes_risky = 0
        purity_sum = 0.0
        for tree in self.trees:
            label, purity = tree.leaf_vote(x)
            votes_risky += label
            purity_sum += purity
        n = len(self.trees)
        label = 1 if 2 * votes_risky >= n else 0
        return ConfidentPrediction(label=label, confidence=purity_sum / n)

    def save_json(self, path: str) -> None:
        payload = {
            "config": {
                "n_estimators": self.cfg.n_estimators,
                "max_depth": self.cfg.max_depth,
                "features_per_split": self.cfg.features_per_split,
                "bootstrap": self.cfg.bootstrap,
                "seed": self.cfg.seed,
            },
            "trees": [t.to_dict() for t in self.trees],
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=1, sort_keys=True)

    @classmethod
    def load_json(cls, path: str) -> "RandomForest":
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        cfg = ForestConfig(**payload["config"])
        return cls([DecisionTree.from_dict(t) for t in payload["trees"]], cfg)


def fit_forest(X: np.ndarray, y: np.ndarray, cfg: ForestConfig) -> RandomForest:
    """Bagged Gini trees: per-tree seeded bootstrap (n draws with
    replacement) and ceil(sqrt(d)) features per split by default."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.int64)
    if X.shape[0] == 0:
        raise EmptyTrainingSet("cannot fit a forest on zero samples")
    n, d = X.shape
    fps = cfg.features_per_split
    if fps is None:
        fps = int(np.ceil(np.sqrt(d)))
    trees = []
    for t in range(cfg.n_estimators):
        tree_seed = child_seed(cfg.seed, "tree", t)
        if cfg.bootstrap:
            rng = np.random.default_rng(child_seed(cfg.seed, "bootstrap", t))
            rows = rng.integers(0, n, size=n)
        else:
            rows = np.arange(n)
        trees.append(fit_tree(X[rows], y[rows], max_depth=cfg.max_depth,
                              features_per_split=fps, seed=tree_seed))
    return RandomForest(trees, cfg)
