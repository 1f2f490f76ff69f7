"""Gradient-boosted regression trees for binary classification.

Newton boosting on logistic loss: per round g = p - y, h = p(1 - p) (both
scaled by the positive-class weight), exact greedy split search over sorted
values, split gain

    1/2 [G_L^2/(H_L+lam) + G_R^2/(H_R+lam) - (G_L+G_R)^2/(H_L+H_R+lam)] - gamma

and leaf weight -G/(H+lam). Missing values learn a default direction per
split (whichever side gains more). Row subsampling is per tree, column
subsampling per tree and per level (multiplicative), all driven by the seed;
fitting is fully deterministic.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .errors import DimensionMismatch, InvalidParams, NoUsableFeature, SingleClass

PAPER_GRIDS = {
    "learning_rate": (0.001, 0.01, 0.1, 0.2, 0.3),
    "gamma": (0.0, 0.05, 0.10, 0.15, 0.20, 0.25, 0.5),
    "max_depth": (6, 8, 10, 12, 15),
    "subsample": (0.5, 0.6, 0.7, 0.8, 0.9, 1.0),
    "colsample_bylevel": (0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0),
    "colsample_bytree": (0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0),
    "min_child_weight": (0.5, 1.0, 3.0, 5.0, 7.0, 10.0),
    "scale_pos_weight": (1.0, 2.0, 3.0, 4.0),
}


@dataclass(frozen=True)
class HyperParams:
    learning_rate: float = 0.1
    gamma: float = 0.0
    max_depth: int = 6
    subsample: float = 1.0
    colsample_bylevel: float = 1.0
    colsample_bytree: float = 1.0
    min_child_weight: float = 1.0
    scale_pos_weight: float = 1.0
    n_estimators: int = 100
    lambda_l2: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise InvalidParams("learning_rate must be > 0")
        if self.gamma < 0 or self.min_child_weight < 0:
            raise InvalidParams("gamma and min_child_weight must be >= 0")
        if self.max_depth < 1 or self.n_estimators < 1:
            raise InvalidParams("max_depth and n_estimators must be >= 1")
        for name in ("subsample", "colsample_bylevel", "colsample_bytree"):
            v = getattr(self, name)
            if not 0 < v <= 1:
                raise InvalidParams(f"{name} must be in (0, 1]")
        if self.scale_pos_weight <= 0:
            raise InvalidParams("scale_pos_weight must be > 0")

    def with_seed(self, seed: int) -> "HyperParams":
        return replace(self, seed=seed)


class Tree:
    """Flat-array regression tree. feature == -1 marks a leaf."""

    __slots__ = ("feature", "threshold", "missing_left", "left", "right",
                 "value")

    def __init__(self):
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.missing_left: list[bool] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[float] = []

    def add_leaf(self, value: float) -> int:
        return self._add(-1, 0.0, False, -1, -1, float(value))

    def add_split(self, feature: int, threshold: float,
                  missing_left: bool) -> int:
        return self._add(int(feature), float(threshold), bool(missing_left),
                         -1, -1, 0.0)

    def _add(self, f, thr, ml, lt, rt, val) -> int:
        self.feature.append(f)
        self.threshold.append(thr)
        self.missing_left.append(ml)
        self.left.append(lt)
        self.right.append(rt)
        self.value.append(val)
        return len(self.feature) - 1

    @property
    def depth(self) -> int:
        def d(node):
            if self.feature[node] < 0:
                return 0
            return 1 + max(d(self.left[node]), d(self.right[node]))
        return d(0) if self.feature else 0

    def predict(self, X: np.ndarray) -> np.ndarray:
        out = np.empty(len(X))
        self._route(0, np.arange(len(X)), X, out)
        return out

    def _route(self, node, rows, X, out):
        if self.feature[node] < 0:
            out[rows] = self.value[node]
            return
        col = X[rows, self.feature[node]]
        nan = np.isnan(col)
        go_left = (col < self.threshold[node]) | (nan & self.missing_left[node])
        self._route(self.left[node], rows[go_left], X, out)
        self._route(self.right[node], rows[~go_left], X, out)

    def to_dict(self) -> dict:
        return {"feature": self.feature, "threshold": self.threshold,
                "missing_left": self.missing_left, "left": self.left,
                "right": self.right, "value": self.value}

    @classmethod
    def from_dict(cls, d: dict) -> "Tree":
        tree = cls()
        tree.feature = [int(v) for v in d["feature"]]
        tree.threshold = [float(v) for v in d["threshold"]]
        tree.missing_left = [bool(v) for v in d["missing_left"]]
        tree.left = [int(v) for v in d["left"]]
        tree.right = [int(v) for v in d["right"]]
        tree.value = [float(v) for v in d["value"]]
        return tree


@dataclass
class BoostedEnsemble:
    trees: list
    params: HyperParams
    feature_names: tuple
    base_score_logit: float = 0.0
    decision_threshold: float = 0.5

    def predict_margin(self, X) -> np.ndarray:
        X = _as_matrix(X, len(self.feature_names))
        margin = np.full(len(X), self.base_score_logit)
        for tree in self.trees:
            margin += self.params.learning_rate * tree.predict(X)
        return margin

    def predict_proba(self, X) -> np.ndarray:
        return _sigmoid(self.predict_margin(X))

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba(X) >= self.decision_threshold).astype(int)

    def to_json(self) -> str:
        doc = {"format": "graphokit-gbt-1",
               "params": asdict(self.params),
               "feature_names": list(self.feature_names),
               "base_score_logit": self.base_score_logit,
               "decision_threshold": self.decision_threshold,
               "trees": [t.to_dict() for t in self.trees]}
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "BoostedEnsemble":
        doc = json.loads(text)
        return cls(trees=[Tree.from_dict(t) for t in doc["trees"]],
                   params=HyperParams(**doc["params"]),
                   feature_names=tuple(doc["feature_names"]),
                   base_score_logit=float(doc["base_score_logit"]),
                   decision_threshold=float(doc["decision_threshold"]))


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


def _as_matrix(X, n_features):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.shape[1] != n_features:
        raise DimensionMismatch(
            f"expected {n_features} features, got {X.shape[1]}")
    return X


def log_loss(y, prob) -> float:
    prob = np.clip(prob, 1e-12, 1 - 1e-12)
    y = np.asarray(y, dtype=float)
    return float(-np.mean(y * np.log(prob) + (1 - y) * np.log(1 - prob)))


def fit(X, y, params: HyperParams, feature_names=None) -> BoostedEnsemble:
    """Train an ensemble; deterministic given (X, y, params)."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise InvalidParams("X must be 2-dimensional")
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    if n < 2:
        raise InvalidParams("need at least 2 samples")
    if len(np.unique(y)) < 2:
        raise SingleClass("both classes must be present")
    if p == 0 or not np.any(np.isfinite(X)):
        raise NoUsableFeature("no finite feature values")
    if feature_names is None:
        feature_names = tuple(f"f{j}" for j in range(p))

    rng = np.random.default_rng(params.seed)
    w = np.where(y == 1, params.scale_pos_weight, 1.0)
    margin = np.zeros(n)
    trees = []
    n_sub = max(1, round(params.subsample * n))
    n_cols_tree = max(1, round(params.colsample_bytree * p))

    for _ in range(params.n_estimators):
        prob = _sigmoid(margin)
        g = w * (prob - y)
        h = w * prob * (1 - prob)
        rows = (np.sort(rng.choice(n, size=n_sub, replace=False))
                if n_sub < n else np.arange(n))
        cols = (np.sort(rng.choice(p, size=n_cols_tree, replace=False))
                if n_cols_tree < p else np.arange(p))
        tree = _grow_tree(X, g, h, rows, cols, params, rng)
        trees.append(tree)
        margin += params.learning_rate * tree.predict(X)

    return BoostedEnsemble(trees=trees, params=params,
                           feature_names=tuple(feature_names))


def _grow_tree(X, g, h, rows, tree_cols, params: HyperParams,
               rng) -> Tree:
    """Level-synchronous growth so colsample_bylevel draws once per level."""
    tree = Tree()
    lam, gamma, mcw = params.lambda_l2, params.gamma, params.min_child_weight
    n_cols_level = max(1, round(params.colsample_bylevel * len(tree_cols)))
    root = tree.add_leaf(0.0)
    frontier = [(root, rows)]
    for depth in range(params.max_depth):
        if not frontier:
            break
        cols = (np.sort(rng.choice(tree_cols, size=n_cols_level,
                                   replace=False))
                if n_cols_level < len(tree_cols) else tree_cols)
        next_frontier = []
        for node, idx in frontier:
            gn, hn = g[idx], h[idx]
            G, H = gn.sum(), hn.sum()
            if len(idx) < 2:
                tree.value[node] = -G / (H + lam)
                continue
            found = _best_split(X[np.ix_(idx, cols)], gn, hn, lam, gamma, mcw)
            if found is None:
                tree.value[node] = -G / (H + lam)
                continue
            local_col, thr, miss_left, _gain = found
            feat = int(cols[local_col])
            colv = X[idx, feat]
            nan = np.isnan(colv)
            go_left = (colv < thr) | (nan & miss_left)
            tree.feature[node] = feat
            tree.threshold[node] = thr
            tree.missing_left[node] = miss_left
            tree.value[node] = 0.0
            lt = tree.add_leaf(0.0)
            rt = tree.add_leaf(0.0)
            tree.left[node], tree.right[node] = lt, rt
            next_frontier.append((lt, idx[go_left]))
            next_frontier.append((rt, idx[~go_left]))
        frontier = next_frontier
    # any nodes left unexpanded at max depth become leaves
    for node, idx in frontier:
        gn, hn = g[idx], h[idx]
        tree.value[node] = -gn.sum() / (hn.sum() + lam)
    return tree


def _best_split(Xn, gn, hn, lam, gamma, mcw):
    """Exact greedy search over all columns of a node, vectorized.

    Returns (column, threshold, missing_left, gain) for the best positive
    gain, or None. Ties resolve to the lowest flat index (deterministic).
    """
    m, c = Xn.shape
    G, H = gn.sum(), hn.sum()
    parent = G * G / (H + lam)
    nanmask = np.isnan(Xn)
    order = np.argsort(Xn, axis=0, kind="stable")  # NaN sorts last
    xs = np.take_along_axis(Xn, order, axis=0)
    nan_s = np.take_along_axis(nanmask, order, axis=0)
    gs, hs = gn[order], hn[order]
    gz = np.where(nan_s, 0.0, gs)
    hz = np.where(nan_s, 0.0, hs)
    cg = np.cumsum(gz, axis=0)
    ch = np.cumsum(hz, axis=0)
    GL, HL = cg[:-1], ch[:-1]
    Gm = G - cg[-1]  # per-column sums over missing rows
    Hm = H - ch[-1]
    valid = (~nan_s[1:]) & (xs[1:] > xs[:-1])
    if not np.any(valid):
        return None

    best = None  # (gain, flat_index, scenario)
    candidates = []
    for miss_left in (True, False):
        GLa = GL + (Gm if miss_left else 0.0)
        HLa = HL + (Hm if miss_left else 0.0)
        GRa = G - GLa
        HRa = H - HLa
        with np.errstate(divide="ignore", invalid="ignore"):
            gain = 0.5 * (GLa ** 2 / (HLa + lam) + GRa ** 2 / (HRa + lam)
                          - parent) - gamma
        gain = np.where(valid & (HLa >= mcw) & (HRa >= mcw), gain, -np.inf)
        candidates.append(gain)

    for scenario, gain in enumerate(candidates):
        flat = int(np.argmax(gain))
        val = gain.ravel()[flat]
        if best is None or val > best[0]:
            best = (val, flat, scenario)
    gain_val, flat, scenario = best
    if not np.isfinite(gain_val) or gain_val <= 0:
        return None
    i, col = np.unravel_index(flat, GL.shape)
    thr = 0.5 * (xs[i, col] + xs[i + 1, col])
    return int(col), float(thr), scenario == 0, float(gain_val)
