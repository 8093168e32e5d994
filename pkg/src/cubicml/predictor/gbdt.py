"""Least-squares gradient boosting over mixed numeric/categorical features."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import kernels
from .mlp import LayoutMismatch


@dataclass
class GbdtConfig:
    n_trees: int = 300
    shrinkage: float = 0.1
    max_depth: int = 3
    min_leaf: int = 2
    subsample: float = 1.0
    # fit log(y) and exponentiate predictions; for positive metrics spanning decades
    log_target: bool = False


@dataclass
class Tree:
    """Flat binary tree. Internal nodes send rows left when
    ``x <= threshold`` (numeric) or ``x == threshold`` (categorical)."""

    feature: np.ndarray
    threshold: np.ndarray
    is_cat: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def depth(self) -> int:
        def walk(node):
            if self.feature[node] < 0:
                return 0
            return 1 + max(walk(self.left[node]), walk(self.right[node]))

        return walk(0)

    def predict(self, x: np.ndarray) -> np.ndarray:
        node = np.zeros(len(x), dtype=np.int64)
        rows = np.arange(len(x))
        while True:
            feat = self.feature[node]
            internal = feat >= 0
            if not internal.any():
                return self.value[node]
            xv = x[rows, np.where(internal, feat, 0)]
            thr = self.threshold[node]
            go_left = np.where(self.is_cat[node], xv == thr, xv <= thr)
            node = np.where(internal, np.where(go_left, self.left[node], self.right[node]), node)


class _Builder:
    def __init__(self, x, categorical, n_categories, order, cfg: GbdtConfig):
        self.x = x
        self.categorical = categorical
        self.n_categories = n_categories
        self.order = order  # per numeric feature, row indices sorted by value
        self.cfg = cfg

    def build(self, rows: np.ndarray, r: np.ndarray) -> Tree:
        feature, threshold, is_cat, left, right, value = [], [], [], [], [], []

        def new_node():
            for lst, v in ((feature, -1), (threshold, 0.0), (is_cat, False), (left, -1), (right, -1), (value, 0.0)):
                lst.append(v)
            return len(feature) - 1

        in_node = np.zeros(len(self.x), dtype=bool)

        def grow(node, rows, depth):
            value[node] = float(r[rows].mean())
            if depth >= self.cfg.max_depth or len(rows) < 2 * self.cfg.min_leaf:
                return
            best = self._best_split(rows, r, in_node)
            if best is None:
                return
            f, thr, cat = best
            xv = self.x[rows, f]
            mask = xv == thr if cat else xv <= thr
            feature[node], threshold[node], is_cat[node] = f, thr, cat
            left[node] = new_node()
            right[node] = new_node()
            grow(left[node], rows[mask], depth + 1)
            grow(right[node], rows[~mask], depth + 1)

        grow(new_node(), rows, 0)
        return Tree(
            np.array(feature, dtype=np.int64),
            np.array(threshold, dtype=float),
            np.array(is_cat, dtype=bool),
            np.array(left, dtype=np.int64),
            np.array(right, dtype=np.int64),
            np.array(value, dtype=float),
        )

    def _best_split(self, rows, r, in_node):
        in_node[:] = False
        in_node[rows] = True
        rn = np.ascontiguousarray(r[rows])
        # relative floor keeps float noise from producing spurious splits
        floor = 1e-12 * max(float(rn @ rn), 1e-300)
        best_gain, best = floor, None
        min_leaf = self.cfg.min_leaf
        for f in range(self.x.shape[1]):
            if self.categorical[f]:
                codes = np.ascontiguousarray(self.x[rows, f].astype(np.int64))
                gain, cat = kernels.best_categorical_split(codes, rn, self.n_categories[f], min_leaf)
                if gain > best_gain:
                    best_gain, best = gain, (f, float(cat), True)
            else:
                srt = self.order[f][in_node[self.order[f]]]
                xs = np.ascontiguousarray(self.x[srt, f])
                gain, thr = kernels.best_numeric_split(xs, np.ascontiguousarray(r[srt]), min_leaf)
                if gain > best_gain:
                    best_gain, best = gain, (f, thr, False)
        return best


@dataclass
class GbdtPredictor:
    initial: float
    shrinkage: float
    trees: list[Tree]
    categorical: tuple[bool, ...]
    config: GbdtConfig = field(default_factory=GbdtConfig)
    kind: str = "gbdt"

    @property
    def input_dim(self) -> int:
        return len(self.categorical)

    def predict(self, x: np.ndarray, n_trees: int | None = None) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.input_dim:
            raise LayoutMismatch(f"feature width {x.shape[1]} != trained width {self.input_dim}")
        out = np.full(len(x), self.initial)
        for t in self.trees[:n_trees]:
            out += self.shrinkage * t.predict(x)
        return np.exp(out) if self.config.log_target else out


def fit_gbdt(x: np.ndarray, y: np.ndarray, categorical, config: GbdtConfig | None = None, seed: int = 0) -> GbdtPredictor:
    """Stagewise least-squares boosting; each tree is fit to the current residuals.

    ``seed`` only matters when ``config.subsample < 1``.
    """
    cfg = config or GbdtConfig()
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.asarray(y, dtype=float)
    categorical = tuple(bool(c) for c in categorical)
    if x.shape[1] != len(categorical):
        raise LayoutMismatch("categorical mask does not match feature width")
    if len(y) == 0:
        raise ValueError("no training examples")
    if cfg.log_target:
        if np.any(y <= 0):
            raise ValueError("log target needs strictly positive metrics")
        y = np.log(y)
    n_categories = [int(x[:, f].max()) + 1 if c else 0 for f, c in enumerate(categorical)]
    order = [None if c else np.argsort(x[:, f], kind="mergesort") for f, c in enumerate(categorical)]
    builder = _Builder(x, categorical, n_categories, order, cfg)
    rng = np.random.default_rng(seed)

    initial = float(y.mean())
    pred = np.full(len(y), initial)
    trees = []
    all_rows = np.arange(len(y))
    for _ in range(cfg.n_trees):
        r = y - pred
        if np.all(np.abs(r) <= 1e-12 * max(1.0, abs(initial))):
            break
        rows = all_rows
        if cfg.subsample < 1.0:
            k = max(2 * cfg.min_leaf, int(round(cfg.subsample * len(y))))
            rows = np.sort(rng.permutation(len(y))[:k])
        tree = builder.build(rows, r)
        if tree.feature[0] < 0 and cfg.subsample >= 1.0:
            break  # no admissible split; later trees would be identical
        trees.append(tree)
        pred += cfg.shrinkage * tree.predict(x)
    return GbdtPredictor(initial, cfg.shrinkage, trees, categorical, cfg)
