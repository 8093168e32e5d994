"""Ensemble of single-hidden-layer ranking MLPs trained with AMSGrad."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .. import kernels
from .optim import AmsgradState, amsgrad_step
from .._kernels_py import dropout_keep
from .ranking import ranking_loss_batch

log = logging.getLogger(__name__)


class DegenerateTargets(ValueError):
    pass


class LayoutMismatch(ValueError):
    pass


@dataclass
class MlpConfig:
    members: int = 10
    hidden: int = 1600
    dropout: float = 0.5
    epochs: int = 200
    batch_pairs: int = 64
    lr: float = 0.001
    weight_decay: float = 0.005
    margin: float = 0.001
    activation: str = "relu"

    def __post_init__(self) -> None:
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")
        if min(self.members, self.hidden, self.epochs, self.batch_pairs) < 1:
            raise ValueError("members, hidden, epochs and batch_pairs must be >= 1")
        if self.margin < 0:
            raise ValueError("margin must be >= 0")
        if self.activation not in ("relu", "tanh"):
            raise ValueError(f"unknown activation {self.activation!r}")


def _act(z: np.ndarray, kind: str) -> tuple[np.ndarray, np.ndarray]:
    """Activation and its derivative."""
    if kind == "relu":
        return np.maximum(z, 0.0), (z > 0).astype(float)
    if kind == "tanh":
        a = np.tanh(z)
        return a, 1.0 - a * a
    raise ValueError(f"unknown activation {kind!r}")


@dataclass
class MlpModel:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    dropout: float = 0.5
    activation: str = "relu"

    @classmethod
    def init(cls, input_dim: int, hidden: int, rng: np.random.Generator, dropout=0.5, activation="relu"):
        k1 = 1.0 / math.sqrt(input_dim) if input_dim else 1.0
        k2 = 1.0 / math.sqrt(hidden)
        return cls(
            w1=rng.uniform(-k1, k1, size=(input_dim, hidden)),
            b1=rng.uniform(-k1, k1, size=hidden),
            w2=rng.uniform(-k2, k2, size=hidden),
            b2=rng.uniform(-k2, k2, size=1),
            dropout=dropout,
            activation=activation,
        )

    @property
    def params(self) -> list[np.ndarray]:
        return [self.w1, self.b1, self.w2, self.b2]

    @property
    def input_dim(self) -> int:
        return self.w1.shape[0]

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Inference scores (no dropout)."""
        h, _ = _act(x @ self.w1 + self.b1, self.activation)
        return h @ self.w2 + self.b2[0]

    score = forward

    def pair_loss_and_grads(self, xa, xb, labels, margin, mask_key: int | None = None):
        """Mean hinge loss over pairs (xa[k], xb[k]) and gradients for ``params``.

        With ``mask_key`` set, hidden units are dropped by a counter-based hash
        of (key, row, unit) and kept units are scaled by 1 / (1 - dropout).
        """
        x = np.concatenate([np.atleast_2d(xa), np.atleast_2d(xb)]).astype(float, copy=False)
        labels = np.ascontiguousarray(labels, dtype=float)
        dropout = self.dropout if mask_key is not None else 0.0
        if self.activation != "relu":
            return self._pair_loss_and_grads_dense(x, len(x) // 2, labels, margin, dropout, mask_key or 0)
        ws = PairWorkspace(x, self.w1.shape[1], len(labels))
        return ws.loss_and_grads(self, np.arange(len(x), dtype=np.int64), labels, margin, dropout, mask_key or 0)

    def _pair_loss_and_grads_dense(self, x, n, labels, margin, dropout, mask_key):
        z = x @ self.w1 + self.b1
        h, dh = _act(z, self.activation)
        if dropout > 0.0:
            keep = dropout_keep(mask_key, len(x), self.w1.shape[1], dropout)
            scale = keep / (1.0 - dropout)
            h, dh = h * scale, dh * scale
        s = h @ self.w2 + self.b2[0]
        loss, ga, gb = ranking_loss_batch(s[:n], s[n:], labels, margin)
        g_s = np.concatenate([ga, gb])
        g_h = np.outer(g_s, self.w2) * dh
        return loss, [x.T @ g_h, g_h.sum(axis=0), h.T @ g_s, np.array([g_s.sum()])]


class PairWorkspace:
    """Sparse copy of a feature matrix plus reusable buffers for pair batches."""

    def __init__(self, x: np.ndarray, hidden: int, max_pairs: int):
        x = np.asarray(x, dtype=float)
        rows, cols = np.nonzero(x)
        self.indptr = np.zeros(len(x) + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=len(x)), out=self.indptr[1:])
        self.cols = cols.astype(np.int64)
        self.vals = np.ascontiguousarray(x[rows, cols])
        self.h = np.empty((2 * max_pairs, hidden))
        self.d = np.empty((2 * max_pairs, hidden))
        self.grads = [np.empty((x.shape[1], hidden)), np.empty(hidden), np.empty(hidden), np.empty(1)]

    def loss_and_grads(self, model: "MlpModel", ridx, labels, margin, dropout, mask_key):
        """Pairs are (ridx[k], ridx[n + k]); returned gradients alias the workspace."""
        loss = kernels.mlp_pair_grads(
            self.indptr, self.cols, self.vals, ridx, labels, margin,
            model.w1, model.b1, model.w2, float(model.b2[0]), dropout, int(mask_key),
            self.h, self.d, *self.grads,
        )
        return loss, self.grads


def gradient_check(model: MlpModel, xa, xb, label: int, margin: float = 0.001, h: float = 1e-5, seed: int = 0) -> float:
    """Max relative error between analytic and central-difference gradients.

    Runs without dropout. If the pair sits on the hinge kink, ``xa`` is nudged
    until it is at least 1e-6 away. Entries where both gradients are below
    1e-8 in magnitude are compared absolutely.
    """
    rng = np.random.default_rng(seed)
    xa = np.atleast_2d(np.asarray(xa, dtype=float)).copy()
    xb = np.atleast_2d(np.asarray(xb, dtype=float))
    labels = np.array([float(label)])

    def hinge_arg():
        return -label * (model.score(xa)[0] - model.score(xb)[0]) + margin

    while abs(hinge_arg()) < 1e-6:
        xa += rng.normal(scale=1e-3, size=xa.shape)

    _, analytic = model.pair_loss_and_grads(xa, xb, labels, margin)
    worst = 0.0
    for p, g in zip(model.params, analytic):
        num = np.empty_like(p)
        flat, nflat = p.reshape(-1), num.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            lp = model.pair_loss_and_grads(xa, xb, labels, margin)[0]
            flat[i] = orig - h
            lm = model.pair_loss_and_grads(xa, xb, labels, margin)[0]
            flat[i] = orig
            nflat[i] = (lp - lm) / (2 * h)
        scale = np.maximum(np.abs(g), np.abs(num))
        denom = np.where(scale < 1e-8, 1.0, scale)
        worst = max(worst, float(np.max(np.abs(g - num) / denom)))
    return worst


@dataclass
class EnsemblePredictor:
    members: list[MlpModel]
    seeds: list[int]
    config: MlpConfig = field(default_factory=MlpConfig)
    kind: str = "mlp"

    @property
    def input_dim(self) -> int:
        return self.members[0].input_dim

    def member_scores(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.input_dim:
            raise LayoutMismatch(f"feature width {x.shape[1]} != trained width {self.input_dim}")
        return np.stack([m.score(x) for m in self.members])

    def predict(self, x: np.ndarray) -> np.ndarray:
        return self.member_scores(x).mean(axis=0)


def _train_member(x, y, cfg: MlpConfig, seed: int) -> MlpModel:
    rng = np.random.default_rng(seed)
    model = MlpModel.init(x.shape[1], cfg.hidden, rng, cfg.dropout, cfg.activation)
    state = AmsgradState.zeros_like(model.params)
    n = len(y)
    batches = math.ceil(n / cfg.batch_pairs)
    sparse = cfg.activation == "relu"
    ws = PairWorkspace(x, cfg.hidden, cfg.batch_pairs) if sparse else None
    for epoch in range(cfg.epochs):
        for _ in range(batches):
            i = rng.integers(0, n, size=cfg.batch_pairs)
            j = rng.integers(0, n, size=cfg.batch_pairs)
            keep = y[i] != y[j]
            if not keep.any():
                continue
            i, j = i[keep], j[keep]
            labels = np.sign(y[i] - y[j])
            mask_key = int(rng.integers(0, 2**63)) if cfg.dropout > 0 else None
            if sparse:
                ridx = np.concatenate([i, j]).astype(np.int64)
                _, grads = ws.loss_and_grads(model, ridx, labels, cfg.margin, cfg.dropout if mask_key is not None else 0.0, mask_key or 0)
            else:
                _, grads = model.pair_loss_and_grads(x[i], x[j], labels, cfg.margin, mask_key)
            amsgrad_step(model.params, grads, state, cfg.lr, cfg.weight_decay)
    return model


def fit_mlp_ensemble(x: np.ndarray, y: np.ndarray, config: MlpConfig | None = None, seed: int = 0) -> EnsemblePredictor:
    """Train ``config.members`` ranking MLPs on the same data; member k uses seed + k."""
    cfg = config or MlpConfig()
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(y) < 2:
        raise DegenerateTargets("need at least 2 examples")
    if np.unique(y).size < 2:
        raise DegenerateTargets("all target metrics are identical")
    seeds = [seed + k for k in range(cfg.members)]
    members = [_train_member(x, y, cfg, s) for s in seeds]
    return EnsemblePredictor(members, seeds, cfg)
