"""Rank-correlation statistics and the predictor study harnesses."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import kernels


class CorrelationError(ValueError):
    """Correlation is undefined for the given inputs (e.g. a constant side)."""


def _pair(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or x.shape != y.shape:
        raise CorrelationError(f"inputs must be equal-length vectors, got {x.shape} and {y.shape}")
    if len(x) < 2:
        raise CorrelationError("need at least 2 observations")
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise CorrelationError("inputs must be finite")
    return x, y


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    x, y = _pair(x, y)
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise CorrelationError("zero variance on one side")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def average_ranks(x: Sequence[float]) -> np.ndarray:
    """1-based ranks; tied values share the mean of their positions."""
    x = np.asarray(x, dtype=float)
    order = np.argsort(x, kind="mergesort")
    xs = x[order]
    ranks = np.empty(len(x))
    start = 0
    n = len(x)
    while start < n:
        stop = start + 1
        while stop < n and xs[stop] == xs[start]:
            stop += 1
        ranks[order[start:stop]] = 0.5 * (start + stop - 1) + 1.0
        start = stop
    return ranks


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    x, y = _pair(x, y)
    return pearson(average_ranks(x), average_ranks(y))


def kendall_tau(x: Sequence[float], y: Sequence[float]) -> float:
    """Tau-b: (C - D) / sqrt((C + D + Tx) (C + D + Ty)), ties counted per side."""
    x, y = _pair(x, y)
    c, d, tx, ty, _ = kernels.kendall_counts(np.ascontiguousarray(x), np.ascontiguousarray(y))
    denom = (c + d + tx) * (c + d + ty)
    if denom == 0:
        raise CorrelationError("kendall tau-b denominator is zero")
    return max(-1.0, min(1.0, (c - d) / math.sqrt(denom)))


@dataclass(frozen=True)
class CorrelationReport:
    kendall: float
    pearson: float
    spearman: float
    n: int

    def as_row(self) -> dict:
        return {"kendall": self.kendall, "pearson": self.pearson, "spearman": self.spearman, "n": self.n}


def correlation_report(predicted: Sequence[float], actual: Sequence[float]) -> CorrelationReport:
    return CorrelationReport(
        kendall=kendall_tau(predicted, actual),
        pearson=pearson(predicted, actual),
        spearman=spearman(predicted, actual),
        n=len(predicted),
    )


@dataclass(frozen=True)
class CurvePoint:
    size: int
    mean: dict
    std: dict


def learning_curve(
    train_x: np.ndarray,
    train_y: np.ndarray,
    valid_x: np.ndarray,
    valid_y: np.ndarray,
    sizes: Sequence[int],
    fit: Callable[[np.ndarray, np.ndarray, int], Callable[[np.ndarray], np.ndarray]],
    perturbations: int = 10,
    seed: int = 0,
) -> list[CurvePoint]:
    """Correlation on a fixed validation set versus training-set size.

    ``fit(x, y, seed)`` returns a prediction function. For each size, each
    perturbation draws a random subsample of the training pool without
    replacement.
    """
    n_pool = len(train_y)
    rng = np.random.default_rng(seed)
    points = []
    for size in sizes:
        if size < 2:
            raise ValueError(f"training size {size} too small to fit")
        if size > n_pool:
            raise ValueError(f"training size {size} exceeds the pool of {n_pool}")
        rows = []
        for p in range(perturbations):
            idx = np.sort(rng.permutation(n_pool)[:size])
            predict = fit(train_x[idx], train_y[idx], int(rng.integers(2**31)))
            rows.append(correlation_report(predict(valid_x), valid_y).as_row())
        mean = {k: float(np.mean([r[k] for r in rows])) for k in ("kendall", "pearson", "spearman")}
        std = {k: float(np.std([r[k] for r in rows])) for k in ("kendall", "pearson", "spearman")}
        points.append(CurvePoint(size, mean, std))
    return points
