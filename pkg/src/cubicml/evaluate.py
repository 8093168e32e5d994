"""Fit a predictor on one side of a split and score it on the other."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .metrics import CorrelationReport, CurvePoint, correlation_report, learning_curve
from .predictor.gbdt import GbdtConfig, fit_gbdt
from .predictor.mlp import MlpConfig, fit_mlp_ensemble
from .space import SearchSpace
from .store import DatasetSplit, JobRecord, SplitError, completed_only, split_random, split_scale, split_temporal

SPLITS = ("random", "temporal", "scale")


@dataclass
class PredictorSpec:
    backend: str = "gbdt"
    gbdt: GbdtConfig = field(default_factory=GbdtConfig)
    mlp: MlpConfig = field(default_factory=MlpConfig)

    def __post_init__(self) -> None:
        if self.backend not in ("gbdt", "mlp"):
            raise ValueError(f"unknown predictor backend {self.backend!r}")

    def features(self, space: SearchSpace, records: Sequence[JobRecord]) -> np.ndarray:
        idx = np.stack([space.indices(r.config) for r in records])
        return space.mixed_from_indices(idx) if self.backend == "gbdt" else space.onehot_from_indices(idx)

    def fit(self, space: SearchSpace, x: np.ndarray, y: np.ndarray, seed: int):
        if self.backend == "gbdt":
            return fit_gbdt(x, y, space.mixed_layout.categorical, self.gbdt, seed)
        return fit_mlp_ensemble(x, y, self.mlp, seed)


@dataclass
class FitEval:
    report: CorrelationReport
    predicted: np.ndarray
    actual: np.ndarray
    split: DatasetSplit


def make_split(
    records: Sequence[JobRecord],
    strategy: str,
    valid_fraction: float = 145 / 568,
    train_max_scale: int = 3072,
    valid_min_scale: int = 4096,
    seed: int = 0,
) -> DatasetSplit:
    """Split the completed records; failed jobs never enter either side."""
    done = completed_only(records)
    if strategy == "random":
        return split_random(done, valid_fraction, seed)
    if strategy == "temporal":
        return split_temporal(done, valid_fraction)
    if strategy == "scale":
        return split_scale(done, train_max_scale, valid_min_scale)
    raise SplitError(f"unknown split strategy {strategy!r}; choose from {SPLITS}")


def fit_eval(space: SearchSpace, split: DatasetSplit, spec: PredictorSpec, seed: int) -> FitEval:
    if len(split.train) < 2 or len(split.valid) < 2:
        raise SplitError(f"need >= 2 records per side, got {len(split.train)} train / {len(split.valid)} valid")
    y = np.array([r.metric for r in split.train])
    model = spec.fit(space, spec.features(space, split.train), y, seed)
    pred = np.asarray(model.predict(spec.features(space, split.valid)), dtype=float)
    actual = np.array([r.metric for r in split.valid])
    return FitEval(correlation_report(pred, actual), pred, actual, split)


def split_curve(
    space: SearchSpace,
    split: DatasetSplit,
    sizes: Sequence[int],
    spec: PredictorSpec,
    perturbations: int = 10,
    seed: int = 0,
) -> list[CurvePoint]:
    """Learning curve over subsamples of ``split.train``, scored on ``split.valid``."""
    xt = spec.features(space, split.train)
    yt = np.array([r.metric for r in split.train])
    xv = spec.features(space, split.valid)
    yv = np.array([r.metric for r in split.valid])

    def fit(x, y, s):
        return spec.fit(space, x, y, s).predict

    return learning_curve(xt, yt, xv, yv, sizes, fit, perturbations, seed)
