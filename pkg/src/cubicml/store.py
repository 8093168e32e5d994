"""Append-only job history and the train/validation splits built from it."""

from __future__ import annotations

import json
import logging
import math
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .space import ConfigPoint

log = logging.getLogger(__name__)

STATUSES = ("completed", "failed_oom", "failed_infra")


class RecordError(ValueError):
    pass


class SplitError(ValueError):
    pass


@dataclass(frozen=True)
class JobRecord:
    config: ConfigPoint
    status: str
    metric: float | None = None
    timestamp: float = 0.0
    scale: int | None = None
    round: str = "random"
    predicted: float | None = None

    def __post_init__(self) -> None:
        if self.status not in STATUSES:
            raise RecordError(f"unknown status {self.status!r}")
        if self.status == "completed":
            if self.metric is None or not math.isfinite(self.metric) or self.metric <= 0:
                raise RecordError(f"completed job needs a positive metric, got {self.metric!r}")
        elif self.metric is not None:
            raise RecordError(f"{self.status} job must not carry a metric")

    @property
    def completed(self) -> bool:
        return self.status == "completed"

    def with_predicted(self, score: float) -> "JobRecord":
        return replace(self, predicted=float(score))

    def to_json(self) -> str:
        return json.dumps(
            {
                "config": self.config.as_dict(),
                "status": self.status,
                "metric": self.metric,
                "timestamp": self.timestamp,
                "scale": self.scale,
                "round": self.round,
                "predicted": self.predicted,
            }
        )

    @classmethod
    def from_json(cls, line: str) -> "JobRecord":
        doc = json.loads(line)
        return cls(
            config=ConfigPoint.from_mapping(doc["config"]),
            status=doc["status"],
            metric=doc.get("metric"),
            timestamp=float(doc.get("timestamp", 0.0)),
            scale=doc.get("scale"),
            round=doc.get("round", "random"),
            predicted=doc.get("predicted"),
        )


class JobStore:
    """Line-delimited JSON history with a single writer.

    A torn final line (crash mid-append) is dropped on load.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._last_ts: float | None = None

    def append(self, record: JobRecord) -> None:
        if self._last_ts is None:
            existing = self.load()
            self._last_ts = existing[-1].timestamp if existing else -math.inf
        if record.timestamp < self._last_ts:
            raise RecordError(
                f"timestamp {record.timestamp} precedes last stored timestamp {self._last_ts}"
            )
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(record.to_json() + "\n")
            fh.flush()
            os.fsync(fh.fileno())
        self._last_ts = record.timestamp

    def extend(self, records: Iterable[JobRecord]) -> None:
        for r in records:
            self.append(r)

    def load(self) -> list[JobRecord]:
        if not self.path.exists():
            return []
        text = self.path.read_text(encoding="utf-8")
        lines = text.split("\n")
        records = []
        for i, line in enumerate(lines):
            if not line.strip():
                continue
            try:
                records.append(JobRecord.from_json(line))
            except (json.JSONDecodeError, KeyError, RecordError):
                if i == len(lines) - 1:
                    log.warning("%s: discarding torn final line", self.path)
                    break
                raise
        return records

    def __len__(self) -> int:
        return len(self.load())


def completed_only(records: Iterable[JobRecord]) -> list[JobRecord]:
    return [r for r in records if r.completed]


@dataclass
class DatasetSplit:
    train: list[JobRecord]
    valid: list[JobRecord]
    strategy: str
    excluded: list[JobRecord] = field(default_factory=list)


def _check_fraction(records: Sequence[JobRecord], fraction: float) -> int:
    if len(records) < 2:
        raise SplitError("need at least 2 records to split")
    if not 0 < fraction < 1:
        raise SplitError(f"valid fraction must be in (0, 1), got {fraction}")
    n_valid = int(round(fraction * len(records)))
    return min(max(n_valid, 1), len(records) - 1)


def split_random(records: Sequence[JobRecord], valid_fraction: float, seed: int) -> DatasetSplit:
    n_valid = _check_fraction(records, valid_fraction)
    perm = np.random.default_rng(seed).permutation(len(records))
    valid_idx = set(perm[:n_valid].tolist())
    train = [r for i, r in enumerate(records) if i not in valid_idx]
    valid = [records[i] for i in sorted(valid_idx)]
    return DatasetSplit(train, valid, "random")


def split_temporal(records: Sequence[JobRecord], valid_fraction: float) -> DatasetSplit:
    n_valid = _check_fraction(records, valid_fraction)
    ordered = sorted(records, key=lambda r: r.timestamp)  # stable: ties keep input order
    cut = len(ordered) - n_valid
    return DatasetSplit(list(ordered[:cut]), list(ordered[cut:]), "temporal")


def split_scale(records: Sequence[JobRecord], train_max_scale: int, valid_min_scale: int) -> DatasetSplit:
    if any(r.scale is None for r in records):
        raise SplitError("scale split needs a scale tag on every record")
    train = [r for r in records if r.scale <= train_max_scale]
    valid = [r for r in records if r.scale >= valid_min_scale]
    excluded = [r for r in records if train_max_scale < r.scale < valid_min_scale]
    if not train:
        raise SplitError("scale split left the training side empty")
    if not valid:
        raise SplitError("scale split left the validation side empty")
    return DatasetSplit(train, valid, "scale", excluded)


def max_frontier(metrics: Sequence[float]) -> list[float]:
    """Running maximum, in launch order."""
    return np.maximum.accumulate(np.asarray(metrics, dtype=float)).tolist() if len(metrics) else []


def record_frontier(records: Iterable[JobRecord]) -> list[float]:
    return max_frontier([r.metric for r in records if r.completed])


def averaged_frontier(metrics: Sequence[float], n_perturbations: int = 100, seed: int = 0) -> np.ndarray:
    """Mean running maximum over random launch orders of the same jobs."""
    metrics = np.asarray(metrics, dtype=float)
    rng = np.random.default_rng(seed)
    acc = np.zeros(len(metrics))
    for _ in range(n_perturbations):
        acc += np.maximum.accumulate(metrics[rng.permutation(len(metrics))])
    return acc / n_perturbations
