"""Layer-wise FSDP/ZeRO training-throughput simulator for ads-style spaces.

The cost model is fictional but keeps the sharding trade-off: each step up
NO_SHARD -> SHARD_GRAD_OP -> FULL_SHARD shards more state (less memory per
GPU) and moves more bytes per step (slower).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ..loop import aggregate_metric
from ..space import ConfigPoint
from ..store import JobRecord
from .base import config_seed, load_params_doc, noisy_step_times

STRATEGIES = ("NO_SHARD", "SHARD_GRAD_OP", "FULL_SHARD")
_LAYER_RE = re.compile(r"^layer_(\d+)_sharding$")


@dataclass(frozen=True)
class FsdpSimParams:
    layer_params_b: tuple[float, ...] = (1.2, 0.8, 1.0)
    gpus: int = 128
    hbm_gb: float = 80.0
    param_bytes: float = 2.0
    grad_bytes: float = 2.0
    optimizer_bytes: float = 12.0
    activation_gb_per_k_samples: float = 20.0
    runtime_gb: float = 6.0
    embedding_gb: float = 20.0
    balanced_overhead_ms: float = 4.0
    spill_ms_per_gb: float = 5.0
    bandwidth_gbps: float = 100.0
    comm_multiplier: dict = field(
        default_factory=lambda: {"NO_SHARD": 1.0, "SHARD_GRAD_OP": 1.25, "FULL_SHARD": 1.5}
    )
    compute_fixed_ms: float = 60.0
    compute_ms_per_sample: float = 0.1
    noise: float = 0.02
    steps: int = 2000
    percentile: float = 90.0
    seed: int = 0

    def __post_init__(self) -> None:
        positive = [
            self.gpus, self.hbm_gb, self.param_bytes, self.grad_bytes, self.optimizer_bytes,
            self.bandwidth_gbps, self.compute_ms_per_sample, self.steps,
        ]
        if not self.layer_params_b or min(self.layer_params_b) <= 0 or min(positive) <= 0:
            raise ValueError("FSDP simulator parameters must be positive")
        if not 0 <= self.noise < 0.05:
            raise ValueError("noise amplitude must be in [0, 0.05)")
        m = self.comm_multiplier
        if not 0 < m["NO_SHARD"] < m["SHARD_GRAD_OP"] < m["FULL_SHARD"]:
            raise ValueError("communication multipliers must increase with sharding stage")

    @classmethod
    def from_file(cls, path: str | Path) -> "FsdpSimParams":
        doc = load_params_doc(path)
        doc.pop("simulator", None)
        if "layer_params_b" in doc:
            doc["layer_params_b"] = tuple(float(v) for v in doc["layer_params_b"])
        return cls(**doc)

    def without_noise(self) -> "FsdpSimParams":
        return replace(self, noise=0.0)


class FsdpSimulator:
    """Executor for spaces with ``layer_NN_sharding``, ``batch_size`` and
    ``storage_reservation`` dimensions."""

    name = "fsdp"

    def __init__(self, params: FsdpSimParams | None = None):
        self.params = params or FsdpSimParams()

    def _parse(self, config: ConfigPoint):
        cfg = config.as_dict()
        layers = sorted(
            (int(m.group(1)), v) for k, v in cfg.items() if (m := _LAYER_RE.match(k))
        )
        strategies = [v for _, v in layers]
        if len(strategies) != len(self.params.layer_params_b):
            raise ValueError(
                f"config has {len(strategies)} layers, simulator expects {len(self.params.layer_params_b)}"
            )
        return strategies, int(cfg["batch_size"]), str(cfg["storage_reservation"])

    def layer_memory_gb(self, strategy: str, params_b: float) -> float:
        p = self.params
        full = params_b * (p.param_bytes + p.grad_bytes + p.optimizer_bytes)
        if strategy == "NO_SHARD":
            return full
        if strategy == "SHARD_GRAD_OP":
            return params_b * p.param_bytes + params_b * (p.grad_bytes + p.optimizer_bytes) / p.gpus
        if strategy == "FULL_SHARD":
            return full / p.gpus
        raise ValueError(f"unknown sharding strategy {strategy!r}")

    def _budgets(self, reservation: str) -> tuple[float, float]:
        """(dense budget GB, embedding shortfall GB)."""
        p = self.params
        if reservation == "memory_balanced":
            return p.hbm_gb - p.embedding_gb, 0.0
        if not reservation.startswith("fixed_"):
            raise ValueError(f"unknown storage reservation {reservation!r}")
        frac = float(reservation[len("fixed_"):])
        dense = frac * p.hbm_gb
        return dense, max(0.0, p.embedding_gb - (p.hbm_gb - dense))

    def memory_demand_gb(self, config: ConfigPoint) -> float:
        strategies, batch, _ = self._parse(config)
        p = self.params
        layers = sum(self.layer_memory_gb(s, b) for s, b in zip(strategies, p.layer_params_b))
        return layers + p.activation_gb_per_k_samples * batch / 1024.0 + p.runtime_gb

    def feasible(self, config: ConfigPoint) -> bool:
        _, _, reservation = self._parse(config)
        return self.memory_demand_gb(config) <= self._budgets(reservation)[0]

    def step_time_ms(self, config: ConfigPoint) -> float:
        strategies, batch, reservation = self._parse(config)
        p = self.params
        t = p.compute_fixed_ms + p.compute_ms_per_sample * batch
        for s, b in zip(strategies, p.layer_params_b):
            t += p.comm_multiplier[s] * b * p.param_bytes / p.bandwidth_gbps * 1000.0
        _, shortfall = self._budgets(reservation)
        t += p.spill_ms_per_gb * shortfall
        if reservation == "memory_balanced":
            t += p.balanced_overhead_ms
        return t

    def noise_free_qps(self, config: ConfigPoint) -> float | None:
        """QPS without noise, or None when the job would run out of memory."""
        if not self.feasible(config):
            return None
        _, batch, _ = self._parse(config)
        return batch * self.params.gpus / (self.step_time_ms(config) / 1000.0)

    def step_qps(self, config: ConfigPoint) -> np.ndarray:
        _, batch, _ = self._parse(config)
        p = self.params
        times = noisy_step_times(self.step_time_ms(config), p.steps, p.noise, config_seed(config, p.seed))
        return batch * p.gpus / (times / 1000.0)

    def execute(self, config: ConfigPoint, timestamp: float = 0.0, round_label: str = "random") -> JobRecord:
        p = self.params
        if not self.feasible(config):
            return JobRecord(config, "failed_oom", None, timestamp, p.gpus, round_label)
        metric = aggregate_metric(self.step_qps(config), p.percentile)
        return JobRecord(config, "completed", metric, timestamp, p.gpus, round_label)

    __call__ = execute
