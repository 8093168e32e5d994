"""Analytic words-per-second model for LLM training jobs.

Throughput is GPUs x peak FLOP/s x utilization / FLOPs-per-token, where the
utilization multiplies efficiency terms for matmul width, tensor/pipeline/
context/data parallelism, sequence packing and, past one pod, cross-pod
gradient sync. A linear drift in time (software improving under the jobs)
and a growing FP8 speedup give later jobs a different input->throughput
relation than earlier ones. Validity rules reject configs no team would
launch: odd head sizes or FFN ratios, oversized global batches, and models
too small for their GPU count.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ..space import ConfigPoint
from ..store import JobRecord
from .base import load_params_doc

def _default_hardware() -> dict:
    # peak dense BF16 TFLOP/s, HBM GB, base utilization, FP8 speedup at t = 0
    return {
        "A100": {"peak_tflops": 312.0, "hbm_gb": 80.0, "mfu": 0.50, "fp8": 1.05},
        "H100": {"peak_tflops": 989.0, "hbm_gb": 80.0, "mfu": 0.42, "fp8": 1.35},
        "H200": {"peak_tflops": 989.0, "hbm_gb": 141.0, "mfu": 0.46, "fp8": 1.40},
    }


@dataclass(frozen=True)
class LlmSimParams:
    hardware: dict = field(default_factory=_default_hardware)
    vocab: int = 128_000
    param_bytes: float = 2.0
    grad_bytes: float = 2.0
    optimizer_bytes: float = 12.0
    activation_bytes_per_token_dim: float = 34.0
    checkpointed_bytes_per_token_dim: float = 2.0
    runtime_gb: float = 8.0
    max_global_tokens: float = 16 * 2**20
    min_params_per_gpu: float = 1e7
    head_dim_range: tuple = (64, 256)
    ffn_ratio_range: tuple = (2.0, 4.0)
    # efficiency knobs; zero overheads and infinite half-points mean perfect scaling
    width_half: float = 128.0
    tokens_half: float = 512.0
    tp_eff: float = 0.96
    cp_eff: float = 0.95
    dp_overhead: float = 0.01
    pod_gpus: int = 2048
    cross_pod_cost: float = 4.0
    cross_pod_half: float = 1e5
    pipeline_bubble: bool = True
    checkpoint_recompute: float = 4.0 / 3.0
    drift_per_day: float = 0.002
    fp8_gain_per_day: float = 0.003
    noise: float = 0.02
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.hardware:
            raise ValueError("at least one hardware type is required")
        for name, hw in self.hardware.items():
            if min(hw["peak_tflops"], hw["hbm_gb"], hw["mfu"]) <= 0:
                raise ValueError(f"{name}: hardware constants must be positive")
            if hw["fp8"] <= 1.0:
                raise ValueError(f"{name}: FP8 multiplier must exceed 1")
        if min(self.tp_eff, self.cp_eff) <= 0 or max(self.tp_eff, self.cp_eff) > 1:
            raise ValueError("tp_eff and cp_eff must be in (0, 1]")
        if self.dp_overhead < 0 or self.fp8_gain_per_day < 0 or self.drift_per_day <= -1.0 / 365:
            raise ValueError("overheads and gains must be non-negative")
        if not 0 <= self.noise < 0.05:
            raise ValueError("noise amplitude must be in [0, 0.05)")

    @classmethod
    def from_file(cls, path: str | Path) -> "LlmSimParams":
        doc = load_params_doc(path)
        doc.pop("simulator", None)
        for key in ("head_dim_range", "ffn_ratio_range"):
            if key in doc:
                doc[key] = tuple(doc[key])
        return cls(**doc)

    def without_noise(self) -> "LlmSimParams":
        return replace(self, noise=0.0)

    def perfect(self) -> "LlmSimParams":
        """Perfect-scaling variant: every efficiency term is 1 and there is no drift or noise."""
        return replace(
            self, width_half=0.0, tokens_half=0.0, tp_eff=1.0, cp_eff=1.0, dp_overhead=0.0, cross_pod_cost=0.0,
            pipeline_bubble=False, drift_per_day=0.0, fp8_gain_per_day=0.0, noise=0.0,
        )


@dataclass(frozen=True)
class LlmJob:
    n_layers: int
    n_heads: int
    d_model: int
    ffn_dim: int
    batch_size: int
    seq_len: int
    tp: int
    pp: int
    cp: int
    precision: str
    checkpointing: bool
    gpus: int
    hardware: str

    @property
    def dp(self) -> float:
        return self.gpus / (self.tp * self.pp * self.cp)

    @classmethod
    def from_config(cls, config: ConfigPoint) -> "LlmJob":
        c = config.as_dict()
        return cls(
            n_layers=int(c["n_layers"]), n_heads=int(c["n_heads"]), d_model=int(c["d_model"]),
            ffn_dim=int(c["ffn_dim"]), batch_size=int(c["batch_size"]), seq_len=2 ** int(c["log2_seq_len"]),
            tp=2 ** int(c["log2_tp"]), pp=2 ** int(c["log2_pp"]), cp=2 ** int(c["log2_cp"]),
            precision=str(c["precision"]), checkpointing=bool(c["activation_checkpointing"]),
            gpus=2 ** int(c["log2_gpus"]), hardware=str(c["hardware"]),
        )


class LlmSimulator:
    """Executor for the LLM space; scale tag is the GPU count."""

    name = "llm"

    def __init__(self, params: LlmSimParams | None = None):
        self.params = params or LlmSimParams()

    def _hw(self, job: LlmJob) -> dict:
        try:
            return self.params.hardware[job.hardware]
        except KeyError:
            raise ValueError(f"unknown hardware {job.hardware!r}") from None

    @staticmethod
    def parameter_count(job: LlmJob, vocab: int) -> float:
        d, f = job.d_model, job.ffn_dim
        return job.n_layers * (4.0 * d * d + 2.0 * d * f) + 2.0 * vocab * d

    def flops_per_token(self, job: LlmJob) -> float:
        """Useful training FLOPs per token (forward + backward)."""
        p = self.parameter_count(job, self.params.vocab)
        return 6.0 * p + 12.0 * job.n_layers * job.d_model * job.seq_len

    def infra_error(self, job: LlmJob) -> str | None:
        p = self.params
        if job.d_model % job.n_heads:
            return "d_model not divisible by head count"
        if not p.head_dim_range[0] <= job.d_model // job.n_heads <= p.head_dim_range[1]:
            return "head dimension outside the supported range"
        if not p.ffn_ratio_range[0] <= job.ffn_dim / job.d_model <= p.ffn_ratio_range[1]:
            return "ffn_dim / d_model outside the supported range"
        if job.dp < 1:
            return "tp * pp * cp exceeds GPU count"
        if job.n_layers % job.pp:
            return "layers not divisible by pipeline stages"
        if job.dp * job.batch_size * job.seq_len > self.params.max_global_tokens:
            return "global batch exceeds the token limit"
        if self.parameter_count(job, self.params.vocab) / job.gpus < self.params.min_params_per_gpu:
            return "model too small for the requested GPU count"
        return None

    def memory_gb(self, job: LlmJob) -> float:
        p = self.params
        n = self.parameter_count(job, p.vocab)
        shard = job.tp * job.pp
        states = n * (p.param_bytes + p.grad_bytes) / shard + n * p.optimizer_bytes / (shard * job.dp)
        per_token = p.checkpointed_bytes_per_token_dim if job.checkpointing else p.activation_bytes_per_token_dim
        in_flight = min(job.pp, job.batch_size)
        acts = (job.n_layers / job.pp) * (job.seq_len / job.cp) * job.d_model * per_token / job.tp * in_flight
        return (states + acts) / 1e9 + p.runtime_gb

    def feasible(self, job: LlmJob) -> bool:
        return self.infra_error(job) is None and self.memory_gb(job) <= self._hw(job)["hbm_gb"]

    def utilization(self, job: LlmJob) -> float:
        p = self.params
        hw = self._hw(job)
        width = job.d_model / job.tp
        tokens = job.seq_len / job.cp
        u = hw["mfu"]
        u *= width / (width + p.width_half)
        u *= tokens / (tokens + p.tokens_half)
        u *= p.tp_eff ** math.log2(job.tp)
        u *= p.cp_eff ** math.log2(job.cp)
        if p.pipeline_bubble:
            u *= job.batch_size / (job.batch_size + job.pp - 1)
        u /= 1.0 + p.dp_overhead * math.log2(job.dp) / job.batch_size
        if job.gpus > p.pod_gpus and p.cross_pod_cost > 0:
            # gradient sync crosses pods; hurts most when each GPU holds many weights per token
            ratio = self.parameter_count(job, p.vocab) / (job.tp * job.pp) / (job.batch_size * job.seq_len)
            u /= 1.0 + p.cross_pod_cost * math.log2(job.gpus / p.pod_gpus) * ratio / (ratio + p.cross_pod_half)
        if job.checkpointing:
            u /= p.checkpoint_recompute
        return u

    def precision_multiplier(self, job: LlmJob, timestamp: float) -> float:
        if job.precision == "BF16":
            return 1.0
        if job.precision != "FP8":
            raise ValueError(f"unknown precision {job.precision!r}")
        return self._hw(job)["fp8"] + self.params.fp8_gain_per_day * timestamp

    def noise_free_wps(self, config: ConfigPoint, timestamp: float = 0.0) -> float | None:
        """Words per second without noise, or None when the job cannot run."""
        job = LlmJob.from_config(config)
        if not self.feasible(job):
            return None
        hw = self._hw(job)
        rate = job.gpus * (hw["peak_tflops"] * 1e12) * self.utilization(job) / self.flops_per_token(job)
        return rate * self.precision_multiplier(job, timestamp) * (1.0 + self.params.drift_per_day * timestamp)

    def _noise(self, config: ConfigPoint, timestamp: float) -> float:
        a = self.params.noise
        if a == 0:
            return 1.0
        blob = json.dumps([self.params.seed, timestamp, sorted(config.as_dict().items())], default=str)
        seed = int.from_bytes(hashlib.sha256(blob.encode()).digest()[:8], "little")
        return 1.0 + float(np.random.default_rng(seed).uniform(-a, a))

    def execute(self, config: ConfigPoint, timestamp: float = 0.0, round_label: str = "random") -> JobRecord:
        job = LlmJob.from_config(config)
        if self.infra_error(job):
            return JobRecord(config, "failed_infra", None, timestamp, job.gpus, round_label)
        wps = self.noise_free_wps(config, timestamp)
        if wps is None:
            return JobRecord(config, "failed_oom", None, timestamp, job.gpus, round_label)
        return JobRecord(config, "completed", wps * self._noise(config, timestamp), timestamp, job.gpus, round_label)

    __call__ = execute
