"""Shared pieces of the simulated executors."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any, Mapping

import numpy as np
import yaml

from ..space import ConfigPoint


def config_seed(config: ConfigPoint, seed: int) -> int:
    """Stable per-(config, seed) noise seed, independent of dict ordering."""
    blob = json.dumps([seed, sorted(config.as_dict().items())], sort_keys=True, default=str)
    return int.from_bytes(hashlib.sha256(blob.encode()).digest()[:8], "little")


def noisy_step_times(step_time: float, steps: int, amplitude: float, seed: int) -> np.ndarray:
    """Per-step times with bounded multiplicative uniform noise."""
    if amplitude == 0:
        return np.full(steps, step_time)
    rng = np.random.default_rng(seed)
    return step_time * (1.0 + rng.uniform(-amplitude, amplitude, size=steps))


def load_params_doc(path: str | Path) -> dict[str, Any]:
    doc = yaml.safe_load(Path(path).read_text())
    if not isinstance(doc, Mapping):
        raise ValueError(f"{path}: simulator params must be a mapping")
    return dict(doc)
