"""Simulated executors standing in for real training jobs."""

from __future__ import annotations

from pathlib import Path

from .dataset import OracleError, exhaustive_optimum, generate_dataset
from .fsdp import FsdpSimParams, FsdpSimulator
from .llm import LlmSimParams, LlmSimulator

SIMULATORS = {"fsdp": (FsdpSimulator, FsdpSimParams), "llm": (LlmSimulator, LlmSimParams)}


def make_executor(name: str, params_path: str | Path | None = None, noise: bool = True):
    """Build a simulator by name, optionally from a params file."""
    try:
        sim_cls, params_cls = SIMULATORS[name]
    except KeyError:
        raise ValueError(f"unknown simulator {name!r}; choose from {sorted(SIMULATORS)}") from None
    params = params_cls.from_file(params_path) if params_path else params_cls()
    if not noise:
        params = params.without_noise()
    return sim_cls(params)


__all__ = [
    "FsdpSimParams", "FsdpSimulator", "LlmSimParams", "LlmSimulator", "OracleError",
    "SIMULATORS", "exhaustive_optimum", "generate_dataset", "make_executor",
]
