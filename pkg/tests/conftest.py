import time
from dataclasses import dataclass

import numpy as np
import pytest

from cubicml.resources import space_path
from cubicml.space import load_space, parse_space

# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def reduced_space():
    return load_space(space_path("ads_fsdp_reduced"))


@pytest.fixture(scope="session")
def ads_space():
    return load_space(space_path("ads_fsdp"))


@pytest.fixture(scope="session")
def llm_space():
    return load_space(space_path("llm"))


@pytest.fixture
def tiny_space():
    return parse_space(
        {
            "name": "tiny",
            "version": 1,
            "dimensions": [
                {"name": "a", "kind": "categorical", "values": ["x", "y", "z"]},
                {"name": "b", "kind": "int", "min": 1, "max": 4, "step": 1},
                {"name": "c", "kind": "bool"},
            ],
        }
    )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def out_dir(tmp_path, monkeypatch):
    monkeypatch.delenv("CUBIC_OUT_DIR", raising=False)
    return tmp_path / "out"


# -- shared reduced-FSDP loop runs (bootstrap 60 + 2 rounds x top-10, 10 seeds) --

LOOP_SEEDS = range(10)


@dataclass
class LoopRun:
    seed: int
    records: list
    report: object
    seconds: float


@pytest.fixture(scope="session")
def reduced_loop_runs(tmp_path_factory, reduced_space):
    from cubicml.loop import LoopConfig, run_loop
    from cubicml.searcher import SearcherConfig
    from cubicml.sim import FsdpSimulator
    from cubicml.store import JobStore

    runs = []
    for seed in LOOP_SEEDS:
        store = JobStore(tmp_path_factory.mktemp(f"loop{seed}") / "history.jsonl")
        cfg = LoopConfig(bootstrap_budget=60, rounds=2, searcher=SearcherConfig(top_k=10), seed=seed)
        t0 = time.perf_counter()
        report = run_loop(reduced_space, FsdpSimulator(), store, cfg)
        runs.append(LoopRun(seed, store.load(), report, time.perf_counter() - t0))
    return runs
