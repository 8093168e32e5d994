"""End-to-end search loop: random bootstrap, then predictor-guided rounds.

Each round refits the predictor from scratch on every completed job in the
store, runs several REINFORCE trials against it, and launches the best novel
proposals in descending predicted order.
"""

from __future__ import annotations

import hashlib
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np

from .metrics import CorrelationError, CorrelationReport, correlation_report
from .predictor.gbdt import GbdtConfig, fit_gbdt
from .predictor.mlp import DegenerateTargets, MlpConfig, fit_mlp_ensemble
from .searcher import Scorer, SearcherConfig, propose_topk, random_search, reinforce_trial
from .space import ConfigPoint, SearchSpace
from .store import JobRecord, JobStore, completed_only, max_frontier

log = logging.getLogger(__name__)

BOOTSTRAP_LABEL = "random"


def aggregate_metric(samples: Sequence[float], percentile: float = 90.0) -> float:
    """Nearest-rank percentile: element ceil(p/100 * n) (1-based) of the ascending sort."""
    xs = np.sort(np.asarray(samples, dtype=float))
    if xs.size == 0:
        raise ValueError("cannot aggregate an empty sample")
    if not 0 < percentile <= 100:
        raise ValueError("percentile must be in (0, 100]")
    rank = max(1, math.ceil(percentile / 100.0 * xs.size))
    return float(xs[rank - 1])


def derive_seed(seed: int, *names: object) -> int:
    """Component seed = hash(global seed, component name)."""
    blob = ":".join([str(seed), *map(str, names)]).encode()
    return int.from_bytes(hashlib.sha256(blob).digest()[:4], "little")


class Executor(Protocol):
    """Anything that can run a configuration and report the outcome.

    Infeasible or crashed jobs come back as failed records, never as exceptions.
    """

    name: str

    def execute(self, config: ConfigPoint, timestamp: float = 0.0, round_label: str = "random") -> JobRecord: ...


class DegenerateHistory(ValueError):
    pass


@dataclass
class LoopConfig:
    bootstrap_budget: int = 480
    rounds: int = 3
    backend: str = "mlp"
    searcher: SearcherConfig = field(default_factory=SearcherConfig)
    mlp: MlpConfig = field(default_factory=MlpConfig)
    gbdt: GbdtConfig = field(default_factory=GbdtConfig)
    seed: int = 0
    parallel: int = 1

    def __post_init__(self) -> None:
        if self.bootstrap_budget < 2:
            raise ValueError("bootstrap budget must be >= 2")
        if self.rounds < 1:
            raise ValueError("rounds must be >= 1")
        if self.backend not in ("mlp", "gbdt"):
            raise ValueError(f"unknown predictor backend {self.backend!r}")

    @property
    def encoding(self) -> str:
        return "onehot" if self.backend == "mlp" else "mixed"

    @property
    def total_budget(self) -> int:
        return self.bootstrap_budget + self.rounds * self.searcher.top_k


@dataclass
class RoundReport:
    label: str
    launched: list[JobRecord]
    frontier: list[float]
    best: float | None
    correlation: CorrelationReport | None

    @property
    def n_failed(self) -> int:
        return sum(not r.completed for r in self.launched)


@dataclass
class LoopReport:
    rounds: list[RoundReport]
    frontier: list[float]
    best_config: ConfigPoint | None
    best_metric: float | None
    jobs: int
    predictor_fits: int


def _round_report(label: str, records: list[JobRecord]) -> RoundReport:
    done = completed_only(records)
    frontier = max_frontier([r.metric for r in done])
    corr = None
    scored = [r for r in done if r.predicted is not None]
    if len(scored) >= 2:
        try:
            corr = correlation_report([r.predicted for r in scored], [r.metric for r in scored])
        except CorrelationError:
            corr = None
    return RoundReport(label, list(records), frontier, frontier[-1] if frontier else None, corr)


def round_reports(records: Sequence[JobRecord]) -> list[RoundReport]:
    """Rebuild per-round reports from stored records alone."""
    labels: list[str] = []
    groups: dict[str, list[JobRecord]] = {}
    for r in records:
        if r.round not in groups:
            labels.append(r.round)
            groups[r.round] = []
        groups[r.round].append(r)
    return [_round_report(lab, groups[lab]) for lab in labels]


def loop_report(records: Sequence[JobRecord], predictor_fits: int = 0) -> LoopReport:
    done = completed_only(records)
    best = max(done, key=lambda r: r.metric) if done else None
    return LoopReport(
        rounds=round_reports(records),
        frontier=max_frontier([r.metric for r in done]),
        best_config=best.config if best else None,
        best_metric=best.metric if best else None,
        jobs=len(records),
        predictor_fits=predictor_fits,
    )


def _launch(
    configs: Sequence[ConfigPoint],
    executor: Executor,
    store: JobStore,
    label: str,
    parallel: int = 1,
    predicted: Sequence[float] | None = None,
) -> list[JobRecord]:
    start = len(store.load())
    timestamps = [float(start + i) for i in range(len(configs))]

    def run(i: int) -> JobRecord:
        return executor.execute(configs[i], timestamps[i], label)

    if parallel > 1:
        with ThreadPoolExecutor(max_workers=parallel) as pool:
            results = list(pool.map(run, range(len(configs))))
    else:
        results = [run(i) for i in range(len(configs))]
    out = []
    for i, rec in enumerate(results):
        if predicted is not None:
            rec = rec.with_predicted(predicted[i])
        store.append(rec)
        out.append(rec)
    return out


def run_bootstrap(space: SearchSpace, executor: Executor, budget: int, seed: int, store: JobStore, parallel: int = 1) -> list[JobRecord]:
    if budget < 1:
        raise ValueError("bootstrap budget must be >= 1")
    return _launch(random_search(space, budget, seed), executor, store, BOOTSTRAP_LABEL, parallel)


def fit_predictor(space: SearchSpace, records: Sequence[JobRecord], cfg: LoopConfig, seed: int) -> Scorer:
    done = completed_only(records)
    if len(done) < 2:
        raise DegenerateHistory(f"need >= 2 completed jobs, have {len(done)}")
    y = np.array([r.metric for r in done])
    if np.unique(y).size < 2:
        raise DegenerateHistory("all completed jobs share the same metric")
    idx = np.stack([space.indices(r.config) for r in done])
    scorer = Scorer(space, None, cfg.encoding)
    x = scorer.features(idx)
    try:
        if cfg.backend == "mlp":
            scorer.predictor = fit_mlp_ensemble(x, y, cfg.mlp, seed)
        else:
            scorer.predictor = fit_gbdt(x, y, space.mixed_layout.categorical, cfg.gbdt, seed)
    except DegenerateTargets as exc:
        raise DegenerateHistory(str(exc)) from exc
    return scorer


def run_round(space: SearchSpace, executor: Executor, store: JobStore, cfg: LoopConfig, round_index: int) -> RoundReport:
    label = f"rl-round-{round_index}"
    history = store.load()
    scorer = fit_predictor(space, history, cfg, derive_seed(cfg.seed, "predictor", round_index))
    trials = [
        reinforce_trial(space, scorer, derive_seed(cfg.seed, "searcher", round_index, t), cfg.searcher, trial=t)
        for t in range(cfg.searcher.trials)
    ]
    top = propose_topk(trials, [r.config for r in history], cfg.searcher.top_k)
    log.info("%s: %d proposals after merge, launching %d", label, sum(map(len, trials)), len(top))
    launched = _launch(
        [p.config for p in top], executor, store, label, cfg.parallel, predicted=[p.score for p in top]
    )
    return _round_report(label, launched)


def run_loop(space: SearchSpace, executor: Executor, store: JobStore, cfg: LoopConfig) -> LoopReport:
    run_bootstrap(space, executor, cfg.bootstrap_budget, derive_seed(cfg.seed, "bootstrap"), store, cfg.parallel)
    for r in range(1, cfg.rounds + 1):
        run_round(space, executor, store, cfg, r)
    return loop_report(store.load(), predictor_fits=cfg.rounds)
