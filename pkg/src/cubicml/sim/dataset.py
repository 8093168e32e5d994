"""Synthetic job histories and the exhaustive ground-truth oracle."""

from __future__ import annotations

from typing import Callable

import numpy as np

from ..space import ConfigPoint, SearchSpace
from ..store import JobRecord

TIMESTAMP_POLICIES = ("uniform", "scale-correlated")
MAX_EXHAUSTIVE = 100_000


class OracleError(ValueError):
    pass


def _timestamps(scales: np.ndarray, policy: str, span_days: float, correlation: float, rng) -> np.ndarray:
    u = rng.uniform(size=len(scales))
    if policy == "uniform":
        return np.sort(u) * span_days
    # smaller jobs earlier: blend the log-scale rank with uniform jitter
    ls = np.log2(scales)
    lo, hi = ls.min(), ls.max()
    pos = (ls - lo) / (hi - lo) if hi > lo else np.zeros_like(ls)
    return (correlation * pos + (1.0 - correlation) * u) * span_days


def generate_dataset(
    space: SearchSpace,
    executor,
    count: int,
    seed: int,
    timestamp_policy: str = "uniform",
    failure_rate: float = 0.0,
    span_days: float = 180.0,
    scale_correlation: float = 0.7,
    scale_of: Callable[[ConfigPoint], int] | None = None,
    max_draws: int | None = None,
) -> list[JobRecord]:
    """``count`` executed jobs in timestamp order.

    Configs are drawn uniformly and kept only if the noise-free job would
    complete, except that a ``failure_rate`` fraction of slots is filled with
    jobs that fail. ``scale_of`` gives each config's scale (default: the record
    scale reported by the executor at timestamp 0).
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if timestamp_policy not in TIMESTAMP_POLICIES:
        raise ValueError(f"timestamp policy must be one of {TIMESTAMP_POLICIES}")
    if not 0 <= failure_rate < 1:
        raise ValueError("failure_rate must be in [0, 1)")
    rng = np.random.default_rng(seed)
    n_fail = int(round(failure_rate * count))
    want_fail = np.zeros(count, dtype=bool)
    want_fail[rng.choice(count, size=n_fail, replace=False)] = True
    ok: list[ConfigPoint] = []
    bad: list[ConfigPoint] = []
    draws, limit = 0, max_draws or 1000 * count
    while len(ok) < count - n_fail or len(bad) < n_fail:
        if draws >= limit:
            raise OracleError(f"could not find enough configs after {draws} draws")
        draws += 1
        cfg = space.from_indices(space.sample_indices(rng, 1)[0])
        rec = executor.execute(cfg, 0.0)
        if rec.completed and len(ok) < count - n_fail:
            ok.append(cfg)
        elif not rec.completed and len(bad) < n_fail:
            bad.append(cfg)
    configs, ok_it, bad_it = [], iter(ok), iter(bad)
    for f in want_fail:
        configs.append(next(bad_it) if f else next(ok_it))
    if scale_of is None:
        scales = np.array([executor.execute(c, 0.0).scale or 1 for c in configs], dtype=float)
    else:
        scales = np.array([scale_of(c) for c in configs], dtype=float)
    ts = _timestamps(scales, timestamp_policy, span_days, scale_correlation, rng)
    order = np.argsort(ts, kind="stable")
    return [executor.execute(configs[i], float(ts[i]), "dataset") for i in order]


def exhaustive_optimum(space: SearchSpace, executor) -> tuple[ConfigPoint, float]:
    """Best completed config by full enumeration; the first in canonical order wins ties.

    Pass an executor with noise switched off for a ground-truth optimum.
    """
    n = space.cardinality()
    if n > MAX_EXHAUSTIVE:
        raise OracleError(f"space has {n} configs, exhaustive search is limited to {MAX_EXHAUSTIVE}")
    best, best_metric = None, -np.inf
    for cfg in space.enumerate():
        rec = executor.execute(cfg)
        if rec.completed and rec.metric > best_metric:
            best, best_metric = cfg, rec.metric
    if best is None:
        raise OracleError("no config in the space completes")
    return best, float(best_metric)
