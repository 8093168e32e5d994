"""REINFORCE search over a factorized categorical policy, plus random search."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .predictor.optim import AdamState, adam_step
from .space import ConfigPoint, SearchSpace


@dataclass
class SearcherConfig:
    trials: int = 3
    samples_per_trial: int = 2000
    batch: int = 30
    lr: float = 0.01
    top_k: int = 50
    baseline_decay: float = 0.9

    @classmethod
    def from_dict(cls, doc: dict) -> "SearcherConfig":
        return cls(**{k: v for k, v in doc.items() if k in cls.__dataclass_fields__})


@dataclass
class PolicyState:
    """One logit vector per dimension; the joint policy is their product."""

    logits: list[np.ndarray]
    lr: float = 0.01
    baseline_decay: float = 0.9
    baseline: float | None = None
    adam: AdamState = None  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.adam is None:
            self.adam = AdamState.zeros_like(self.logits)

    @classmethod
    def uniform(cls, space: SearchSpace, lr: float = 0.01, baseline_decay: float = 0.9) -> "PolicyState":
        return cls([np.zeros(s) for s in space.sizes], lr, baseline_decay)

    def probabilities(self) -> list[np.ndarray]:
        out = []
        for z in self.logits:
            e = np.exp(z - z.max())
            out.append(e / e.sum())
        return out


def sample_indices(policy: PolicyState, rng: np.random.Generator, n: int) -> np.ndarray:
    probs = policy.probabilities()
    if not probs:
        return np.zeros((n, 0), dtype=np.int64)
    cols = []
    for p in probs:
        # inverse-CDF draw; keeps the stream layout independent of the probabilities
        u = rng.random(n)
        cols.append(np.minimum(np.searchsorted(np.cumsum(p), u, side="right"), len(p) - 1))
    return np.stack(cols, axis=1).astype(np.int64)


def policy_sample(policy: PolicyState, space: SearchSpace, rng: np.random.Generator) -> ConfigPoint:
    return space.from_indices(sample_indices(policy, rng, 1)[0])


def policy_update(policy: PolicyState, indices: np.ndarray, rewards: Sequence[float]) -> None:
    """REINFORCE step: ascend mean (reward - baseline) * grad log pi, via Adam.

    The baseline starts at the first batch's mean reward and then follows an
    exponential moving average. A batch with zero advantage everywhere leaves
    the policy (and the optimizer state) untouched.
    """
    rewards = np.asarray(rewards, dtype=float)
    indices = np.atleast_2d(np.asarray(indices, dtype=np.int64))
    if not np.isfinite(rewards).all():
        raise FloatingPointError("non-finite reward in policy update")
    if len(rewards) != len(indices):
        raise ValueError("indices and rewards differ in length")
    if policy.baseline is None:
        policy.baseline = float(rewards.mean())
    adv = rewards - policy.baseline
    policy.baseline = policy.baseline_decay * policy.baseline + (1 - policy.baseline_decay) * float(rewards.mean())
    if not adv.any():
        return
    grads = []
    for d, p in enumerate(policy.probabilities()):
        onehot = np.zeros((len(adv), len(p)))
        onehot[np.arange(len(adv)), indices[:, d]] = 1.0
        # descent on the negated objective
        grads.append(-((onehot - p) * adv[:, None]).mean(axis=0))
    adam_step(policy.logits, grads, policy.adam, policy.lr)


@dataclass(frozen=True)
class SearchProposal:
    config: ConfigPoint
    score: float
    trial_seed: int
    sample_index: int
    trial: int = 0


class Scorer:
    """Scores value-index matrices with a fitted predictor in its own encoding."""

    def __init__(self, space: SearchSpace, predictor, encoding: str = "onehot"):
        self.space = space
        self.predictor = predictor
        self.encoding = encoding

    def features(self, idx: np.ndarray) -> np.ndarray:
        if self.encoding == "onehot":
            return self.space.onehot_from_indices(idx)
        if self.encoding == "mixed":
            return self.space.mixed_from_indices(idx)
        raise ValueError(f"unknown encoding {self.encoding!r}")

    def __call__(self, idx: np.ndarray) -> np.ndarray:
        return np.asarray(self.predictor.predict(self.features(idx)), dtype=float)


def reinforce_trial(
    space: SearchSpace,
    score: Callable[[np.ndarray], np.ndarray],
    seed: int,
    config: SearcherConfig | None = None,
    trial: int = 0,
) -> list[SearchProposal]:
    """Sample ``samples_per_trial`` configs, updating the policy after every batch."""
    cfg = config or SearcherConfig()
    rng = np.random.default_rng(seed)
    policy = PolicyState.uniform(space, cfg.lr, cfg.baseline_decay)
    proposals: list[SearchProposal] = []
    done = 0
    while done < cfg.samples_per_trial:
        n = min(cfg.batch, cfg.samples_per_trial - done)
        idx = sample_indices(policy, rng, n)
        rewards = score(idx)
        for k in range(n):
            proposals.append(SearchProposal(space.from_indices(idx[k]), float(rewards[k]), seed, done + k, trial))
        policy_update(policy, idx, rewards)
        done += n
    return proposals


def propose_topk(
    trials: Sequence[Sequence[SearchProposal]],
    history: Iterable[ConfigPoint],
    k: int = 50,
) -> list[SearchProposal]:
    """Best ``k`` novel, distinct proposals by predicted score.

    Duplicates keep their best score; ties go to the earlier trial, then the
    earlier sample.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    seen = {c.key() for c in history}
    best: dict[tuple, SearchProposal] = {}
    for proposals in trials:
        for p in proposals:
            key = p.config.key()
            if key in seen:
                continue
            cur = best.get(key)
            if cur is None or (-p.score, p.trial, p.sample_index) < (-cur.score, cur.trial, cur.sample_index):
                best[key] = p
    ranked = sorted(best.values(), key=lambda p: (-p.score, p.trial, p.sample_index))
    return ranked[:k]


def random_search(space: SearchSpace, budget: int, seed: int) -> list[ConfigPoint]:
    if budget < 1:
        raise ValueError("budget must be >= 1")
    rng = np.random.default_rng(seed)
    return [space.from_indices(row) for row in space.sample_indices(rng, budget)]
