"""First-order optimizers over lists of numpy parameter arrays."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import kernels


class NonFiniteGradient(FloatingPointError):
    pass


def _check_finite(grads, where: str) -> None:
    for k, g in enumerate(grads):
        if not np.isfinite(g).all():
            bad = int(np.size(g) - np.count_nonzero(np.isfinite(g)))
            raise NonFiniteGradient(f"{where}: parameter {k} has {bad} non-finite gradient entries")


@dataclass
class AmsgradState:
    m: list[np.ndarray]
    v: list[np.ndarray]
    v_hat: list[np.ndarray]
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros_like(cls, params, **kw) -> "AmsgradState":
        z = lambda: [np.zeros_like(p, dtype=float) for p in params]  # noqa: E731
        return cls(z(), z(), z(), **kw)


def amsgrad_step(params, grads, state: AmsgradState, lr: float, weight_decay: float = 0.0) -> None:
    """One in-place AMSGrad update with coupled L2 weight decay.

    Only the first moment is bias-corrected; the step divides by the running
    maximum of the raw second moment.
    """
    if lr <= 0:
        raise ValueError("lr must be > 0")
    _check_finite(grads, "amsgrad_step")
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    corr1 = 1.0 - b1**state.t
    for p, g, m, v, vh in zip(params, grads, state.m, state.v, state.v_hat):
        kernels.amsgrad_update(
            p.reshape(-1), np.ascontiguousarray(g, dtype=float).reshape(-1),
            m.reshape(-1), v.reshape(-1), vh.reshape(-1),
            lr, weight_decay, b1, b2, state.eps, corr1,
        )


@dataclass
class AdamState:
    m: list[np.ndarray]
    v: list[np.ndarray]
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros_like(cls, params, **kw) -> "AdamState":
        return cls([np.zeros_like(p, dtype=float) for p in params], [np.zeros_like(p, dtype=float) for p in params], **kw)


def adam_step(params, grads, state: AdamState, lr: float) -> None:
    """In-place Adam descent step (negate gradients for ascent)."""
    _check_finite(grads, "adam_step")
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1**state.t
    c2 = 1.0 - b2**state.t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        p -= lr * (m / c1) / (np.sqrt(v / c2) + state.eps)
