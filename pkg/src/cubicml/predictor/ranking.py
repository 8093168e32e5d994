"""Pairwise margin ranking loss."""

from __future__ import annotations

import numpy as np


def ranking_loss(score_a: float, score_b: float, label: int, margin: float = 0.001) -> float:
    """max(0, -label * (score_a - score_b) + margin); label is +1 when a should rank above b."""
    if margin < 0:
        raise ValueError("margin must be >= 0")
    return max(0.0, -label * (score_a - score_b) + margin)


def ranking_loss_batch(sa: np.ndarray, sb: np.ndarray, labels: np.ndarray, margin: float):
    """Mean hinge over pairs and its gradient w.r.t. both score vectors.

    The subgradient at the hinge point is taken as 0.
    """
    z = -labels * (sa - sb) + margin
    active = z > 0
    n = len(sa)
    loss = float(np.where(active, z, 0.0).sum() / n)
    g = np.where(active, -labels, 0.0) / n
    return loss, g, -g
