"""Surrogate models that score configurations."""

from .gbdt import GbdtConfig, GbdtPredictor, fit_gbdt
from .mlp import (
    DegenerateTargets, EnsemblePredictor, LayoutMismatch, MlpConfig, MlpModel, fit_mlp_ensemble,
    gradient_check,
)
from .optim import AdamState, AmsgradState, NonFiniteGradient, adam_step, amsgrad_step
from .ranking import ranking_loss, ranking_loss_batch

__all__ = [
    "AdamState", "AmsgradState", "DegenerateTargets", "EnsemblePredictor", "GbdtConfig", "GbdtPredictor",
    "LayoutMismatch", "MlpConfig", "MlpModel", "NonFiniteGradient", "adam_step", "amsgrad_step", "fit_gbdt",
    "fit_mlp_ensemble", "gradient_check", "ranking_loss", "ranking_loss_batch",
]
