"""Predictor-guided search over distributed-training co-design hyperparameters."""

from .space import ConfigPoint, Dimension, SearchSpace, load_space, parse_space
from .store import JobRecord, JobStore

__all__ = ["ConfigPoint", "Dimension", "SearchSpace", "load_space", "parse_space", "JobRecord", "JobStore"]
__version__ = "0.1.0"
