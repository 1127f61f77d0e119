"""Additive-model training study over sampled binary classifiers."""

from .errors import InputError, TrainingBackendUnavailable
from .model import LearnedAdditiveModel, distill_quadratic
from .overlap import term_overlap
from .training import fit

__all__ = [
    "InputError",
    "TrainingBackendUnavailable",
    "LearnedAdditiveModel",
    "distill_quadratic",
    "term_overlap",
    "fit",
]
