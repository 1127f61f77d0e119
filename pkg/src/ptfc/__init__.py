"""Bounded-tree-width Bayesian network classifiers as polynomial threshold
functions, with exact and approximate OBDD compilation."""

from .errors import CapabilityError, InputError, PtfcError

__version__ = "0.1.0"

__all__ = ["CapabilityError", "InputError", "PtfcError", "__version__"]
