"""Bags of projected nearest neighbours: bagged kNN on per-model discriminant subspaces."""

from .classifier import BOPNNClassifier
from .ensemble import HyperParams
from .persist import load_model, save_model
from .tuning import TuneResult, VariantClassifier, fit_variant, loocv_k, plugin_pi_b, tune

__all__ = [
    "BOPNNClassifier",
    "HyperParams",
    "TuneResult",
    "VariantClassifier",
    "fit_variant",
    "load_model",
    "loocv_k",
    "plugin_pi_b",
    "save_model",
    "tune",
]

__version__ = "0.1.0"
