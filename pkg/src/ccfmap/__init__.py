"""Canonical correlation forests and per-pixel material mapping."""

from .cca import CcaResult, canonical_correlation, center_columns, one_hot
from .forest import (Forest, ForestParams, Internal, Leaf, deserialize,
                     predict_class, predict_proba, serialize, train_forest)
from .pipeline import MaterialClass, SpectralSample

__all__ = [
    "CcaResult", "canonical_correlation", "center_columns", "one_hot",
    "Forest", "ForestParams", "Internal", "Leaf", "deserialize",
    "predict_class", "predict_proba", "serialize", "train_forest",
    "MaterialClass", "SpectralSample",
]

__version__ = "0.1.0"
