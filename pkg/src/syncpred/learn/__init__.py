"""Native binary classifiers plus evaluation, importance, and model files."""

from __future__ import annotations

import numpy as np

from .boost import BoostModel, boost_proba, boost_raw, train_boost
from .forest import ForestModel, forest_proba, train_forest
from .importance import gini_importance, importance_over_splits
from .metrics import Metrics, metrics_from_predictions
from .net import NetConfig, NetModel, net_proba, train_net
from .serialize import load_model, save_model
from .tree import TreeNode, train_tree, tree_proba, tree_value

__all__ = [
    "CLASSIFIERS",
    "TreeNode",
    "ForestModel",
    "BoostModel",
    "NetConfig",
    "NetModel",
    "Metrics",
    "train_tree",
    "train_forest",
    "train_boost",
    "train_net",
    "train_classifier",
    "tree_proba",
    "tree_value",
    "forest_proba",
    "boost_proba",
    "boost_raw",
    "net_proba",
    "predict_proba",
    "predict",
    "evaluate",
    "metrics_from_predictions",
    "gini_importance",
    "importance_over_splits",
    "save_model",
    "load_model",
]

CLASSIFIERS = ("tree", "forest", "boost", "net")


def train_classifier(kind: str, X, y, rng=None, **cfg):
    """Train one of the four classifier kinds with its standard settings.

    Keyword overrides: tree takes max_features/max_depth; forest adds trees;
    boost takes stages/lr/max_depth/max_features; net takes the NetConfig
    fields (hidden, epochs, lr, batch_size, dropout, bn_momentum).
    """
    if kind == "tree":
        return train_tree(X, y, rng=_as_rng(rng), **cfg)
    if kind == "forest":
        return train_forest(X, y, rng=rng, **cfg)
    if kind == "boost":
        return train_boost(X, y, rng=rng, **cfg)
    if kind == "net":
        config = cfg.pop("config", None)
        if config is None:
            config = NetConfig(**cfg)
        elif cfg:
            raise ValueError("pass either config or field overrides, not both")
        return train_net(X, y, config=config, rng=rng)
    raise ValueError(f"unknown classifier kind {kind!r}, expected one of {CLASSIFIERS}")


def _as_rng(rng):
    return rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng or 0)


def predict_proba(model, x) -> float | np.ndarray:
    """Class-1 probability for one vector or each matrix row, any model kind."""
    if isinstance(model, TreeNode):
        return tree_proba(model, x)
    if isinstance(model, ForestModel):
        return forest_proba(model, x)
    if isinstance(model, BoostModel):
        return boost_proba(model, x)
    if isinstance(model, NetModel):
        return net_proba(model, x)
    raise TypeError(f"cannot predict with a {type(model).__name__}")


def predict(model, x, threshold: float = 0.5):
    """Hard 0/1 label: probability strictly above ``threshold``."""
    p = predict_proba(model, x)
    if np.isscalar(p):
        return bool(p > threshold)
    return (p > threshold).astype(np.int64)


def evaluate(model, X_test, y_test, threshold: float = 0.5) -> Metrics:
    """Confusion counts of thresholded predictions against the truth."""
    return metrics_from_predictions(y_test, predict(model, X_test, threshold=threshold))
