"""Impurity-decrease feature importance for the tree ensembles."""

from __future__ import annotations

import numpy as np

from .boost import BoostModel
from .forest import ForestModel
from .tree import TreeNode

__all__ = ["gini_importance", "importance_over_splits"]


def _accumulate(node: TreeNode, total: int, acc: np.ndarray) -> None:
    if node.is_leaf:
        return
    drop = node.impurity - (
        node.left.n_samples / node.n_samples * node.left.impurity
        + node.right.n_samples / node.n_samples * node.right.impurity
    )
    acc[node.feature] += (node.n_samples / total) * drop
    _accumulate(node.left, total, acc)
    _accumulate(node.right, total, acc)


def gini_importance(model) -> np.ndarray:
    """Per-feature impurity decrease, node-fraction weighted, tree-averaged.

    The result is normalized to sum 1 (an all-stump model with no splits
    yields the uniform vector). Only tree ensembles carry importances.
    """
    if isinstance(model, ForestModel):
        trees, p = model.trees, model.n_features
    elif isinstance(model, BoostModel):
        trees, p = model.trees, model.n_features
    else:
        raise TypeError(f"no impurity importances for {type(model).__name__}")
    acc = np.zeros(p)
    for root in trees:
        _accumulate(root, root.n_samples, acc)
    acc /= len(trees)
    s = acc.sum()
    return acc / s if s > 0 else np.full(p, 1.0 / p)


def importance_over_splits(
    X,
    y,
    train_fn,
    n_splits: int = 50,
    test_fraction: float = 0.2,
    rng: np.random.Generator | int | None = None,
) -> np.ndarray:
    """Importance distribution across repeated random train/test splits.

    Each split shuffles the rows, holds out ``test_fraction``, trains via
    ``train_fn(X_train, y_train, split_rng)``, and records gini_importance.
    Returns an (n_splits, p) matrix for quartile/whisker summaries.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if not (0 < test_fraction < 1):
        raise ValueError("test_fraction must be in (0, 1)")
    if n_splits < 1:
        raise ValueError("n_splits must be >= 1")
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng or 0)
    m = X.shape[0]
    n_test = max(1, int(round(m * test_fraction)))
    if n_test >= m:
        raise ValueError("test fraction leaves no training rows")
    rows = []
    for _ in range(n_splits):
        perm = rng.permutation(m)
        train_idx = perm[n_test:]
        model = train_fn(X[train_idx], y[train_idx], rng)
        rows.append(gini_importance(model))
    return np.stack(rows)
