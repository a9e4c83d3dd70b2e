"""Random forest: bootstrapped gini trees with per-node feature subsampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tree import TreeNode, train_tree, tree_proba

__all__ = ["ForestModel", "train_forest", "forest_proba"]


@dataclass
class ForestModel:
    trees: list[TreeNode]
    n_features: int
    max_features: int


def train_forest(
    X,
    y,
    trees: int = 100,
    rng: np.random.Generator | int | None = None,
    max_features: int | None = None,
    max_depth: int | None = None,
) -> ForestModel:
    """Fit ``trees`` purity-stopped gini trees, each on a bootstrap resample.

    Each node's split searches ``max_features`` (default floor(sqrt(p)))
    uniformly resampled feature indices. Per-tree random streams are spawned
    up front from one parent stream, so training is reproducible regardless
    of any parallel scheduling of the tree fits.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if trees < 1:
        raise ValueError("trees must be >= 1")
    p = X.shape[1]
    mf = max_features if max_features is not None else max(1, int(np.sqrt(p)))
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng or 0)
    seeds = rng.integers(0, 2**63 - 1, size=trees)
    grown = []
    m = X.shape[0]
    for t in range(trees):
        tr_rng = np.random.default_rng(int(seeds[t]))
        rows = tr_rng.integers(0, m, size=m)
        grown.append(train_tree(X[rows], y[rows], max_features=mf, rng=tr_rng, max_depth=max_depth))
    return ForestModel(trees=grown, n_features=p, max_features=mf)


def forest_proba(model: ForestModel, x) -> float | np.ndarray:
    """Mean of per-tree leaf class-1 probabilities."""
    acc = None
    for node in model.trees:
        p = tree_proba(node, x)
        acc = p if acc is None else acc + p
    out = acc / len(model.trees)
    return out
