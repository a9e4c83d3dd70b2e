"""Gradient boosting on logistic loss with shallow regression trees."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tree import TreeNode, train_tree, tree_value

__all__ = ["BoostModel", "train_boost", "boost_proba", "boost_raw"]


@dataclass
class BoostModel:
    base_score: float
    learning_rate: float
    trees: list[TreeNode]
    n_features: int


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))


def train_boost(
    X,
    y,
    stages: int = 100,
    lr: float = 0.4,
    rng: np.random.Generator | int | None = None,
    max_depth: int = 3,
    max_features: int | None = None,
) -> BoostModel:
    """Stagewise logistic-loss boosting.

    The score starts at the empirical log-odds; each stage draws a fresh
    feature subset of size ``max_features`` (default floor(sqrt(p))), fits a
    depth-limited squared-error tree to the residual y - sigmoid(score) on
    those features, and adds ``lr`` times its output to the score.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("X must be a nonempty 2-d matrix")
    if y.shape != (X.shape[0],) or not np.isin(y, (0.0, 1.0)).all():
        raise ValueError("labels must be 0/1 and match X rows")
    if stages < 1 or lr <= 0:
        raise ValueError("need stages >= 1 and lr > 0")
    p = X.shape[1]
    mf = max_features if max_features is not None else max(1, int(np.sqrt(p)))
    if not (1 <= mf <= p):
        raise ValueError(f"max_features must be in [1, {p}]")
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng or 0)
    pbar = float(np.clip(y.mean(), 1e-6, 1.0 - 1e-6))
    base = float(np.log(pbar / (1.0 - pbar)))
    score = np.full(X.shape[0], base)
    grown: list[TreeNode] = []
    for _ in range(stages):
        residual = y - _sigmoid(score)
        feats = np.sort(rng.choice(p, size=mf, replace=False)) if mf < p else None
        node = train_tree(
            X,
            residual,
            regression=True,
            max_depth=max_depth,
            allowed_features=feats,
            rng=rng,
        )
        score += lr * tree_value(node, X)
        grown.append(node)
    return BoostModel(base_score=base, learning_rate=lr, trees=grown, n_features=p)


def boost_raw(model: BoostModel, x) -> float | np.ndarray:
    """Additive score before the sigmoid."""
    acc = model.base_score
    for node in model.trees:
        acc = acc + model.learning_rate * tree_value(node, x)
    return acc


def boost_proba(model: BoostModel, x) -> float | np.ndarray:
    out = _sigmoid(boost_raw(model, x))
    return float(out) if np.isscalar(out) or out.ndim == 0 else out
