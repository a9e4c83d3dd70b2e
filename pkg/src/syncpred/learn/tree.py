"""Native CART trees: gini classification and squared-error regression."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["TreeNode", "train_tree", "tree_proba", "tree_value"]


@dataclass
class TreeNode:
    """One tree node; ``feature is None`` marks a leaf.

    Leaves carry either a class-probability pair (classification) or a scalar
    ``value`` (regression). ``n_samples`` and ``impurity`` are kept from
    training for importance accounting.
    """

    n_samples: int
    impurity: float
    feature: int | None = None
    threshold: float | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    proba: tuple[float, float] | None = None
    value: float | None = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None


def _gini(count1: int, m: int) -> float:
    p1 = count1 / m
    return float(1.0 - p1 * p1 - (1.0 - p1) * (1.0 - p1))


def _best_split_class(X, y, rows, feats):
    """Minimum weighted-gini (feature, threshold); feats must be ascending."""
    m = rows.size
    best = None
    for f in feats:
        v = X[rows, f]
        order = np.argsort(v, kind="stable")
        sv = v[order]
        if sv[0] == sv[-1]:
            continue
        sy = y[rows][order]
        ones = np.cumsum(sy)
        ln = np.arange(1, m)
        rn = m - ln
        l1 = ones[:-1]
        r1 = ones[-1] - l1
        gl = 1.0 - (l1 / ln) ** 2 - ((ln - l1) / ln) ** 2
        gr = 1.0 - (r1 / rn) ** 2 - ((rn - r1) / rn) ** 2
        w = (ln * gl + rn * gr) / m
        w[sv[1:] <= sv[:-1]] = np.inf
        j = int(np.argmin(w))
        if not np.isfinite(w[j]):
            continue
        if best is None or w[j] < best[0]:
            thr = (sv[j] + sv[j + 1]) / 2.0
            if thr >= sv[j + 1]:  # midpoint rounded up between adjacent floats
                thr = float(sv[j])
            best = (float(w[j]), int(f), float(thr))
    return best


def _best_split_reg(X, y, rows, feats):
    """Minimum total squared error (feature, threshold); feats ascending."""
    m = rows.size
    best = None
    for f in feats:
        v = X[rows, f]
        order = np.argsort(v, kind="stable")
        sv = v[order]
        if sv[0] == sv[-1]:
            continue
        sy = y[rows][order]
        s = np.cumsum(sy)
        ss = np.cumsum(sy * sy)
        ln = np.arange(1, m)
        rn = m - ln
        sl = s[:-1]
        sr = s[-1] - sl
        ssl = ss[:-1]
        ssr = ss[-1] - ssl
        sse = (ssl - sl * sl / ln) + (ssr - sr * sr / rn)
        sse[sv[1:] <= sv[:-1]] = np.inf
        j = int(np.argmin(sse))
        if not np.isfinite(sse[j]):
            continue
        if best is None or sse[j] < best[0]:
            thr = (sv[j] + sv[j + 1]) / 2.0
            if thr >= sv[j + 1]:
                thr = float(sv[j])
            best = (float(sse[j]), int(f), float(thr))
    return best


def _grow(X, y, rows, *, regression, allowed, max_features, max_depth, depth, rng):
    m = rows.size
    yr = y[rows]
    if regression:
        mean = float(yr.mean())
        imp = float(yr.var())
        node = TreeNode(n_samples=m, impurity=imp, value=mean)
        pure = m < 2 or imp <= 0.0
    else:
        ones = int(yr.sum())
        node = TreeNode(n_samples=m, impurity=_gini(ones, m), proba=(1.0 - ones / m, ones / m))
        pure = ones in (0, m)
    if pure or (max_depth is not None and depth >= max_depth):
        return node
    finder = _best_split_reg if regression else _best_split_class
    feats = allowed
    subsampled = max_features is not None and max_features < allowed.size
    if subsampled:
        feats = np.sort(rng.choice(allowed, size=max_features, replace=False))
    split = finder(X, y, rows, feats)
    if split is None and subsampled:
        # sampled features were all constant here; fall back to the rest so an
        # impure but separable node never turns into a leaf
        split = finder(X, y, rows, np.setdiff1d(allowed, feats))
    if split is None:
        return node
    _, f, thr = split
    mask = X[rows, f] <= thr
    node.feature, node.threshold = f, thr
    kw = dict(
        regression=regression,
        allowed=allowed,
        max_features=max_features,
        max_depth=max_depth,
        depth=depth + 1,
        rng=rng,
    )
    node.left = _grow(X, y, rows[mask], **kw)
    node.right = _grow(X, y, rows[~mask], **kw)
    # keep the leaf payload only on leaves
    if not regression:
        node.proba = None
    else:
        node.value = None
    return node


def _check_xy(X, y, classification: bool):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2 or X.shape[0] == 0 or X.shape[1] == 0:
        raise ValueError("X must be a nonempty 2-d matrix")
    if y.shape != (X.shape[0],):
        raise ValueError("y length must match X rows")
    if classification:
        y = y.astype(np.int64)
        if not np.isin(y, (0, 1)).all():
            raise ValueError("labels must be 0/1")
    else:
        y = y.astype(np.float64)
    return X, y


def train_tree(
    X,
    y,
    max_features: int | None = None,
    rng: np.random.Generator | None = None,
    max_depth: int | None = None,
    regression: bool = False,
    allowed_features: np.ndarray | None = None,
) -> TreeNode:
    """Grow a CART tree to purity (or ``max_depth``).

    Splits minimize weighted gini impurity (classification) or total squared
    error (regression) over midpoint thresholds; ties break toward the lowest
    feature index, then the lowest threshold. ``max_features`` activates
    per-node uniform feature subsampling; ``allowed_features`` restricts the
    searchable set globally. Growth is depth-first, left child first, so the
    random stream is consumed deterministically.
    """
    X, y = _check_xy(X, y, classification=not regression)
    p = X.shape[1]
    allowed = np.arange(p) if allowed_features is None else np.sort(
        np.asarray(allowed_features, dtype=np.int64)
    )
    if allowed.size == 0 or allowed.min() < 0 or allowed.max() >= p:
        raise ValueError("allowed_features out of range")
    if max_features is not None and not (1 <= max_features <= allowed.size):
        raise ValueError(f"max_features must be in [1, {allowed.size}]")
    rng = rng or np.random.default_rng(0)
    return _grow(
        X,
        y,
        np.arange(X.shape[0]),
        regression=regression,
        allowed=allowed,
        max_features=max_features,
        max_depth=max_depth,
        depth=0,
        rng=rng,
    )


def _route(node: TreeNode, X: np.ndarray, idx: np.ndarray, out: np.ndarray, pick) -> None:
    if node.is_leaf:
        out[idx] = pick(node)
        return
    mask = X[idx, node.feature] <= node.threshold
    _route(node.left, X, idx[mask], out, pick)
    _route(node.right, X, idx[~mask], out, pick)


def _as_matrix(x):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        return x[None, :], True
    if x.ndim == 2:
        return x, False
    raise ValueError("input must be a vector or a matrix")


def tree_proba(node: TreeNode, x) -> float | np.ndarray:
    """Leaf probability of class 1 for one vector or each matrix row."""
    X, single = _as_matrix(x)
    out = np.empty(X.shape[0])
    _route(node, X, np.arange(X.shape[0]), out, lambda n: n.proba[1])
    return float(out[0]) if single else out


def tree_value(node: TreeNode, x) -> float | np.ndarray:
    """Regression leaf value for one vector or each matrix row."""
    X, single = _as_matrix(x)
    out = np.empty(X.shape[0])
    _route(node, X, np.arange(X.shape[0]), out, lambda n: n.value)
    return float(out[0]) if single else out
