"""Half-circle baseline predictor and the subgraph-ensemble predictor."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset, quartiles
from .dynamics import KM, MODELS, PhaseConfig, Trajectory, is_concentrated
from .graph import Graph, graph_features, sample_connected_subgraph
from .learn import predict_proba, train_classifier

__all__ = [
    "EnsembleParams",
    "baseline_predict",
    "baseline_expected_accuracy",
    "restricted_vector",
    "ensemble_train",
    "ensemble_predict",
    "ensemble_split_evaluate",
    "subgraph_baseline_predict",
]


@dataclass(frozen=True)
class EnsembleParams:
    """Subgraph size, train/test draw counts, and the decision threshold."""

    n0: int
    k_train: int = 1
    k_test: int = 1
    theta: float = 0.5

    def validate(self) -> None:
        if self.n0 < 1 or self.k_train < 1 or self.k_test < 1:
            raise ValueError("n0, k_train, k_test must all be >= 1")
        if not (0.0 < self.theta < 1.0):
            raise ValueError(f"theta must be in (0, 1), got {self.theta}")


def _config_rows(model: str, dynamics: np.ndarray, kappa: int | None):
    """Wrap trajectory matrix rows as phase configs of the model's space."""
    if model == KM:
        return [PhaseConfig.continuous(row) for row in dynamics]
    return [PhaseConfig.discrete(row.astype(np.int64), kappa) for row in dynamics]


def _as_dynamics(traj) -> np.ndarray:
    if isinstance(traj, Trajectory):
        return traj.values_matrix()
    arr = np.asarray(traj)
    if arr.ndim != 2:
        raise ValueError("trajectory must be a (r+1, n) matrix of phases")
    return arr


def baseline_predict(
    model: str, traj, rng: np.random.Generator, kappa: int | None = 5
) -> bool:
    """Half-circle check over iterations 1..r, else a fair coin.

    Returns True as soon as any of X_1..X_r is concentrated (a sound
    certificate of eventual synchronization for the continuous and firefly
    models on connected graphs); otherwise flips the caller's coin. With no
    iterations beyond X_0 the coin decides alone.
    """
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}")
    dynamics = _as_dynamics(traj)
    for config in _config_rows(model, dynamics[1:], kappa):
        if is_concentrated(model, config):
            return True
    return bool(rng.random() < 0.5)


def baseline_expected_accuracy(alpha: float, x: float) -> float:
    """Balanced-data accuracy of the coin-backed half-circle rule: 0.5 + x*alpha/2.

    ``alpha`` is the synchronizing fraction (0.5 when balanced) and ``x`` the
    fraction of synchronizing samples already concentrated by iteration r.
    """
    if not (0.0 <= alpha <= 1.0 and 0.0 <= x <= 1.0):
        raise ValueError("alpha and x must lie in [0, 1]")
    return 0.5 + x * alpha / 2.0


def restricted_vector(
    dynamics: np.ndarray,
    sub: Graph,
    nodes,
    r_used: int,
    with_features: bool,
) -> np.ndarray:
    """Vector for one subgraph restriction, laid out like dataset.vectorize:
    restricted X_0..X_{r_used}, quartiles of restricted X_0, optional features
    of the induced subgraph."""
    nodes = np.asarray(nodes, dtype=np.int64)
    cut = dynamics[: r_used + 1, :][:, nodes].astype(np.float64)
    parts = [cut.ravel(), np.array(quartiles(cut[0]))]
    if with_features:
        parts.append(graph_features(sub).as_array())
    return np.concatenate(parts)


def _sample_graph(ds: Dataset, idx: int) -> Graph:
    g = ds.samples[idx].graph
    if g is None:
        from .dataset import regenerate_graph_and_config

        g, _ = regenerate_graph_and_config(ds.spec, ds.samples[idx])
        ds.samples[idx].graph = g
    return g


def ensemble_train(
    ds: Dataset,
    params: EnsembleParams,
    classifier: str = "net",
    seed: int = 0,
    r_used: int | None = None,
    with_features: bool = False,
    train_indices=None,
    **clf_cfg,
):
    """Train on dynamics restricted to random connected subgraphs.

    Every selected sample contributes ``k_train`` rows: each draws a connected
    ``n0``-node induced subgraph (stream seeded by (seed, sample index)),
    restricts the stored X_0..X_{r_used} to it node-wise, and inherits the
    sample's full-graph label. The configured classifier trains on the union.
    """
    params.validate()
    r_used = ds.spec.r if r_used is None else r_used
    idxs = range(len(ds.samples)) if train_indices is None else train_indices
    rows, labels = [], []
    for i in idxs:
        s = ds.samples[i]
        g = _sample_graph(ds, i)
        if g.n < params.n0:
            raise ValueError(f"sample {i} has {g.n} < n0={params.n0} nodes")
        rng = np.random.default_rng([seed, i])
        for _ in range(params.k_train):
            nodes, sub = sample_connected_subgraph(g, params.n0, rng)
            rows.append(restricted_vector(s.dynamics, sub, nodes, r_used, with_features))
            labels.append(int(s.label))
    X = np.stack(rows)
    y = np.array(labels)
    return train_classifier(classifier, X, y, rng=np.random.default_rng([seed, 1 << 32]), **clf_cfg)


def ensemble_predict(
    model,
    g: Graph,
    dynamics: np.ndarray,
    params: EnsembleParams,
    rng: np.random.Generator,
    r_used: int | None = None,
    with_features: bool = False,
) -> bool:
    """Mean class-1 probability over ``k_test`` subgraph restrictions, then
    1(mean > theta)."""
    params.validate()
    if g.n < params.n0:
        raise ValueError(f"graph has {g.n} < n0={params.n0} nodes")
    dynamics = np.asarray(dynamics)
    r_used = dynamics.shape[0] - 1 if r_used is None else r_used
    probs = []
    for _ in range(params.k_test):
        nodes, sub = sample_connected_subgraph(g, params.n0, rng)
        vec = restricted_vector(dynamics, sub, nodes, r_used, with_features)
        probs.append(float(predict_proba(model, vec)))
    return bool(np.mean(probs) > params.theta)


def ensemble_split_evaluate(
    ds: Dataset,
    params: EnsembleParams,
    classifier: str = "net",
    seed: int = 0,
    r_used: int | None = None,
    with_features: bool = False,
    test_fraction: float = 0.2,
    **clf_cfg,
):
    """One train/test split comparing the ensemble to the pooled half-circle rule.

    Both predictors see the same ``k_test`` subgraph views of each held-out
    sample. Returns (ensemble Metrics, subgraph-baseline Metrics). All random
    streams derive from ``seed``, so the outcome is reproducible.
    """
    from .learn import metrics_from_predictions

    params.validate()
    if not (0 < test_fraction < 1):
        raise ValueError("test_fraction must be in (0, 1)")
    r_used = ds.spec.r if r_used is None else r_used
    m = len(ds.samples)
    n_test = max(1, int(round(m * test_fraction)))
    if n_test >= m:
        raise ValueError("test fraction leaves no training rows")
    perm = np.random.default_rng([seed, 0]).permutation(m)
    test_idx, train_idx = perm[:n_test], perm[n_test:]
    model = ensemble_train(
        ds,
        params,
        classifier=classifier,
        seed=seed,
        r_used=r_used,
        with_features=with_features,
        train_indices=train_idx,
        **clf_cfg,
    )
    kappa = None if ds.spec.model == KM else ds.spec.kappa
    y_true, y_ens, y_base = [], [], []
    for i in test_idx:
        s = ds.samples[int(i)]
        g = _sample_graph(ds, int(i))
        views_rng = np.random.default_rng([seed, 1, int(i)])
        views = [sample_connected_subgraph(g, params.n0, views_rng) for _ in range(params.k_test)]
        probs = [
            float(predict_proba(model, restricted_vector(s.dynamics, sub, nodes, r_used, with_features)))
            for nodes, sub in views
        ]
        y_ens.append(int(np.mean(probs) > params.theta))
        restricted = [s.dynamics[: r_used + 1][:, np.asarray(nodes)] for nodes, _ in views]
        coin_rng = np.random.default_rng([seed, 2, int(i)])
        y_base.append(int(subgraph_baseline_predict(ds.spec.model, restricted, coin_rng, kappa)))
        y_true.append(int(s.label))
    return (
        metrics_from_predictions(y_true, y_ens),
        metrics_from_predictions(y_true, y_base),
    )


def subgraph_baseline_predict(
    model: str,
    restricted_dynamics: list[np.ndarray],
    rng: np.random.Generator,
    kappa: int | None = 5,
) -> bool:
    """Half-circle check on the pooled phases of several subgraph views.

    At each iteration 1..r the phase values observed across all restrictions
    are pooled into one multiset; concentration of any pooled snapshot
    predicts synchronization, otherwise a fair coin decides.
    """
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}")
    if not restricted_dynamics:
        raise ValueError("need at least one restricted trajectory")
    mats = [np.asarray(m) for m in restricted_dynamics]
    depth = {m.shape[0] for m in mats}
    if len(depth) != 1:
        raise ValueError("restricted trajectories must share their iteration count")
    r_plus_1 = depth.pop()
    for t in range(1, r_plus_1):
        pooled = np.concatenate([m[t] for m in mats])
        config = (
            PhaseConfig.continuous(pooled)
            if model == KM
            else PhaseConfig.discrete(pooled.astype(np.int64), kappa)
        )
        if is_concentrated(model, config):
            return True
    return bool(rng.random() < 0.5)
