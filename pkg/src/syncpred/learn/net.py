"""Feed-forward classifier: 4 affine layers with batch norm, ReLU, dropout.

Hand-rolled forward/backward on numpy arrays; minibatch SGD on softmax
cross-entropy. Inference always runs with running normalization statistics
and dropout disabled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["NetConfig", "NetModel", "train_net", "net_proba"]

_HIDDEN_BLOCKS = 3


@dataclass(frozen=True)
class NetConfig:
    hidden: int = 100
    epochs: int = 35
    lr: float = 0.01
    batch_size: int = 256
    dropout: float = 0.25
    bn_momentum: float = 0.9
    eps: float = 1e-5

    def validate(self) -> None:
        if self.hidden < 1 or self.batch_size < 1 or self.epochs < 0:
            raise ValueError("hidden/batch_size must be >= 1, epochs >= 0")
        if self.lr <= 0 or not (0 <= self.dropout < 1) or not (0 <= self.bn_momentum < 1):
            raise ValueError("bad lr/dropout/bn_momentum")


@dataclass
class NetModel:
    config: NetConfig
    n_features: int
    params: dict[str, np.ndarray]
    buffers: dict[str, np.ndarray]


def _init_state(p: int, cfg: NetConfig, rng: np.random.Generator):
    """Uniform fan-in init: W, b ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in))."""
    sizes = [p] + [cfg.hidden] * _HIDDEN_BLOCKS + [2]
    params: dict[str, np.ndarray] = {}
    buffers: dict[str, np.ndarray] = {}
    for i in range(1, len(sizes)):
        fan_in, fan_out = sizes[i - 1], sizes[i]
        bound = 1.0 / np.sqrt(fan_in)
        params[f"W{i}"] = rng.uniform(-bound, bound, size=(fan_in, fan_out))
        params[f"b{i}"] = rng.uniform(-bound, bound, size=fan_out)
        if i <= _HIDDEN_BLOCKS:
            params[f"g{i}"] = np.ones(fan_out)
            params[f"be{i}"] = np.zeros(fan_out)
            buffers[f"rm{i}"] = np.zeros(fan_out)
            buffers[f"rv{i}"] = np.ones(fan_out)
    return params, buffers


def _forward(params, buffers, X, cfg, *, batch_stats, drop_rng=None, update_buffers=False):
    """Logits plus the per-block caches the backward pass consumes.

    ``batch_stats`` picks normalization by the current batch (training) versus
    the frozen running statistics (inference or a gradient check).
    """
    a = X
    caches = []
    for i in range(1, _HIDDEN_BLOCKS + 1):
        z = a @ params[f"W{i}"] + params[f"b{i}"]
        if batch_stats:
            mu = z.mean(axis=0)
            var = z.var(axis=0)
            inv = 1.0 / np.sqrt(var + cfg.eps)
            zhat = (z - mu) * inv
            if update_buffers:
                m = cfg.bn_momentum
                buffers[f"rm{i}"] = m * buffers[f"rm{i}"] + (1 - m) * mu
                buffers[f"rv{i}"] = m * buffers[f"rv{i}"] + (1 - m) * var
        else:
            inv = 1.0 / np.sqrt(buffers[f"rv{i}"] + cfg.eps)
            zhat = (z - buffers[f"rm{i}"]) * inv
        zn = params[f"g{i}"] * zhat + params[f"be{i}"]
        h = np.maximum(zn, 0.0)
        mask = None
        if drop_rng is not None and cfg.dropout > 0:
            keep = 1.0 - cfg.dropout
            mask = (drop_rng.random(h.shape) < keep) / keep
            h = h * mask
        caches.append((a, zhat, inv, zn, mask))
        a = h
    logits = a @ params[f"W{_HIDDEN_BLOCKS + 1}"] + params[f"b{_HIDDEN_BLOCKS + 1}"]
    caches.append(a)
    return logits, caches


def _softmax(logits):
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _cross_entropy(logits, y):
    z = logits - logits.max(axis=1, keepdims=True)
    lse = np.log(np.exp(z).sum(axis=1))
    return float(np.mean(lse - z[np.arange(len(y)), y]))


def _loss_and_grads(
    params, buffers, X, y, cfg, *, batch_stats, drop_rng=None, update_buffers=False
):
    """Cross-entropy and its gradient in every parameter.

    With ``batch_stats`` the dependence of the batch statistics on the inputs
    is differentiated exactly; otherwise each normalization is a fixed affine
    map of its input.
    """
    B = X.shape[0]
    logits, caches = _forward(
        params,
        buffers,
        X,
        cfg,
        batch_stats=batch_stats,
        drop_rng=drop_rng,
        update_buffers=update_buffers,
    )
    loss = _cross_entropy(logits, y)
    dlogits = _softmax(logits)
    dlogits[np.arange(B), y] -= 1.0
    dlogits /= B
    grads: dict[str, np.ndarray] = {}
    last = _HIDDEN_BLOCKS + 1
    grads[f"W{last}"] = caches[-1].T @ dlogits
    grads[f"b{last}"] = dlogits.sum(axis=0)
    da = dlogits @ params[f"W{last}"].T
    for i in range(_HIDDEN_BLOCKS, 0, -1):
        a_prev, zhat, inv, zn, mask = caches[i - 1]
        if mask is not None:
            da = da * mask
        dzn = da * (zn > 0)
        grads[f"g{i}"] = (dzn * zhat).sum(axis=0)
        grads[f"be{i}"] = dzn.sum(axis=0)
        dzhat = dzn * params[f"g{i}"]
        if batch_stats:
            dz = (inv / B) * (B * dzhat - dzhat.sum(axis=0) - zhat * (dzhat * zhat).sum(axis=0))
        else:
            dz = dzhat * inv
        grads[f"W{i}"] = a_prev.T @ dz
        grads[f"b{i}"] = dz.sum(axis=0)
        da = dz @ params[f"W{i}"].T
    return loss, grads


def train_net(
    X,
    y,
    config: NetConfig | None = None,
    rng: np.random.Generator | int | None = None,
) -> NetModel:
    """Minibatch SGD for ``config.epochs`` passes over shuffled data.

    One random stream drives initialization, shuffling, and dropout masks in
    a fixed order, so training is reproducible. Stray single-sample batches
    are dropped (their batch variance is degenerate).
    """
    cfg = config or NetConfig()
    cfg.validate()
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("X must be a nonempty 2-d matrix")
    if y.shape != (X.shape[0],) or not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be 0/1 and match X rows")
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng or 0)
    m, p = X.shape
    params, buffers = _init_state(p, cfg, rng)
    for _ in range(cfg.epochs):
        perm = rng.permutation(m)
        for lo in range(0, m, cfg.batch_size):
            batch = perm[lo : lo + cfg.batch_size]
            if batch.size < 2:
                continue
            _, grads = _loss_and_grads(
                params,
                buffers,
                X[batch],
                y[batch],
                cfg,
                batch_stats=True,
                drop_rng=rng,
                update_buffers=True,
            )
            for name, gval in grads.items():
                params[name] -= cfg.lr * gval
    return NetModel(config=cfg, n_features=p, params=params, buffers=buffers)


def net_proba(model: NetModel, x) -> float | np.ndarray:
    """Class-1 probability in inference mode for one vector or each row."""
    X = np.asarray(x, dtype=np.float64)
    single = X.ndim == 1
    if single:
        X = X[None, :]
    if X.shape[1] != model.n_features:
        raise ValueError(f"expected {model.n_features} features, got {X.shape[1]}")
    logits, _ = _forward(model.params, model.buffers, X, model.config, batch_stats=False)
    out = _softmax(logits)[:, 1]
    return float(out[0]) if single else out
