"""Model files: JSON trees; net weights as raw arrays behind a JSON header.

Every file starts with one JSON line. Tree-based models are that line alone;
a net file appends the concatenated little-endian float64 parameter and
buffer arrays in the order its header lists.
"""

from __future__ import annotations

import json

import numpy as np

from .boost import BoostModel
from .forest import ForestModel
from .net import NetConfig, NetModel
from .tree import TreeNode

__all__ = ["save_model", "load_model"]


def _node_to_dict(node: TreeNode) -> dict:
    d = {"n": node.n_samples, "imp": node.impurity}
    if node.is_leaf:
        if node.proba is not None:
            d["proba"] = list(node.proba)
        else:
            d["value"] = node.value
        return d
    d["feature"] = node.feature
    d["threshold"] = node.threshold
    d["left"] = _node_to_dict(node.left)
    d["right"] = _node_to_dict(node.right)
    return d


def _node_from_dict(d: dict) -> TreeNode:
    node = TreeNode(n_samples=d["n"], impurity=d["imp"])
    if "feature" in d:
        node.feature = d["feature"]
        node.threshold = d["threshold"]
        node.left = _node_from_dict(d["left"])
        node.right = _node_from_dict(d["right"])
    elif "proba" in d:
        node.proba = (d["proba"][0], d["proba"][1])
    else:
        node.value = d["value"]
    return node


def save_model(model, path) -> None:
    if isinstance(model, TreeNode):
        header = {"kind": "tree", "tree": _node_to_dict(model)}
        blob = b""
    elif isinstance(model, ForestModel):
        header = {
            "kind": "forest",
            "n_features": model.n_features,
            "max_features": model.max_features,
            "trees": [_node_to_dict(t) for t in model.trees],
        }
        blob = b""
    elif isinstance(model, BoostModel):
        header = {
            "kind": "boost",
            "n_features": model.n_features,
            "base_score": model.base_score,
            "learning_rate": model.learning_rate,
            "trees": [_node_to_dict(t) for t in model.trees],
        }
        blob = b""
    elif isinstance(model, NetModel):
        fields = sorted(model.params) + sorted(model.buffers)
        arrays = {**model.params, **model.buffers}
        header = {
            "kind": "net",
            "n_features": model.n_features,
            "config": {
                "hidden": model.config.hidden,
                "epochs": model.config.epochs,
                "lr": model.config.lr,
                "batch_size": model.config.batch_size,
                "dropout": model.config.dropout,
                "bn_momentum": model.config.bn_momentum,
                "eps": model.config.eps,
            },
            "dtype": "<f8",
            "fields": [{"name": f, "shape": list(arrays[f].shape)} for f in fields],
        }
        blob = b"".join(np.ascontiguousarray(arrays[f], dtype="<f8").tobytes() for f in fields)
    else:
        raise TypeError(f"cannot save a {type(model).__name__}")
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode())
        fh.write(b"\n")
        fh.write(blob)


def load_model(path):
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode())
        blob = fh.read()
    kind = header.get("kind")
    if kind == "tree":
        return _node_from_dict(header["tree"])
    if kind == "forest":
        return ForestModel(
            trees=[_node_from_dict(t) for t in header["trees"]],
            n_features=header["n_features"],
            max_features=header["max_features"],
        )
    if kind == "boost":
        return BoostModel(
            base_score=header["base_score"],
            learning_rate=header["learning_rate"],
            trees=[_node_from_dict(t) for t in header["trees"]],
            n_features=header["n_features"],
        )
    if kind == "net":
        params: dict[str, np.ndarray] = {}
        buffers: dict[str, np.ndarray] = {}
        offset = 0
        for f in header["fields"]:
            shape = tuple(f["shape"])
            count = int(np.prod(shape)) if shape else 1
            arr = np.frombuffer(
                blob, dtype=header["dtype"], count=count, offset=offset
            ).reshape(shape).copy()
            offset += arr.nbytes
            (buffers if f["name"].startswith("r") else params)[f["name"]] = arr
        if offset != len(blob):
            raise ValueError("net weight blob length mismatch")
        return NetModel(
            config=NetConfig(**header["config"]),
            n_features=header["n_features"],
            params=params,
            buffers=buffers,
        )
    raise ValueError(f"unknown model kind {kind!r} in {path}")
