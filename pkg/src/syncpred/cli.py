"""Command-line front end: dataset generation, training, reports.

Five commands, each a pure function of (config, seed) to output bytes:

``gen``         build a balanced dataset, write manifest + dynamics CSV
``train-eval``  stratified k-fold CV metrics per classifier/r/feature mode
``ensemble``    subgraph-ensemble vs pooled-baseline sweep over k and r
``importance``  per-split per-feature impurity importances
``demo``        three models on one lattice-plus-shortcuts graph, shared start

Shared flags: ``--config PATH`` (JSON object; keys below), ``--seed U64``,
``--out DIR``, ``--set key=value`` (repeatable, dotted paths, JSON values).
Precedence: defaults < config file < --set < --seed. Unknown keys are
rejected. Every output file embeds the resolved config and seed: CSVs carry
leading ``#`` comment lines, the dataset manifest a "run" block. Exit code 0
on success; failures print one JSON line to stderr and exit nonzero.

Config keys (defaults in _DEFAULTS):

gen: name, model (km|fca|ghm), source (kind nws: n,k,p,passes,p_jitter |
  kind toy: sync,nonsync,n,tree_max_degree,tree_seed; scalars or [lo,hi]
  ranges), r, horizon, samples_per_class, include_graph_features, kappa,
  km {coupling, step}, budget_factor, seed.
train-eval: dataset (manifest path or its prefix), classifiers,
  r_values (null = dataset r), feature_modes (dynamics | dynamics+features |
  features), folds, out_name, classifier_options ({classifier: kwargs}), seed.
ensemble: dataset, classifier, n0, k_values, k_train (null = swept k),
  r_values (null = dataset r), theta, with_features, test_fraction, out_name,
  classifier_options (kwargs), seed.
importance: dataset, classifier (forest|boost), splits, r (null = dataset r),
  feature_mode, test_fraction, out_name, classifier_options (kwargs), seed.
demo: rows, cols, extra_edges, kappa, horizon, km {coupling, step}, seed.
"""

from __future__ import annotations

import argparse
import copy
import csv
import itertools
import json
import os
import sys

import numpy as np

from .dataset import (
    BudgetExhaustedError,
    Dataset,
    build_balanced_dataset,
    kfold_split,
    load_dataset,
    save_dataset,
    spec_from_dict,
    _csv_header,
)
from .dynamics import (
    KM,
    MODELS,
    TWO_PI,
    KmParams,
    PhaseConfig,
    simulate,
    write_trajectory_csv,
)
from .graph import FEATURE_NAMES, Graph, lattice_graph
from .learn import (
    CLASSIFIERS,
    importance_over_splits,
    metrics_from_predictions,
    predict,
    train_classifier,
)
from .predict import EnsembleParams, baseline_predict, ensemble_split_evaluate

__all__ = ["main"]

FEATURE_MODES = ("dynamics", "dynamics+features", "features")

_NWS_SOURCE = {"kind": "nws", "n": 30, "k": 2, "p": 0.85, "passes": 1, "p_jitter": 0.0}
_TOY_SOURCE = {
    "kind": "toy",
    "sync": "tree",
    "nonsync": "ring",
    "n": 15,
    "tree_max_degree": 4,
    "tree_seed": 0,
}
_SOURCES = {"nws": _NWS_SOURCE, "toy": _TOY_SOURCE}

_DEFAULTS: dict[str, dict] = {
    "gen": {
        "name": "dataset",
        "model": "ghm",
        "source": _NWS_SOURCE,
        "r": 4,
        "horizon": 70,
        "samples_per_class": 100,
        "include_graph_features": True,
        "kappa": 5,
        "km": {"coupling": 1.0, "step": 0.05},
        "budget_factor": 50,
        "seed": 0,
    },
    "train-eval": {
        "dataset": "",
        "classifiers": list(CLASSIFIERS),
        "r_values": None,
        "feature_modes": ["dynamics", "dynamics+features"],
        "folds": 5,
        "out_name": "metrics.csv",
        "classifier_options": {},
        "seed": 0,
    },
    "ensemble": {
        "dataset": "",
        "classifier": "net",
        "n0": 30,
        "k_values": [1, 2, 4, 8],
        "k_train": None,
        "r_values": None,
        "theta": 0.5,
        "with_features": False,
        "test_fraction": 0.2,
        "out_name": "ensemble.csv",
        "classifier_options": {},
        "seed": 0,
    },
    "importance": {
        "dataset": "",
        "classifier": "boost",
        "splits": 50,
        "r": None,
        "feature_mode": "dynamics+features",
        "test_fraction": 0.2,
        "out_name": "importance.csv",
        "classifier_options": {},
        "seed": 0,
    },
    "demo": {
        "rows": 20,
        "cols": 20,
        "extra_edges": 80,
        "kappa": 5,
        "horizon": 60,
        "km": {"coupling": 1.0, "step": 0.05},
        "seed": 0,
    },
}


class CliError(Exception):
    """User-facing failure; the message becomes the machine-readable line."""


# ----------------------------------------------------------------------------
# Config resolution
# ----------------------------------------------------------------------------


def _parse_set_value(raw: str):
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def _apply_set(raw_user: dict, entry: str) -> None:
    if "=" not in entry:
        raise CliError(f"--set needs key=value, got {entry!r}")
    key, _, value = entry.partition("=")
    parts = key.split(".")
    node = raw_user
    for part in parts[:-1]:
        child = node.setdefault(part, {})
        if not isinstance(child, dict):
            raise CliError(f"cannot set {key!r}: {part!r} is not an object")
        node = child
    node[parts[-1]] = _parse_set_value(value)


def _deep_merge(defaults: dict, override: dict, path: tuple[str, ...]) -> dict:
    out = copy.deepcopy(defaults)
    for key, val in override.items():
        if key not in defaults:
            dotted = ".".join(path + (str(key),))
            raise CliError(f"unknown config key {dotted!r}")
        cur = defaults[key]
        # non-empty dict defaults define a closed sub-schema; empty ones
        # (free-form classifier kwargs) accept anything
        if isinstance(cur, dict) and cur and isinstance(val, dict):
            out[key] = _deep_merge(cur, val, path + (str(key),))
        else:
            out[key] = copy.deepcopy(val)
    return out


def resolve_config(command: str, config_path, set_entries, seed) -> dict:
    """Defaults <- config file <- --set entries <- --seed flag; strict keys."""
    raw_user: dict = {}
    if config_path is not None:
        try:
            with open(config_path) as fh:
                raw_user = json.load(fh)
        except FileNotFoundError:
            raise CliError(f"config file not found: {config_path}")
        except json.JSONDecodeError as e:
            raise CliError(f"config file is not valid JSON: {e}")
        if not isinstance(raw_user, dict):
            raise CliError("config file must hold a JSON object")
    for entry in set_entries or ():
        _apply_set(raw_user, entry)
    defaults = copy.deepcopy(_DEFAULTS[command])
    if command == "gen":
        kind = raw_user.get("source", {}).get("kind", defaults["source"]["kind"])
        if kind not in _SOURCES:
            raise CliError(f"unknown source kind {kind!r}, expected nws or toy")
        defaults["source"] = copy.deepcopy(_SOURCES[kind])
    cfg = _deep_merge(defaults, raw_user, ())
    if seed is not None:
        cfg["seed"] = seed
    if not isinstance(cfg["seed"], int) or not (0 <= cfg["seed"] < 2**64):
        raise CliError(f"seed must be an integer in [0, 2**64), got {cfg['seed']!r}")
    return cfg


def _run_comments(command: str, cfg: dict) -> list[str]:
    return [
        f"command: {command}",
        f"seed: {cfg['seed']}",
        "config: " + json.dumps(cfg, sort_keys=True),
    ]


def _write_csv(path, header, rows, comments) -> None:
    with open(path, "w", newline="\n") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _metric_cells(m) -> list[str]:
    return [_cell(m.accuracy), _cell(m.precision), _cell(m.recall)]


# ----------------------------------------------------------------------------
# Shared dataset plumbing
# ----------------------------------------------------------------------------


def _load_dataset(path_or_prefix: str) -> Dataset:
    if not path_or_prefix:
        raise CliError("config key 'dataset' must name a dataset manifest")
    path = str(path_or_prefix)
    if not path.endswith(".manifest.json"):
        path += ".manifest.json"
    if not os.path.exists(path):
        raise CliError(f"dataset manifest not found: {path}")
    return load_dataset(path)


def _dataset_label(ds: Dataset, path: str) -> str:
    if ds.spec.name:
        return ds.spec.name
    base = os.path.basename(str(path))
    return base[: -len(".manifest.json")] if base.endswith(".manifest.json") else base


def _matrix_for_mode(ds: Dataset, r_used: int, mode: str) -> np.ndarray:
    if mode == "dynamics":
        return ds.matrix(r_used=r_used, with_features=False)
    if mode == "dynamics+features":
        return ds.matrix(r_used=r_used, with_features=True)
    if mode == "features":
        return np.stack([s.features.as_array() for s in ds.samples]).astype(np.float64)
    raise CliError(f"unknown feature mode {mode!r}, expected one of {FEATURE_MODES}")


def _column_names(n: int, r_used: int, mode: str) -> list[str]:
    if mode == "features":
        return list(FEATURE_NAMES)
    return _csv_header(n, r_used, with_features=(mode == "dynamics+features"))


def _check_r_values(r_values, spec_r: int) -> list[int]:
    out = []
    for r in r_values:
        if not isinstance(r, int) or not (0 <= r <= spec_r):
            raise CliError(f"r value {r!r} outside the stored range [0, {spec_r}]")
        out.append(r)
    return out


# ----------------------------------------------------------------------------
# Commands
# ----------------------------------------------------------------------------


def cmd_gen(cfg: dict, out_dir: str) -> None:
    spec_dict = {
        "model": cfg["model"],
        "source": cfg["source"],
        "r": cfg["r"],
        "horizon": cfg["horizon"],
        "samples_per_class": cfg["samples_per_class"],
        "include_graph_features": cfg["include_graph_features"],
        "kappa": cfg["kappa"],
        "seed": cfg["seed"],
        "km": cfg["km"],
        "name": cfg["name"],
    }
    spec = spec_from_dict(spec_dict)
    ds = build_balanced_dataset(spec, budget_factor=cfg["budget_factor"])
    manifest_path, csv_path = save_dataset(
        ds,
        out_dir,
        cfg["name"],
        csv_comments=_run_comments("gen", cfg),
        manifest_extra={"command": "gen", "seed": cfg["seed"], "config": cfg},
    )
    y = ds.labels()
    edges = np.array([s.features.num_edges for s in ds.samples], dtype=np.float64)
    print(f"wrote {manifest_path} and {csv_path}")
    print(f"class counts: 1={int(y.sum())} 0={int((1 - y).sum())}")
    for tag, mask in (("all", np.ones_like(y, bool)), ("class 1", y == 1), ("class 0", y == 0)):
        sel = edges[mask]
        print(f"edges ({tag}): mean={sel.mean():.4f} std={sel.std():.4f}")


def cmd_train_eval(cfg: dict, out_dir: str) -> None:
    ds = _load_dataset(cfg["dataset"])
    label = _dataset_label(ds, cfg["dataset"])
    seed = cfg["seed"]
    r_values = _check_r_values(cfg["r_values"] or [ds.spec.r], ds.spec.r)
    for clf in cfg["classifiers"]:
        if clf not in CLASSIFIERS:
            raise CliError(f"unknown classifier {clf!r}, expected one of {CLASSIFIERS}")
    for mode in cfg["feature_modes"]:
        if mode not in FEATURE_MODES:
            raise CliError(f"unknown feature mode {mode!r}, expected one of {FEATURE_MODES}")
    y = ds.labels()
    folds = kfold_split(y, folds=cfg["folds"], rng=np.random.default_rng([seed, 2]))
    kappa = None if ds.spec.model == KM else ds.spec.kappa
    rows = []
    for r in r_values:
        for mode in cfg["feature_modes"]:
            X = _matrix_for_mode(ds, r, mode)
            for clf in cfg["classifiers"]:
                y_pred = np.empty(y.size, dtype=np.int64)
                for f, (train_idx, test_idx) in enumerate(folds):
                    rng = np.random.default_rng(
                        [seed, 0, CLASSIFIERS.index(clf), r, FEATURE_MODES.index(mode), f]
                    )
                    options = cfg["classifier_options"].get(clf, {})
                    model = train_classifier(clf, X[train_idx], y[train_idx], rng=rng, **options)
                    y_pred[test_idx] = predict(model, X[test_idx])
                m = metrics_from_predictions(y, y_pred)
                rows.append([label, clf, str(r), mode] + _metric_cells(m))
        coin = np.random.default_rng([seed, 1, r])
        y_base = [
            int(baseline_predict(ds.spec.model, s.dynamics[: r + 1], coin, kappa))
            for s in ds.samples
        ]
        m = metrics_from_predictions(y, y_base)
        rows.append([label, "baseline", str(r), "dynamics"] + _metric_cells(m))
    path = os.path.join(out_dir, cfg["out_name"])
    _write_csv(
        path,
        ["dataset", "classifier", "r", "features", "accuracy", "precision", "recall"],
        rows,
        _run_comments("train-eval", cfg),
    )
    print(f"wrote {path} ({len(rows)} rows)")


def cmd_ensemble(cfg: dict, out_dir: str) -> None:
    ds = _load_dataset(cfg["dataset"])
    seed = cfg["seed"]
    r_values = _check_r_values(cfg["r_values"] or [ds.spec.r], ds.spec.r)
    if cfg["classifier"] not in CLASSIFIERS:
        raise CliError(f"unknown classifier {cfg['classifier']!r}, expected one of {CLASSIFIERS}")
    rows = []
    for k in cfg["k_values"]:
        for r in r_values:
            params = EnsembleParams(
                n0=cfg["n0"],
                k_train=cfg["k_train"] if cfg["k_train"] is not None else k,
                k_test=k,
                theta=cfg["theta"],
            )
            ens, base = ensemble_split_evaluate(
                ds,
                params,
                classifier=cfg["classifier"],
                seed=seed,
                r_used=r,
                with_features=cfg["with_features"],
                test_fraction=cfg["test_fraction"],
                **cfg["classifier_options"],
            )
            wf = _cell(bool(cfg["with_features"]))
            rows.append([str(k), str(r), wf, "ensemble"] + _metric_cells(ens))
            rows.append([str(k), str(r), wf, "baseline"] + _metric_cells(base))
    path = os.path.join(out_dir, cfg["out_name"])
    _write_csv(
        path,
        ["k", "r", "with_features", "method", "accuracy", "precision", "recall"],
        rows,
        _run_comments("ensemble", cfg),
    )
    print(f"wrote {path} ({len(rows)} rows)")


def cmd_importance(cfg: dict, out_dir: str) -> None:
    if cfg["classifier"] not in ("forest", "boost"):
        raise CliError(
            f"importances need a tree-ensemble classifier (forest or boost), got {cfg['classifier']!r}"
        )
    ds = _load_dataset(cfg["dataset"])
    seed = cfg["seed"]
    r = ds.spec.r if cfg["r"] is None else cfg["r"]
    _check_r_values([r], ds.spec.r)
    X = _matrix_for_mode(ds, r, cfg["feature_mode"])
    names = _column_names(ds.samples[0].dynamics.shape[1], r, cfg["feature_mode"])
    options = cfg["classifier_options"]

    def train_fn(X_train, y_train, split_rng):
        return train_classifier(cfg["classifier"], X_train, y_train, rng=split_rng, **options)

    matrix = importance_over_splits(
        X,
        ds.labels(),
        train_fn,
        n_splits=cfg["splits"],
        test_fraction=cfg["test_fraction"],
        rng=np.random.default_rng([seed, 0]),
    )
    rows = [
        [str(s), names[j], _cell(float(matrix[s, j]))]
        for s in range(matrix.shape[0])
        for j in range(matrix.shape[1])
    ]
    path = os.path.join(out_dir, cfg["out_name"])
    _write_csv(path, ["split", "feature", "importance"], rows, _run_comments("importance", cfg))
    print(f"wrote {path} ({len(rows)} rows)")


def cmd_demo(cfg: dict, out_dir: str) -> None:
    seed = cfg["seed"]
    base = lattice_graph(cfg["rows"], cfg["cols"])
    existing = set(base.edges)
    candidates = [e for e in itertools.combinations(range(base.n), 2) if e not in existing]
    extra = cfg["extra_edges"]
    if extra > len(candidates):
        raise CliError(f"cannot add {extra} extra edges, only {len(candidates)} slots free")
    pick = np.random.default_rng([seed, 0]).choice(len(candidates), size=extra, replace=False)
    g = Graph(base.n, list(base.edges) + [candidates[i] for i in np.sort(pick)])
    # one master draw shared by all three models: continuous phases for the
    # coupled-phase model, the same values binned to kappa colors otherwise
    u = np.random.default_rng([seed, 1]).uniform(0.0, TWO_PI, size=g.n)
    kappa = cfg["kappa"]
    colors = np.minimum((u / TWO_PI * kappa).astype(np.int64), kappa - 1)
    km_params = KmParams(coupling=cfg["km"]["coupling"], step=cfg["km"]["step"])
    comments = _run_comments("demo", cfg)
    for model in MODELS:
        x0 = (
            PhaseConfig.continuous(u)
            if model == KM
            else PhaseConfig.discrete(colors, kappa)
        )
        traj = simulate(model, g, x0, cfg["horizon"], params=km_params, early_stop=False)
        path = os.path.join(out_dir, f"demo_{model}.csv")
        write_trajectory_csv(traj, path, comments=comments)
        print(f"wrote {path}")


_HANDLERS = {
    "gen": cmd_gen,
    "train-eval": cmd_train_eval,
    "ensemble": cmd_ensemble,
    "importance": cmd_importance,
    "demo": cmd_demo,
}


# ----------------------------------------------------------------------------
# Entry point
# ----------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    """Argparse variant whose errors keep the machine-readable contract."""

    def error(self, message):
        print(json.dumps({"command": self.prog, "error": message}, sort_keys=True), file=sys.stderr)
        raise SystemExit(2)


def _build_parser() -> _Parser:
    parser = _Parser(prog="syncpred", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _HANDLERS:
        p = sub.add_parser(name, help=f"run the {name} command")
        p.add_argument("--config", default=None, help="JSON config file")
        p.add_argument("--seed", type=int, default=None, help="unsigned 64-bit seed")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument(
            "--set",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override one config key (dotted path, JSON value); repeatable",
        )
    return parser


def _emit_error(command: str, message: str) -> None:
    print(json.dumps({"command": command, "error": message}, sort_keys=True), file=sys.stderr)


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        cfg = resolve_config(args.command, args.config, args.set, args.seed)
        os.makedirs(args.out, exist_ok=True)
        _HANDLERS[args.command](cfg, args.out)
        return 0
    except CliError as e:
        _emit_error(args.command, str(e))
        return 2
    except (ValueError, TypeError, OSError, BudgetExhaustedError) as e:
        _emit_error(args.command, f"{type(e).__name__}: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
