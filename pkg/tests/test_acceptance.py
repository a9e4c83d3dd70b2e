"""Twelve go/no-go checks; each test emits one pass/fail verdict line.

The heavyweight corpora are built once per session and shared. Every random
stream is seeded, so the whole suite is reproducible end to end.
"""

import itertools
import os

import numpy as np
import pytest

from syncpred.cli import main as cli_main
from syncpred.dataset import (
    DatasetSpec,
    NwsSource,
    ToySource,
    build_balanced_dataset,
    kfold_split,
)
from syncpred.dynamics import (
    FCA,
    GHM,
    KM,
    PhaseConfig,
    circular_width,
    is_concentrated,
    is_synchronized,
    random_concentrated_config,
    random_config,
    simulate,
)
from syncpred.graph import (
    NwsParams,
    expected_edge_count,
    is_connected,
    nws_generate,
    path_graph,
    random_tree,
)
from syncpred.learn import (
    importance_over_splits,
    metrics_from_predictions,
    predict,
    train_classifier,
    train_forest,
    train_tree,
)
from syncpred.learn.net import NetConfig, _init_state, _loss_and_grads
from syncpred.predict import (
    EnsembleParams,
    baseline_expected_accuracy,
    baseline_predict,
    ensemble_split_evaluate,
)


def verdict(num: int, ok: bool, detail: str) -> None:
    line = f"criterion {num:02d} {'PASS' if ok else 'FAIL'}: {detail}"
    print(line)
    assert ok, line


# ----------------------------------------------------------------------------
# Shared corpora
# ----------------------------------------------------------------------------

TOY_PAIRS = {KM: ("complete", "ring"), FCA: ("tree", "ring"), GHM: ("path", "complete")}
TOY_HORIZONS = {KM: 1758, FCA: 70, GHM: 70}

CORPUS30_SPECS = {
    GHM: DatasetSpec(
        model=GHM,
        source=NwsSource(n=30, k=2, p=0.65, passes=2),
        r=4,
        horizon=70,
        samples_per_class=2000,
        seed=101,
    ),
    FCA: DatasetSpec(
        model=FCA,
        source=NwsSource(n=30, k=2, p=0.65, passes=2),
        r=10,
        horizon=70,
        samples_per_class=2000,
        seed=102,
    ),
    KM: DatasetSpec(
        model=KM,
        source=NwsSource(n=30, k=2, p=0.85),
        r=20,
        horizon=1758,
        samples_per_class=2000,
        seed=103,
    ),
}
ANCHOR_R = {GHM: 4, FCA: 10, KM: 20}


@pytest.fixture(scope="session")
def toy_corpora():
    out = {}
    for i, model in enumerate((KM, FCA, GHM)):
        sync, nonsync = TOY_PAIRS[model]
        spec = DatasetSpec(
            model=model,
            source=ToySource(sync=sync, nonsync=nonsync, n=30),
            r=10,
            horizon=TOY_HORIZONS[model],
            samples_per_class=200,
            seed=301 + i,
        )
        out[model] = build_balanced_dataset(spec)
    return out


@pytest.fixture(scope="session")
def toy_fca_full():
    """Full-volume firefly topology-pair corpus: 1000 samples per class."""
    spec = DatasetSpec(
        model=FCA,
        source=ToySource(sync="tree", nonsync="ring", n=30),
        r=10,
        horizon=70,
        samples_per_class=1000,
        seed=305,
    )
    return build_balanced_dataset(spec)


@pytest.fixture(scope="session")
def corpus30():
    return {m: build_balanced_dataset(spec) for m, spec in CORPUS30_SPECS.items()}


@pytest.fixture(scope="session")
def corpus200():
    spec = DatasetSpec(
        model=FCA,
        source=NwsSource(n=200, k=2, p=1.0, passes=3),
        r=25,
        horizon=1200,
        samples_per_class=300,
        seed=104,
    )
    return build_balanced_dataset(spec)


def split_80_20(y: np.ndarray, seed: int):
    """First fold of a seeded stratified 5-fold split: 80% train, 20% test."""
    return kfold_split(y, folds=5, rng=np.random.default_rng(seed))[0]


def measured_baseline(ds, r_used: int, indices, seed: int):
    kappa = None if ds.spec.model == KM else ds.spec.kappa
    coin = np.random.default_rng(seed)
    y_pred, y_true = [], []
    for i in indices:
        s = ds.samples[int(i)]
        y_pred.append(int(baseline_predict(ds.spec.model, s.dynamics[: r_used + 1], coin, kappa)))
        y_true.append(int(s.label))
    return metrics_from_predictions(y_true, y_pred)


# ----------------------------------------------------------------------------
# 1. Excitation model settles on every path by n + kappa
# ----------------------------------------------------------------------------


def test_criterion_01_ghm_path_settling():
    bad = 0
    checked = 0
    for n in range(2, 9):
        g = path_graph(n)
        for colors in itertools.product(range(3), repeat=n):
            x0 = PhaseConfig.discrete(np.array(colors), kappa=3)
            final = simulate(GHM, g, x0, n + 3).config_at(n + 3)
            checked += 1
            bad += not np.all(final.values == 0)
    rng = np.random.default_rng(111)
    for _ in range(500):
        n = int(rng.integers(2, 51))
        kappa = int(rng.choice([3, 4, 5]))
        g = path_graph(n)
        x0 = random_config(GHM, g, rng, kappa=kappa)
        final = simulate(GHM, g, x0, n + kappa).config_at(n + kappa)
        checked += 1
        bad += not np.all(final.values == 0)
    verdict(1, bad == 0, f"{checked} path trajectories, {bad} not all-zero by n+kappa")


# ----------------------------------------------------------------------------
# 2. Firefly model synchronizes on low-degree trees within 30n
# ----------------------------------------------------------------------------


def test_criterion_02_fca_tree_settling():
    rng = np.random.default_rng(222)
    bad = 0
    for _ in range(200):
        n = int(rng.integers(3, 26))
        g = random_tree(n, rng, max_degree=4)
        x0 = random_config(FCA, g, rng, kappa=5)
        final = simulate(FCA, g, x0, 30 * n).config_at(30 * n)
        bad += not is_synchronized(final)
    verdict(2, bad == 0, f"200 random trees (n<=25, max degree 4), {bad} unsettled by 30n")


# ----------------------------------------------------------------------------
# 3. Concentrated starts synchronize on connected random graphs
# ----------------------------------------------------------------------------


def _connected_nws(params: NwsParams, rng) -> "object":
    g = nws_generate(params, rng)
    while not is_connected(g):
        g = nws_generate(params, rng)
    return g


def test_criterion_03_concentration_principle():
    rng = np.random.default_rng(333)
    km_fail = 0
    for _ in range(200):
        g = _connected_nws(NwsParams(n=30, k=2, p=0.85, passes=1), rng)
        x0 = random_concentrated_config(KM, g, rng)
        traj = simulate(KM, g, x0, 5000, sync_tol=1e-3)
        if traj.stop_iteration is None and circular_width(traj.config_at(5000)) >= 1e-3:
            km_fail += 1
    fca_fail = 0
    for _ in range(200):
        g = _connected_nws(NwsParams(n=30, k=2, p=0.65, passes=1), rng)
        x0 = random_concentrated_config(FCA, g, rng, kappa=5)
        final = simulate(FCA, g, x0, 30 * 30).config_at(30 * 30)
        fca_fail += not is_synchronized(final)
    verdict(
        3,
        km_fail == 0 and fca_fail == 0,
        f"concentrated starts: {km_fail}/200 continuous and {fca_fail}/200 firefly failures",
    )


# ----------------------------------------------------------------------------
# 4. Topology-pair datasets are perfectly separable from the 5 graph features
# ----------------------------------------------------------------------------


def test_criterion_04_toy_separation(toy_corpora):
    results = []
    ok = True
    for j, (model, ds) in enumerate(sorted(toy_corpora.items())):
        X = np.stack([s.features.as_array() for s in ds.samples]).astype(np.float64)
        y = ds.labels()
        train_idx, test_idx = split_80_20(y, seed=400 + j)
        net = train_classifier("net", X[train_idx], y[train_idx], rng=np.random.default_rng([4, j]))
        acc = metrics_from_predictions(y[test_idx], predict(net, X[test_idx])).accuracy
        results.append(f"{model}={acc:.3f}")
        ok = ok and acc >= 0.99
    verdict(4, ok, "features-only net held-out accuracy " + " ".join(results) + " (need >= 0.99)")


# ----------------------------------------------------------------------------
# 5. Every classifier beats the coin-backed rule on toy firefly dynamics
# ----------------------------------------------------------------------------


def test_criterion_05_dynamics_beat_baseline(toy_fca_full):
    ds = toy_fca_full
    r = 10
    y = ds.labels()
    X = ds.matrix(r_used=r, with_features=False)
    base = measured_baseline(ds, r, range(len(ds.samples)), seed=505).accuracy
    folds = kfold_split(y, folds=5, rng=np.random.default_rng(550))
    results = []
    ok = True
    for j, kind in enumerate(("tree", "forest", "boost", "net")):
        y_pred = np.empty(y.size, dtype=np.int64)
        for f, (train_idx, test_idx) in enumerate(folds):
            model = train_classifier(
                kind, X[train_idx], y[train_idx], rng=np.random.default_rng([5, j, f])
            )
            y_pred[test_idx] = predict(model, X[test_idx])
        acc = metrics_from_predictions(y, y_pred).accuracy
        results.append(f"{kind}={acc:.3f}")
        ok = ok and acc >= base + 0.15
    verdict(
        5,
        ok,
        f"toy firefly r=10 CV accuracy {' '.join(results)} vs baseline {base:.3f} (+0.15 needed)",
    )


# ----------------------------------------------------------------------------
# 6. Desk-scale accuracy margins on the 30-node corpora
# ----------------------------------------------------------------------------


def test_criterion_06_desk_scale_margins(corpus30):
    parts = []
    ok = True
    for mi, model in enumerate((GHM, FCA, KM)):
        ds = corpus30[model]
        r = ANCHOR_R[model]
        X = ds.matrix(r_used=r, with_features=True)
        y = ds.labels()
        folds = kfold_split(y, folds=5, rng=np.random.default_rng(600 + mi))
        base = measured_baseline(ds, r, range(y.size), seed=660 + mi).accuracy
        best_kind, best_acc = "", -1.0
        for j, kind in enumerate(("forest", "boost", "net")):
            y_pred = np.empty(y.size, dtype=np.int64)
            for f, (train_idx, test_idx) in enumerate(folds):
                clf = train_classifier(
                    kind, X[train_idx], y[train_idx], rng=np.random.default_rng([6, mi, j, f])
                )
                y_pred[test_idx] = predict(clf, X[test_idx])
            acc = metrics_from_predictions(y, y_pred).accuracy
            if acc > best_acc:
                best_kind, best_acc = kind, acc
        parts.append(f"{model} r={r}: best {best_kind}={best_acc:.3f} baseline={base:.3f}")
        ok = ok and best_acc >= base + 0.15
        if model == GHM:
            ok = ok and best_acc >= 0.80
    verdict(6, ok, "; ".join(parts) + " (need CV accuracy >= baseline+0.15, ghm abs >= 0.80)")


# ----------------------------------------------------------------------------
# 7. Features-only accuracy sits in the informative-but-imperfect band
# ----------------------------------------------------------------------------


def test_criterion_07_features_only_band(corpus30):
    """Mean of 3 training repeats of pooled 5-fold CV; repeats damp init noise
    because the band floor sits within one s.e. of the point estimate."""
    parts = []
    ok = True
    for mi, model in enumerate((GHM, FCA, KM)):
        ds = corpus30[model]
        X = np.stack([s.features.as_array() for s in ds.samples]).astype(np.float64)
        y = ds.labels()
        folds = kfold_split(y, folds=5, rng=np.random.default_rng(700 + mi))
        accs = []
        for rep in range(3):
            y_pred = np.empty(y.size, dtype=np.int64)
            for f, (train_idx, test_idx) in enumerate(folds):
                net = train_classifier(
                    "net", X[train_idx], y[train_idx], rng=np.random.default_rng([7, mi, f, rep])
                )
                y_pred[test_idx] = predict(net, X[test_idx])
            accs.append(metrics_from_predictions(y, y_pred).accuracy)
        acc = float(np.mean(accs))
        parts.append(f"{model}={acc:.4f}")
        ok = ok and 0.55 <= acc <= 0.80
    verdict(7, ok, "features-only net CV accuracy " + " ".join(parts) + " (band [0.55, 0.80])")


# ----------------------------------------------------------------------------
# 8. Subgraph ensemble beats the pooled concentration rule on large graphs
# ----------------------------------------------------------------------------


def test_criterion_08_ensemble_beats_subgraph_baseline(corpus200):
    params = EnsembleParams(n0=30, k_train=8, k_test=8, theta=0.5)
    ens, base = ensemble_split_evaluate(
        corpus200,
        params,
        classifier="net",
        seed=800,
        r_used=corpus200.spec.r,
        with_features=False,
        test_fraction=0.2,
    )
    assert base.recall is not None and ens.recall is not None
    ok = ens.accuracy > base.accuracy and ens.recall >= base.recall + 0.20
    verdict(
        8,
        ok,
        f"ensemble acc={ens.accuracy:.3f} recall={ens.recall:.3f} vs "
        f"baseline acc={base.accuracy:.3f} recall={base.recall:.3f} "
        "(need acc greater and recall +0.20)",
    )


# ----------------------------------------------------------------------------
# 9. Measured baseline accuracy matches the closed-form expectation
# ----------------------------------------------------------------------------


def test_criterion_09_baseline_formula(corpus30):
    ds = corpus30[GHM]
    r = ANCHOR_R[GHM]
    kappa = ds.spec.kappa
    sync = [s for s in ds.samples if s.label]
    hits = sum(
        any(is_concentrated(GHM, PhaseConfig.discrete(row, kappa)) for row in s.dynamics[1 : r + 1])
        for s in sync
    )
    x_hat = hits / len(sync)
    expected = baseline_expected_accuracy(0.5, x_hat)
    m = measured_baseline(ds, r, range(len(ds.samples)), seed=909)
    half_width = 2.5758 * np.sqrt(expected * (1.0 - expected) / len(ds.samples))
    ok = abs(m.accuracy - expected) <= half_width
    verdict(
        9,
        ok,
        f"baseline accuracy {m.accuracy:.4f} vs expected {expected:.4f} "
        f"(x_hat={x_hat:.4f}, 99% half-width {half_width:.4f})",
    )


# ----------------------------------------------------------------------------
# 10. Closed-form expected edge count matches Monte Carlo
# ----------------------------------------------------------------------------


def test_criterion_10_edge_count_formula():
    params = NwsParams(n=30, k=2, p=0.65, passes=1)
    rng = np.random.default_rng(1010)
    mean = np.mean([len(nws_generate(params, rng).edges) for _ in range(10_000)])
    expected = expected_edge_count(params)
    rel = abs(mean - expected) / expected
    verdict(10, rel < 0.02, f"mean edges {mean:.3f} vs formula {expected:.3f} (rel err {rel:.4f})")


# ----------------------------------------------------------------------------
# 11. Learner soundness: gradients, purity, importance recovery
# ----------------------------------------------------------------------------


def _net_gradient_worst_error() -> float:
    rng = np.random.default_rng(1101)
    cfg = NetConfig(hidden=6, dropout=0.0)
    X = rng.normal(size=(12, 4))
    y = rng.integers(0, 2, size=12)
    worst = 0.0
    for batch_stats in (False, True):
        params, buffers = _init_state(4, cfg, rng)
        for key in buffers:
            buffers[key] = np.abs(rng.normal(1.0, 0.1, size=buffers[key].shape))
        _, grads = _loss_and_grads(params, buffers, X, y, cfg, batch_stats=batch_stats)
        h = 1e-5
        for name, w in params.items():
            flat = w.ravel()
            for j in range(flat.size):
                keep = flat[j]
                flat[j] = keep + h
                up, _ = _loss_and_grads(params, buffers, X, y, cfg, batch_stats=batch_stats)
                flat[j] = keep - h
                dn, _ = _loss_and_grads(params, buffers, X, y, cfg, batch_stats=batch_stats)
                flat[j] = keep
                fd = (up - dn) / (2 * h)
                bp = grads[name].ravel()[j]
                worst = max(worst, abs(fd - bp) / max(1e-6, abs(fd), abs(bp)))
    return worst


def test_criterion_11_learner_soundness():
    grad_err = _net_gradient_worst_error()

    rng = np.random.default_rng(1102)
    X = rng.normal(size=(200, 6))
    y = rng.integers(0, 2, size=200)
    tree = train_tree(X, y)
    pure = np.array_equal(predict(tree, X), y)

    rng = np.random.default_rng(1103)
    Xo = rng.normal(size=(300, 10))
    yo = (Xo[:, 3] > 0).astype(np.int64)
    imp = importance_over_splits(
        Xo,
        yo,
        lambda X_tr, y_tr, split_rng: train_forest(X_tr, y_tr, trees=15, rng=split_rng),
        n_splits=50,
        rng=np.random.default_rng(1104),
    )
    top_rate = float(np.mean(np.argmax(imp, axis=1) == 3))

    ok = grad_err < 1e-3 and pure and top_rate >= 0.95
    verdict(
        11,
        ok,
        f"gradient max rel err {grad_err:.2e} (<1e-3), pure tree {pure}, "
        f"top-feature rate {top_rate:.2f} (>=0.95)",
    )


# ----------------------------------------------------------------------------
# 12. Byte-identical command outputs per seed
# ----------------------------------------------------------------------------

_C12_COMMANDS = [
    [
        "gen",
        "--out",
        "out",
        "--seed",
        "42",
        "--set",
        "name=tiny",
        "--set",
        "model=ghm",
        "--set",
        "source.kind=toy",
        "--set",
        "source.sync=path",
        "--set",
        "source.nonsync=complete",
        "--set",
        "source.n=8",
        "--set",
        "r=2",
        "--set",
        "horizon=30",
        "--set",
        "samples_per_class=3",
    ],
    [
        "train-eval",
        "--out",
        "out",
        "--seed",
        "42",
        "--set",
        "dataset=out/tiny",
        "--set",
        'classifiers=["tree"]',
        "--set",
        'feature_modes=["dynamics"]',
        "--set",
        "folds=3",
    ],
    [
        "ensemble",
        "--out",
        "out",
        "--seed",
        "42",
        "--set",
        "dataset=out/tiny",
        "--set",
        "n0=4",
        "--set",
        "k_values=[1,2]",
        "--set",
        "r_values=[2]",
        "--set",
        "classifier=tree",
        "--set",
        "test_fraction=0.34",
    ],
    [
        "importance",
        "--out",
        "out",
        "--seed",
        "42",
        "--set",
        "dataset=out/tiny",
        "--set",
        "classifier=boost",
        "--set",
        "splits=2",
        "--set",
        'classifier_options={"stages":5}',
    ],
    ["demo", "--out", "out", "--seed", "42", "--set", "horizon=2"],
]


def test_criterion_12_command_determinism(tmp_path, monkeypatch):
    for sub in ("a", "b"):
        root = tmp_path / sub
        root.mkdir()
        monkeypatch.chdir(root)
        for argv in _C12_COMMANDS:
            assert cli_main(list(argv)) == 0
    names_a = sorted(os.listdir(tmp_path / "a" / "out"))
    names_b = sorted(os.listdir(tmp_path / "b" / "out"))
    same = names_a == names_b and len(names_a) >= 8
    diffs = []
    for name in names_a:
        if (tmp_path / "a" / "out" / name).read_bytes() != (tmp_path / "b" / "out" / name).read_bytes():
            diffs.append(name)
            same = False
    verdict(
        12,
        same,
        f"5 commands rerun with fixed seeds: {len(names_a)} files, "
        + ("all byte-identical" if not diffs else f"differs: {diffs}"),
    )
