"""Command-line front end: config resolution, outputs, determinism, errors."""

import csv
import json
import os

import pytest

from syncpred.cli import main, resolve_config, CliError
from syncpred.dataset import load_dataset
from syncpred.graph import NwsParams, expected_edge_count


def run(args, capsys=None):
    code = main(args)
    if capsys is None:
        return code, "", ""
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def read_rows(path):
    with open(path) as fh:
        body = [line for line in fh if not line.startswith("#")]
    return list(csv.reader(body))


def read_comments(path):
    with open(path) as fh:
        return [line[2:].rstrip("\n") for line in fh if line.startswith("# ")]


def stderr_json(err):
    return json.loads(err.strip().splitlines()[-1])


@pytest.fixture(scope="module")
def toy_dir(tmp_path_factory):
    """One toy FCA dataset (trees sync, rings do not) shared by the tests."""
    d = tmp_path_factory.mktemp("cli_toy")
    code = main(
        [
            "gen",
            "--out",
            str(d),
            "--seed",
            "7",
            "--set",
            "name=toyfca",
            "--set",
            "model=fca",
            "--set",
            "source.kind=toy",
            "--set",
            "source.n=15",
            "--set",
            "r=10",
            "--set",
            "horizon=450",
            "--set",
            "samples_per_class=12",
        ]
    )
    assert code == 0
    return d


def toy_prefix(d):
    return os.path.join(str(d), "toyfca")


# ----------------------------------------------------------------------------
# gen
# ----------------------------------------------------------------------------


def test_gen_toy_split_is_trees_vs_rings(toy_dir):
    ds = load_dataset(toy_prefix(toy_dir) + ".manifest.json")
    for s in ds.samples:
        # trees on 15 nodes carry 14 edges, the ring 15
        assert s.features.num_edges == (14 if s.label else 15)
    y = ds.labels()
    assert int(y.sum()) == 12 and int((1 - y).sum()) == 12


def test_gen_prints_counts_and_edge_stats(tmp_path, capsys):
    code, out, _ = run(
        [
            "gen",
            "--out",
            str(tmp_path),
            "--seed",
            "3",
            "--set",
            "samples_per_class=5",
            "--set",
            "horizon=40",
        ],
        capsys,
    )
    assert code == 0
    assert "class counts: 1=5 0=5" in out
    assert "edges (all): mean=" in out
    assert "edges (class 1):" in out and "edges (class 0):" in out


def test_gen_nws_mean_edges_near_formula(tmp_path, capsys):
    code, out, _ = run(
        [
            "gen",
            "--out",
            str(tmp_path),
            "--seed",
            "5",
            "--set",
            "samples_per_class=25",
            "--set",
            "horizon=70",
        ],
        capsys,
    )
    assert code == 0
    line = next(l for l in out.splitlines() if l.startswith("edges (all):"))
    mean = float(line.split("mean=")[1].split()[0])
    # label balancing conditions the draw, so only a loose match is promised
    expected = expected_edge_count(NwsParams(n=30, k=2, p=0.85, passes=1))
    assert abs(mean - expected) < 5.0


def test_gen_same_seed_byte_identical(tmp_path, capsys):
    args = [
        "gen",
        "--seed",
        "11",
        "--set",
        "samples_per_class=4",
        "--set",
        "horizon=40",
    ]
    for sub in ("a", "b"):
        code, _, _ = run(args + ["--out", str(tmp_path / sub)], capsys)
        assert code == 0
    for name in ("dataset.manifest.json", "dataset.dynamics.csv"):
        a = (tmp_path / "a" / name).read_bytes()
        b = (tmp_path / "b" / name).read_bytes()
        assert a == b


def test_gen_budget_error_is_machine_readable(tmp_path, capsys):
    # GHM settles on every path by n + kappa, so a path-vs-path pair can
    # never fill the non-synchronizing class
    code, _, err = run(
        [
            "gen",
            "--out",
            str(tmp_path),
            "--set",
            "model=ghm",
            "--set",
            "source.kind=toy",
            "--set",
            "source.sync=path",
            "--set",
            "source.nonsync=path",
            "--set",
            "source.n=8",
            "--set",
            "horizon=30",
            "--set",
            "samples_per_class=2",
            "--set",
            "budget_factor=2",
        ],
        capsys,
    )
    assert code != 0
    payload = stderr_json(err)
    assert payload["command"] == "gen"
    assert "starved" in payload["error"] and "class" in payload["error"]


def test_gen_manifest_embeds_run_config(toy_dir):
    with open(toy_prefix(toy_dir) + ".manifest.json") as fh:
        manifest = json.load(fh)
    assert manifest["run"]["command"] == "gen"
    assert manifest["run"]["seed"] == 7
    assert manifest["run"]["config"]["model"] == "fca"
    comments = read_comments(toy_prefix(toy_dir) + ".dynamics.csv")
    assert any(c == "seed: 7" for c in comments)
    embedded = json.loads(next(c for c in comments if c.startswith("config: "))[8:])
    assert embedded["samples_per_class"] == 12


# ----------------------------------------------------------------------------
# train-eval
# ----------------------------------------------------------------------------


def test_train_eval_rows_and_baseline_per_r(toy_dir, tmp_path, capsys):
    code, _, _ = run(
        [
            "train-eval",
            "--out",
            str(tmp_path),
            "--seed",
            "2",
            "--set",
            f"dataset={toy_prefix(toy_dir)}",
            "--set",
            'classifiers=["tree","forest"]',
            "--set",
            'feature_modes=["dynamics","features"]',
            "--set",
            "r_values=[0,10]",
        ],
        capsys,
    )
    assert code == 0
    rows = read_rows(tmp_path / "metrics.csv")
    assert rows[0] == ["dataset", "classifier", "r", "features", "accuracy", "precision", "recall"]
    data = rows[1:]
    assert len(data) == 2 * 2 * 2 + 2
    baselines = [r for r in data if r[1] == "baseline"]
    assert sorted(r[2] for r in baselines) == ["0", "10"]
    for r in data:
        assert 0.0 <= float(r[4]) <= 1.0


def test_train_eval_features_only_net_is_perfect(toy_dir, tmp_path, capsys):
    code, _, _ = run(
        [
            "train-eval",
            "--out",
            str(tmp_path),
            "--seed",
            "5",
            "--set",
            f"dataset={toy_prefix(toy_dir)}",
            "--set",
            'classifiers=["net"]',
            "--set",
            'feature_modes=["features"]',
        ],
        capsys,
    )
    assert code == 0
    rows = read_rows(tmp_path / "metrics.csv")
    net_row = next(r for r in rows[1:] if r[1] == "net")
    assert float(net_row[4]) == 1.0


def test_train_eval_same_seed_byte_identical(toy_dir, tmp_path, capsys):
    args = [
        "train-eval",
        "--seed",
        "9",
        "--set",
        f"dataset={toy_prefix(toy_dir)}",
        "--set",
        'classifiers=["tree"]',
        "--set",
        'feature_modes=["dynamics"]',
    ]
    for sub in ("a", "b"):
        code, _, _ = run(args + ["--out", str(tmp_path / sub)], capsys)
        assert code == 0
    assert (tmp_path / "a" / "metrics.csv").read_bytes() == (
        tmp_path / "b" / "metrics.csv"
    ).read_bytes()


def test_train_eval_missing_dataset_errors(tmp_path, capsys):
    code, _, err = run(
        ["train-eval", "--out", str(tmp_path), "--set", "dataset=/nowhere/none"],
        capsys,
    )
    assert code != 0
    assert "not found" in stderr_json(err)["error"]


# ----------------------------------------------------------------------------
# ensemble
# ----------------------------------------------------------------------------


def test_ensemble_report_shape(toy_dir, tmp_path, capsys):
    code, _, _ = run(
        [
            "ensemble",
            "--out",
            str(tmp_path),
            "--seed",
            "4",
            "--set",
            f"dataset={toy_prefix(toy_dir)}",
            "--set",
            "n0=8",
            "--set",
            "k_values=[1,2]",
            "--set",
            "r_values=[10]",
            "--set",
            "classifier=tree",
        ],
        capsys,
    )
    assert code == 0
    rows = read_rows(tmp_path / "ensemble.csv")
    assert rows[0] == ["k", "r", "with_features", "method", "accuracy", "precision", "recall"]
    data = rows[1:]
    assert len(data) == 2 * 2 * 1
    assert [r[3] for r in data] == ["ensemble", "baseline", "ensemble", "baseline"]
    for r in data:
        assert r[2] == "false"
        assert 0.0 <= float(r[4]) <= 1.0


def test_ensemble_oversized_subgraph_errors(toy_dir, tmp_path, capsys):
    code, _, err = run(
        [
            "ensemble",
            "--out",
            str(tmp_path),
            "--set",
            f"dataset={toy_prefix(toy_dir)}",
            "--set",
            "n0=99",
            "--set",
            "k_values=[1]",
            "--set",
            "classifier=tree",
        ],
        capsys,
    )
    assert code != 0
    assert "error" in stderr_json(err)


# ----------------------------------------------------------------------------
# importance
# ----------------------------------------------------------------------------


def test_importance_rows_and_per_split_sums(toy_dir, tmp_path, capsys):
    code, _, _ = run(
        [
            "importance",
            "--out",
            str(tmp_path),
            "--seed",
            "6",
            "--set",
            f"dataset={toy_prefix(toy_dir)}",
            "--set",
            "classifier=boost",
            "--set",
            "splits=4",
            "--set",
            'classifier_options={"stages":10}',
        ],
        capsys,
    )
    assert code == 0
    rows = read_rows(tmp_path / "importance.csv")[1:]
    p = 15 * 11 + 3 + 5
    assert len(rows) == 4 * p
    names = {r[1] for r in rows}
    assert "q1" in names and "num_edges" in names and "x_t0_v0" in names
    for s in ("0", "1", "2", "3"):
        total = sum(float(r[2]) for r in rows if r[0] == s)
        assert total == pytest.approx(1.0, abs=1e-9)


def test_importance_rejects_non_ensemble_classifier(toy_dir, tmp_path, capsys):
    for clf in ("net", "tree"):
        code, _, err = run(
            [
                "importance",
                "--out",
                str(tmp_path),
                "--set",
                f"dataset={toy_prefix(toy_dir)}",
                "--set",
                f"classifier={clf}",
            ],
            capsys,
        )
        assert code != 0
        assert "forest or boost" in stderr_json(err)["error"]


# ----------------------------------------------------------------------------
# demo
# ----------------------------------------------------------------------------


def test_demo_files_width_and_determinism(tmp_path, capsys):
    args = ["demo", "--seed", "3", "--set", "horizon=3"]
    for sub in ("a", "b"):
        code, _, _ = run(args + ["--out", str(tmp_path / sub)], capsys)
        assert code == 0
    for model in ("km", "fca", "ghm"):
        name = f"demo_{model}.csv"
        a = (tmp_path / "a" / name).read_bytes()
        assert a == (tmp_path / "b" / name).read_bytes()
        rows = read_rows(tmp_path / "a" / name)
        # t column plus one cell per lattice node
        assert all(len(r) == 401 for r in rows)
        assert len(rows) == 1 + 4


def test_demo_discrete_models_share_binned_start(tmp_path, capsys):
    code, _, _ = run(["demo", "--out", str(tmp_path), "--seed", "8", "--set", "horizon=1"], capsys)
    assert code == 0
    fca = read_rows(tmp_path / "demo_fca.csv")[1]
    ghm = read_rows(tmp_path / "demo_ghm.csv")[1]
    assert fca == ghm
    assert set(fca[1:]) <= {"0", "1", "2", "3", "4"}


# ----------------------------------------------------------------------------
# config machinery
# ----------------------------------------------------------------------------


def test_unknown_config_key_rejected(tmp_path, capsys):
    code, _, err = run(["gen", "--out", str(tmp_path), "--set", "nope=1"], capsys)
    assert code == 2
    assert "unknown config key 'nope'" in stderr_json(err)["error"]


def test_unknown_nested_key_rejected(tmp_path, capsys):
    code, _, err = run(["gen", "--out", str(tmp_path), "--set", "km.gain=2"], capsys)
    assert code == 2
    assert "km.gain" in stderr_json(err)["error"]


def test_set_overrides_config_file(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"samples_per_class": 4, "horizon": 40}))
    code, _, _ = run(
        [
            "gen",
            "--out",
            str(tmp_path),
            "--config",
            str(cfg_path),
            "--set",
            "samples_per_class=6",
        ],
        capsys,
    )
    assert code == 0
    comments = read_comments(tmp_path / "dataset.dynamics.csv")
    embedded = json.loads(next(c for c in comments if c.startswith("config: "))[8:])
    assert embedded["samples_per_class"] == 6
    assert embedded["horizon"] == 40


def test_seed_flag_wins_over_config_file(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"seed": 3, "samples_per_class": 4, "horizon": 40}))
    code, _, _ = run(
        ["gen", "--out", str(tmp_path), "--config", str(cfg_path), "--seed", "9"],
        capsys,
    )
    assert code == 0
    with open(tmp_path / "dataset.manifest.json") as fh:
        manifest = json.load(fh)
    assert manifest["run"]["seed"] == 9
    assert manifest["spec"]["seed"] == 9


def test_config_file_must_be_object(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2]")
    code, _, err = run(["gen", "--out", str(tmp_path), "--config", str(bad)], capsys)
    assert code == 2
    assert "JSON object" in stderr_json(err)["error"]
    code, _, err = run(["gen", "--out", str(tmp_path), "--config", str(tmp_path / "no.json")], capsys)
    assert code == 2
    assert "not found" in stderr_json(err)["error"]


def test_resolve_config_source_kind_switches_schema():
    cfg = resolve_config("gen", None, ["source.kind=toy", "source.sync=complete"], None)
    assert cfg["source"]["nonsync"] == "ring"
    with pytest.raises(CliError, match="source.p"):
        resolve_config("gen", None, ["source.kind=toy", "source.p=0.5"], None)


def test_resolve_config_rejects_bad_seed():
    with pytest.raises(CliError, match="seed"):
        resolve_config("demo", None, ["seed=-1"], None)
    with pytest.raises(CliError, match="seed"):
        resolve_config("demo", None, ['seed="abc"'], None)


def test_unknown_subcommand_exits_nonzero(capsys):
    code, _, err = run(["frobnicate"], capsys)
    assert code == 2
    assert "error" in stderr_json(err)
