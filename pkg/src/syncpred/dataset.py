"""Balanced labeled dynamics datasets: build, vectorize, split, save, reload."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .dynamics import (
    FCA,
    GHM,
    MODELS,
    KmParams,
    PhaseConfig,
    is_concentrated,
    random_config,
    simulate,
)
from .graph import (
    FEATURE_NAMES,
    Graph,
    GraphFeatures,
    NwsParams,
    complete_graph,
    fingerprint,
    graph_features,
    nws_generate,
    path_graph,
    random_tree,
    ring_graph,
)

__all__ = [
    "NwsSource",
    "ToySource",
    "DatasetSpec",
    "Sample",
    "Dataset",
    "BudgetExhaustedError",
    "label_sample",
    "build_balanced_dataset",
    "quartiles",
    "vectorize",
    "kfold_split",
    "save_dataset",
    "load_dataset",
    "regenerate_graph_and_config",
    "resimulate_label",
]

TOY_TOPOLOGIES = ("complete", "ring", "path", "tree")


def _as_range(v, name: str):
    """Normalize a scalar-or-(lo, hi) field; ranges are inclusive."""
    if isinstance(v, (tuple, list)):
        if len(v) != 2 or v[0] > v[1]:
            raise ValueError(f"{name} range must be (lo, hi) with lo <= hi, got {v!r}")
        return (v[0], v[1])
    return (v, v)


@dataclass(frozen=True)
class NwsSource:
    """Ring-plus-shortcuts graph source.

    ``n`` and ``passes`` may be scalars or inclusive integer ranges sampled
    uniformly per draw. ``p`` may be a scalar, or a (lo, hi) range for a
    per-draw mean that is then jittered by a Normal(0, p_jitter) perturbation
    and clipped to [0, 1].
    """

    n: int | tuple[int, int] = 30
    k: int = 2
    p: float | tuple[float, float] = 0.85
    passes: int | tuple[int, int] = 1
    p_jitter: float = 0.0

    def validate(self) -> None:
        n_lo, n_hi = _as_range(self.n, "n")
        p_lo, p_hi = _as_range(self.p, "p")
        m_lo, m_hi = _as_range(self.passes, "passes")
        if self.p_jitter < 0:
            raise ValueError("p_jitter must be >= 0")
        if not (0 <= p_lo <= p_hi <= 1):
            raise ValueError(f"p bounds must lie in [0, 1], got {self.p!r}")
        if m_lo < 1:
            raise ValueError("passes must be >= 1")
        NwsParams(n=int(n_lo), k=self.k, p=float(p_lo), passes=int(m_lo)).validate()
        NwsParams(n=int(n_hi), k=self.k, p=float(p_hi), passes=int(m_hi)).validate()

    def draw(self, rng: np.random.Generator) -> NwsParams:
        n_lo, n_hi = _as_range(self.n, "n")
        n = int(rng.integers(n_lo, n_hi + 1)) if n_hi > n_lo else int(n_lo)
        p_lo, p_hi = _as_range(self.p, "p")
        p = float(rng.uniform(p_lo, p_hi)) if p_hi > p_lo else float(p_lo)
        if self.p_jitter > 0:
            p = float(np.clip(p + rng.normal(0.0, self.p_jitter), 0.0, 1.0))
        m_lo, m_hi = _as_range(self.passes, "passes")
        m = int(rng.integers(m_lo, m_hi + 1)) if m_hi > m_lo else int(m_lo)
        return NwsParams(n=n, k=self.k, p=p, passes=m)


@dataclass(frozen=True)
class ToySource:
    """Fixed-topology pair: label-1 samples from ``sync``, label-0 from ``nonsync``.

    Each side is one fixed graph shared by every draw; only the initial
    configuration varies. The tree side is drawn once from ``tree_seed``.
    """

    sync: str = "tree"
    nonsync: str = "ring"
    n: int | tuple[int, int] = 30
    tree_max_degree: int = 4
    tree_seed: int = 0

    def validate(self) -> None:
        for side in (self.sync, self.nonsync):
            if side not in TOY_TOPOLOGIES:
                raise ValueError(f"unknown topology {side!r}, expected one of {TOY_TOPOLOGIES}")
        n_lo, _ = _as_range(self.n, "n")
        if n_lo < 3:
            raise ValueError("toy graphs need n >= 3")

    def build(self, side: str, rng: np.random.Generator) -> Graph:
        n_lo, n_hi = _as_range(self.n, "n")
        n = int(rng.integers(n_lo, n_hi + 1)) if n_hi > n_lo else int(n_lo)
        if side == "complete":
            return complete_graph(n)
        if side == "ring":
            return ring_graph(n)
        if side == "path":
            return path_graph(n)
        tree_rng = np.random.default_rng([self.tree_seed, n])
        return random_tree(n, tree_rng, max_degree=self.tree_max_degree)


@dataclass(frozen=True)
class DatasetSpec:
    """Everything needed to rebuild a dataset bit-for-bit.

    r is the stored-dynamics horizon (X_0..X_r goes to the classifier), and
    ``horizon`` is the labeling iteration T at which concentration is judged.
    """

    model: str
    source: NwsSource | ToySource
    r: int
    horizon: int
    samples_per_class: int
    include_graph_features: bool = True
    kappa: int = 5
    seed: int = 0
    km: KmParams = field(default_factory=KmParams)
    name: str = ""

    def validate(self) -> None:
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        if not (0 <= self.r < self.horizon):
            raise ValueError(f"need 0 <= r < horizon, got r={self.r}, horizon={self.horizon}")
        if self.samples_per_class < 1:
            raise ValueError("samples_per_class must be >= 1")
        if self.kappa < 3:
            raise ValueError("kappa must be >= 3")
        self.source.validate()
        self.km.validate()


@dataclass
class Sample:
    """One labeled example: stored initial dynamics plus per-graph descriptors.

    ``dynamics`` has shape (r+1, n), row t = X_t. The originating graph is
    kept when built in-process and regenerated from (spec.seed, draw) after a
    reload.
    """

    draw: int
    label: bool
    features: GraphFeatures
    quartiles: tuple[float, float, float]
    dynamics: np.ndarray
    graph: Graph | None = None


@dataclass
class Dataset:
    spec: DatasetSpec
    samples: list[Sample]

    def labels(self) -> np.ndarray:
        return np.array([s.label for s in self.samples], dtype=np.int64)

    def matrix(self, r_used: int | None = None, with_features: bool | None = None) -> np.ndarray:
        """Stacked vectorize() rows; requires all samples share one node count."""
        r_used = self.spec.r if r_used is None else r_used
        wf = self.spec.include_graph_features if with_features is None else with_features
        ns = {s.dynamics.shape[1] for s in self.samples}
        if len(ns) > 1:
            raise ValueError(
                "samples have mixed node counts; restrict to fixed-size subgraphs first"
            )
        return np.stack([vectorize(s, r_used, wf) for s in self.samples])


class BudgetExhaustedError(RuntimeError):
    """Raised when a class quota cannot be met within the draw budget."""


def label_sample(
    model: str,
    g: Graph,
    x0: PhaseConfig,
    horizon: int,
    km: KmParams | None = None,
) -> bool:
    """Simulate to the labeling iteration and test concentration there."""
    traj = simulate(model, g, x0, horizon, params=km)
    return is_concentrated(model, traj.config_at(horizon))


def quartiles(x) -> tuple[float, float, float]:
    """Nearest-rank quartiles of the raw phase values taken as plain numbers."""
    v = np.sort(np.asarray(x.values if isinstance(x, PhaseConfig) else x, dtype=np.float64))
    if v.size == 0:
        raise ValueError("quartiles of an empty config")
    picks = [v[math.ceil(q * v.size) - 1] for q in (0.25, 0.5, 0.75)]
    return (float(picks[0]), float(picks[1]), float(picks[2]))


def vectorize(sample: Sample, r_used: int, with_features: bool) -> np.ndarray:
    """Flat row: X_0..X_{r_used} node-major per iteration, 3 quartiles, then
    optionally the 5 graph features."""
    r_max = sample.dynamics.shape[0] - 1
    if not (0 <= r_used <= r_max):
        raise ValueError(f"r_used must be in [0, {r_max}], got {r_used}")
    parts = [sample.dynamics[: r_used + 1].astype(np.float64).ravel(), np.array(sample.quartiles)]
    if with_features:
        parts.append(sample.features.as_array())
    return np.concatenate(parts)


def _draw_sample(spec: DatasetSpec, draw: int, side: str | None):
    """One deterministic draw: rng stream [seed, draw] -> (graph, x0)."""
    rng = np.random.default_rng([spec.seed, draw])
    if isinstance(spec.source, ToySource):
        g = spec.source.build(side, rng)
    else:
        g = nws_generate(spec.source.draw(rng), rng)
    x0 = random_config(spec.model, g, rng, kappa=spec.kappa)
    return g, x0


def _make_sample(spec: DatasetSpec, draw: int, g: Graph, x0: PhaseConfig, label: bool) -> Sample:
    traj = simulate(spec.model, g, x0, spec.r, params=spec.km, early_stop=False)
    return Sample(
        draw=draw,
        label=label,
        features=graph_features(g),
        quartiles=quartiles(x0),
        dynamics=traj.values_matrix(),
        graph=g,
    )


def build_balanced_dataset(
    spec: DatasetSpec, budget_factor: int = 50, progress=None
) -> Dataset:
    """Draw until both classes hold ``samples_per_class`` examples.

    Random-graph draws are deduplicated by structural fingerprint and labeled
    by simulating to the horizon. Topology-pair draws instead target one side
    per class (label-1 from ``sync``, label-0 from ``nonsync``) and reject
    draws whose label disagrees; duplicates are allowed there since the
    topologies repeat by construction. Raises :class:`BudgetExhaustedError`
    naming the starved class when ``budget_factor * 2 * samples_per_class``
    draws do not suffice. Deterministic given spec.seed: draw i uses the
    random stream seeded (spec.seed, i) regardless of acceptance history.
    """
    spec.validate()
    toy = isinstance(spec.source, ToySource)
    want = spec.samples_per_class
    budget = budget_factor * 2 * want
    buckets: dict[bool, list[Sample]] = {True: [], False: []}
    seen: set[str] = set()
    draw = 0
    while (len(buckets[True]) < want or len(buckets[False]) < want) and draw < budget:
        if toy:
            target = len(buckets[True]) < want
            side = spec.source.sync if target else spec.source.nonsync
        else:
            target, side = None, None
        g, x0 = _draw_sample(spec, draw, side)
        ok = True
        if not toy:
            fp = fingerprint(g)
            if fp in seen:
                ok = False
            else:
                seen.add(fp)
        if ok:
            label = label_sample(spec.model, g, x0, spec.horizon, km=spec.km)
            if toy and label != target:
                ok = False
            elif len(buckets[label]) >= want:
                ok = False
            if ok:
                buckets[label].append(_make_sample(spec, draw, g, x0, label))
        draw += 1
        if progress is not None and draw % 200 == 0:
            progress(draw, len(buckets[False]), len(buckets[True]))
    starved = [str(int(lab)) for lab in (True, False) if len(buckets[lab]) < want]
    if starved:
        counts = {int(lab): len(buckets[lab]) for lab in (True, False)}
        raise BudgetExhaustedError(
            f"draw budget {budget} exhausted; starved class(es) {','.join(starved)}: "
            f"have {counts[1]}/{want} of class 1 and {counts[0]}/{want} of class 0"
        )
    # interleave for a label-agnostic row order
    samples: list[Sample] = []
    for a, b in zip(buckets[True], buckets[False]):
        samples.extend((a, b))
    return Dataset(spec=spec, samples=samples)


def kfold_split(
    n_samples_or_dataset, folds: int = 5, rng: np.random.Generator | None = None
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Stratified folds: each label's indices are shuffled and dealt round-robin.

    Returns (train, test) index pairs; test folds are disjoint and cover all
    rows, sized within one element of n/folds per label.
    """
    if isinstance(n_samples_or_dataset, Dataset):
        y = n_samples_or_dataset.labels()
    else:
        y = np.asarray(n_samples_or_dataset, dtype=np.int64)
    n = y.size
    if folds < 2:
        raise ValueError("folds must be >= 2")
    if n < folds:
        raise ValueError(f"cannot split {n} samples into {folds} folds")
    rng = rng or np.random.default_rng(0)
    assignment = np.empty(n, dtype=np.int64)
    for lab in np.unique(y):
        idx = np.flatnonzero(y == lab)
        idx = idx[rng.permutation(idx.size)]
        assignment[idx] = np.arange(idx.size) % folds
    out = []
    everything = np.arange(n)
    for f in range(folds):
        test = everything[assignment == f]
        train = everything[assignment != f]
        out.append((train, test))
    return out


# ----------------------------------------------------------------------------
# Regeneration from the manifest seed
# ----------------------------------------------------------------------------


def regenerate_graph_and_config(spec: DatasetSpec, sample: Sample):
    """Rebuild the (graph, x0) pair of a stored sample from its draw stream."""
    if isinstance(spec.source, ToySource):
        side = spec.source.sync if sample.label else spec.source.nonsync
    else:
        side = None
    return _draw_sample(spec, sample.draw, side)


def resimulate_label(spec: DatasetSpec, sample: Sample) -> bool:
    """Recompute the stored sample's label from scratch (consistency check)."""
    g, x0 = regenerate_graph_and_config(spec, sample)
    return label_sample(spec.model, g, x0, spec.horizon, km=spec.km)


# ----------------------------------------------------------------------------
# Files: manifest JSON + dynamics CSV (rows laid out exactly like vectorize)
# ----------------------------------------------------------------------------

_FORMAT = "sync-dataset-v1"


def _source_to_dict(source) -> dict:
    def enc(v):
        return list(v) if isinstance(v, tuple) else v

    if isinstance(source, NwsSource):
        return {
            "kind": "nws",
            "n": enc(source.n),
            "k": source.k,
            "p": enc(source.p),
            "passes": enc(source.passes),
            "p_jitter": source.p_jitter,
        }
    return {
        "kind": "toy",
        "sync": source.sync,
        "nonsync": source.nonsync,
        "n": enc(source.n),
        "tree_max_degree": source.tree_max_degree,
        "tree_seed": source.tree_seed,
    }


def _source_from_dict(d: dict):
    def dec(v):
        return tuple(v) if isinstance(v, list) else v

    if d["kind"] == "nws":
        return NwsSource(
            n=dec(d["n"]),
            k=d["k"],
            p=dec(d["p"]),
            passes=dec(d["passes"]),
            p_jitter=d["p_jitter"],
        )
    if d["kind"] == "toy":
        return ToySource(
            sync=d["sync"],
            nonsync=d["nonsync"],
            n=dec(d["n"]),
            tree_max_degree=d["tree_max_degree"],
            tree_seed=d.get("tree_seed", 0),
        )
    raise ValueError(f"unknown source kind {d['kind']!r}")


def spec_to_dict(spec: DatasetSpec) -> dict:
    return {
        "model": spec.model,
        "source": _source_to_dict(spec.source),
        "r": spec.r,
        "horizon": spec.horizon,
        "samples_per_class": spec.samples_per_class,
        "include_graph_features": spec.include_graph_features,
        "kappa": spec.kappa,
        "seed": spec.seed,
        "km": {"coupling": spec.km.coupling, "step": spec.km.step},
        "name": spec.name,
    }


def spec_from_dict(d: dict) -> DatasetSpec:
    return DatasetSpec(
        model=d["model"],
        source=_source_from_dict(d["source"]),
        r=d["r"],
        horizon=d["horizon"],
        samples_per_class=d["samples_per_class"],
        include_graph_features=d["include_graph_features"],
        kappa=d["kappa"],
        seed=d["seed"],
        km=KmParams(coupling=d["km"]["coupling"], step=d["km"]["step"]),
        name=d.get("name", ""),
    )


def _csv_header(n: int, r: int, with_features: bool) -> list[str]:
    cols = [f"x_t{t}_v{v}" for t in range(r + 1) for v in range(n)]
    cols += ["q1", "q2", "q3"]
    if with_features:
        cols += list(FEATURE_NAMES)
    return cols


def save_dataset(
    ds: Dataset, directory, name: str, csv_comments=(), manifest_extra: dict | None = None
) -> tuple[str, str]:
    """Write <name>.manifest.json and <name>.dynamics.csv under ``directory``.

    Needs a fixed node count across samples (mixed-size datasets are only
    usable through subgraph restriction and are not file-serializable).
    ``csv_comments`` lines are written as leading ``#`` lines of the CSV and
    ``manifest_extra`` is merged into the manifest under the key "run".
    """
    ns = {s.dynamics.shape[1] for s in ds.samples}
    if len(ns) != 1:
        raise ValueError("cannot save a dataset with mixed node counts")
    n = ns.pop()
    os.makedirs(directory, exist_ok=True)
    csv_name = f"{name}.dynamics.csv"
    manifest = {
        "format": _FORMAT,
        "spec": spec_to_dict(ds.spec),
        "csv": csv_name,
        "n": n,
        "samples": [
            {
                "draw": s.draw,
                "label": int(s.label),
                "features": [int(v) for v in s.features.as_array()],
                "quartiles": list(s.quartiles),
            }
            for s in ds.samples
        ],
    }
    if manifest_extra is not None:
        manifest["run"] = manifest_extra
    manifest_path = os.path.join(directory, f"{name}.manifest.json")
    with open(manifest_path, "w", newline="\n") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")
    csv_path = os.path.join(directory, csv_name)
    wf = ds.spec.include_graph_features
    with open(csv_path, "w", newline="\n") as fh:
        for line in csv_comments:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_csv_header(n, ds.spec.r, wf))
        for s in ds.samples:
            writer.writerow([format(v, ".17g") for v in vectorize(s, ds.spec.r, wf)])
    return manifest_path, csv_path


def load_dataset(manifest_path) -> Dataset:
    """Inverse of :func:`save_dataset`; graphs are left for regeneration."""
    with open(manifest_path) as fh:
        manifest = json.load(fh)
    if manifest.get("format") != _FORMAT:
        raise ValueError(f"not a dataset manifest: {manifest_path}")
    spec = spec_from_dict(manifest["spec"])
    n = manifest["n"]
    csv_path = os.path.join(os.path.dirname(str(manifest_path)), manifest["csv"])
    with open(csv_path) as fh:
        body = [line for line in fh if not line.startswith("#")]
    rows = np.loadtxt(io.StringIO("".join(body)), delimiter=",", skiprows=1, ndmin=2)
    if rows.shape[0] != len(manifest["samples"]):
        raise ValueError("manifest and matrix row counts disagree")
    dyn_cols = n * (spec.r + 1)
    samples = []
    for meta, row in zip(manifest["samples"], rows):
        dyn = row[:dyn_cols].reshape(spec.r + 1, n)
        if spec.model in (FCA, GHM):
            dyn = dyn.astype(np.int64)
        samples.append(
            Sample(
                draw=meta["draw"],
                label=bool(meta["label"]),
                features=GraphFeatures(*[int(v) for v in meta["features"]]),
                quartiles=tuple(meta["quartiles"]),
                dynamics=dyn,
                graph=None,
            )
        )
    return Dataset(spec=spec, samples=samples)
