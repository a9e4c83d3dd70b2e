"""Coupled-oscillator models on graphs: stepping, simulation, concentration tests."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph

__all__ = [
    "KM",
    "FCA",
    "GHM",
    "MODELS",
    "TWO_PI",
    "PhaseConfig",
    "KmParams",
    "Trajectory",
    "km_step",
    "fca_step",
    "ghm_step",
    "step",
    "simulate",
    "circular_width",
    "is_concentrated",
    "is_synchronized",
    "centered_coloring",
    "displacement_matrix",
    "random_config",
    "random_concentrated_config",
    "write_trajectory_csv",
]

KM = "km"
FCA = "fca"
GHM = "ghm"
MODELS = (KM, FCA, GHM)

TWO_PI = 2.0 * np.pi
DEFAULT_SYNC_TOL = 1e-3


def _check_model(model: str) -> None:
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}, expected one of {MODELS}")


@dataclass(frozen=True)
class PhaseConfig:
    """Per-node phases, continuous on [0, 2*pi) or discrete in {0,...,kappa-1}.

    ``kappa is None`` marks the continuous space. Values are normalized and
    validated on construction; instances are immutable.
    """

    values: np.ndarray
    kappa: int | None = None

    def __post_init__(self) -> None:
        if self.kappa is None:
            v = np.mod(np.asarray(self.values, dtype=np.float64), TWO_PI)
            v[v >= TWO_PI] = 0.0
        else:
            if self.kappa < 3:
                raise ValueError(f"kappa must be >= 3, got {self.kappa}")
            v = np.asarray(self.values)
            if not np.issubdtype(v.dtype, np.integer):
                if not np.all(v == np.floor(v)):
                    raise ValueError("discrete config needs integer values")
            v = v.astype(np.int64)
            if v.size and (v.min() < 0 or v.max() >= self.kappa):
                raise ValueError(f"colors must lie in 0..{self.kappa - 1}")
        if v.ndim != 1 or v.size == 0:
            raise ValueError("config must be a nonempty 1-d array")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def continuous(cls, values) -> "PhaseConfig":
        return cls(values=np.asarray(values, dtype=np.float64), kappa=None)

    @classmethod
    def discrete(cls, values, kappa: int) -> "PhaseConfig":
        return cls(values=np.asarray(values), kappa=kappa)

    @property
    def is_discrete(self) -> bool:
        return self.kappa is not None

    @property
    def n(self) -> int:
        return int(self.values.size)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PhaseConfig)
            and self.kappa == other.kappa
            and np.array_equal(self.values, other.values)
        )


@dataclass(frozen=True)
class KmParams:
    """Coupling strength and Euler step of the continuous model (zero intrinsic frequencies)."""

    coupling: float = 1.0
    step: float = 0.05

    def validate(self) -> None:
        if self.coupling <= 0:
            raise ValueError(f"coupling must be > 0, got {self.coupling}")
        if self.step <= 0:
            raise ValueError(f"step must be > 0, got {self.step}")


def _check_match(g: Graph, x: PhaseConfig, want_discrete: bool) -> None:
    if x.n != g.n:
        raise ValueError(f"config has {x.n} nodes, graph has {g.n}")
    if want_discrete and not x.is_discrete:
        raise ValueError("model needs a discrete config")
    if not want_discrete and x.is_discrete:
        raise ValueError("model needs a continuous config")


# ----------------------------------------------------------------------------
# Single steps (simultaneous update from the old configuration)
# ----------------------------------------------------------------------------


def _km_kernel(adj: np.ndarray, v: np.ndarray, params: KmParams) -> np.ndarray:
    # sum_u sin(x_u - x_v) over neighbors = cos(x_v)*(A sin x)_v - sin(x_v)*(A cos x)_v
    s, c = np.sin(v), np.cos(v)
    drift = c * (adj @ s) - s * (adj @ c)
    out = np.mod(v + params.step * params.coupling * drift, TWO_PI)
    out[out >= TWO_PI] = 0.0
    return out


def _fca_kernel(adj: np.ndarray, v: np.ndarray, kappa: int) -> np.ndarray:
    blink = (kappa - 1) // 2
    sees_blink = (adj @ (v == blink).astype(np.float64)) > 0.5
    keep = (v > blink) & sees_blink
    return np.where(keep, v, (v + 1) % kappa)


def _ghm_kernel(adj: np.ndarray, v: np.ndarray, kappa: int) -> np.ndarray:
    excited = (adj @ (v == 1).astype(np.float64)) > 0.5
    return np.where(v == 0, np.where(excited, 1, 0), (v + 1) % kappa)


def km_step(g: Graph, x: PhaseConfig, params: KmParams | None = None) -> PhaseConfig:
    """One simultaneous update X'(v) = X(v) + h*K*sum_{u~v} sin(X(u)-X(v)) mod 2*pi."""
    params = params or KmParams()
    params.validate()
    _check_match(g, x, want_discrete=False)
    return PhaseConfig(_km_kernel(g.adjacency_matrix(), x.values, params))


def fca_step(g: Graph, x: PhaseConfig) -> PhaseConfig:
    """One firefly update: a color above the blinking color b = (kappa-1)//2 holds
    still iff some neighbor shows exactly b; every other node advances by one mod kappa."""
    _check_match(g, x, want_discrete=True)
    return PhaseConfig(_fca_kernel(g.adjacency_matrix(), x.values, x.kappa), kappa=x.kappa)


def ghm_step(g: Graph, x: PhaseConfig) -> PhaseConfig:
    """One excitation update: a rested node (color 0) fires to 1 iff a neighbor is
    excited (color 1), otherwise rests; every nonzero color advances by one mod kappa."""
    _check_match(g, x, want_discrete=True)
    return PhaseConfig(_ghm_kernel(g.adjacency_matrix(), x.values, x.kappa), kappa=x.kappa)


def step(model: str, g: Graph, x: PhaseConfig, params: KmParams | None = None) -> PhaseConfig:
    """Apply one update of the named model."""
    _check_model(model)
    if model == KM:
        return km_step(g, x, params)
    if model == FCA:
        return fca_step(g, x)
    return ghm_step(g, x)


# ----------------------------------------------------------------------------
# Width, concentration, synchronization
# ----------------------------------------------------------------------------


def circular_width(x: PhaseConfig) -> float | int:
    """Extent of the occupied phases around the circle.

    Continuous: length of the minimal covering arc, i.e. 2*pi minus the
    largest circular gap between sorted phases. Discrete: size of the minimal
    run of consecutive colors (mod kappa) covering all used colors; a single
    color has span 1.
    """
    if x.is_discrete:
        used = np.unique(x.values)
        if used.size == 1:
            return 1
        gaps = np.diff(used)
        wrap = used[0] + x.kappa - used[-1]
        return int(x.kappa - max(int(gaps.max()), int(wrap)) + 1)
    v = np.sort(x.values)
    if v.size == 1:
        return 0.0
    gaps = np.diff(v)
    wrap = v[0] + TWO_PI - v[-1]
    return float(TWO_PI - max(float(gaps.max()), float(wrap)))


def is_concentrated(model: str, x: PhaseConfig) -> bool:
    """Half-circle confinement test that predicts eventual synchronization.

    Continuous model: covering arc strictly below pi. Firefly: color span
    strictly below kappa/2. Excitation model: concentrated means already
    synchronized (all colors equal).
    """
    _check_model(model)
    if model == KM:
        if x.is_discrete:
            raise ValueError("continuous config expected")
        return circular_width(x) < np.pi
    if not x.is_discrete:
        raise ValueError("discrete config expected")
    if model == GHM:
        return bool(np.all(x.values == x.values[0]))
    return circular_width(x) < x.kappa / 2


def is_synchronized(x: PhaseConfig, tol: float = DEFAULT_SYNC_TOL) -> bool:
    """All-equal colors (discrete) or covering arc below ``tol`` (continuous)."""
    if x.is_discrete:
        return bool(np.all(x.values == x.values[0]))
    if tol <= 0:
        raise ValueError(f"tol must be > 0, got {tol}")
    return circular_width(x) < tol


# ----------------------------------------------------------------------------
# Trajectories
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class Trajectory:
    """Configurations X_0..X_t of one model run on one graph.

    ``stop_iteration`` is set when the run halted early in an absorbing
    synchronized state; ``config_at`` then extrapolates exactly (all-zero
    stays put, a synchronized firefly state rotates one color per step, a
    tightly clustered continuous state is held fixed).
    """

    model: str
    graph: Graph
    configs: tuple[PhaseConfig, ...]
    stop_iteration: int | None = None

    def __post_init__(self) -> None:
        _check_model(self.model)
        if not self.configs:
            raise ValueError("trajectory needs at least X_0")
        k0 = self.configs[0].kappa
        for c in self.configs:
            if c.kappa != k0 or c.n != self.graph.n:
                raise ValueError("all configs must share one space and node count")

    @property
    def length(self) -> int:
        """Number of stored configurations (last index + 1)."""
        return len(self.configs)

    def config_at(self, t: int) -> PhaseConfig:
        """X_t, extrapolating past an early stop in the absorbing state."""
        if t < 0:
            raise ValueError("t must be >= 0")
        if t < len(self.configs):
            return self.configs[t]
        if self.stop_iteration is None:
            raise ValueError(f"trajectory has no iteration {t}")
        last = self.configs[-1]
        if self.model == FCA:
            shift = t - (len(self.configs) - 1)
            return PhaseConfig((last.values + shift) % last.kappa, kappa=last.kappa)
        return last

    def values_matrix(self, upto: int | None = None) -> np.ndarray:
        """Rows X_0..X_upto stacked, shape (upto+1, n)."""
        top = (len(self.configs) - 1) if upto is None else upto
        return np.stack([self.config_at(t).values for t in range(top + 1)])


def simulate(
    model: str,
    g: Graph,
    x0: PhaseConfig,
    t_max: int,
    params: KmParams | None = None,
    early_stop: bool = True,
    sync_tol: float = DEFAULT_SYNC_TOL,
) -> Trajectory:
    """Run ``t_max`` updates of the named model from X_0.

    Stops early once the absorbing synchronized state is reached (all-zero for
    the excitation model, all-equal for the firefly model, covering arc below
    ``sync_tol`` for the continuous model); the stop index is recorded and
    later configurations are recovered exactly by ``config_at``.
    """
    _check_model(model)
    if t_max < 0:
        raise ValueError("t_max must be >= 0")
    discrete = model in (FCA, GHM)
    _check_match(g, x0, want_discrete=discrete)
    if model == KM:
        params = params or KmParams()
        params.validate()

    def absorbed(c: PhaseConfig) -> bool:
        if model == GHM:
            return bool(np.all(c.values == 0))
        return is_synchronized(c, tol=sync_tol)

    adj = g.adjacency_matrix()
    configs = [x0]
    stop = 0 if (early_stop and absorbed(x0)) else None
    if stop is None:
        v = x0.values
        for t in range(1, t_max + 1):
            if model == KM:
                v = _km_kernel(adj, v, params)
                c = PhaseConfig(v)
            elif model == FCA:
                v = _fca_kernel(adj, v, x0.kappa)
                c = PhaseConfig(v, kappa=x0.kappa)
            else:
                v = _ghm_kernel(adj, v, x0.kappa)
                c = PhaseConfig(v, kappa=x0.kappa)
            configs.append(c)
            if early_stop and absorbed(c):
                stop = t
                break
    return Trajectory(model=model, graph=g, configs=tuple(configs), stop_iteration=stop)


def centered_coloring(traj: Trajectory) -> Trajectory:
    """Derived view with config at index t shifted by -t mod kappa.

    A synchronizing discrete trajectory becomes eventually constant in time.
    """
    if not traj.configs[0].is_discrete:
        raise ValueError("centered coloring is defined for discrete trajectories only")
    kappa = traj.configs[0].kappa
    shifted = tuple(
        PhaseConfig((c.values - t) % kappa, kappa=kappa) for t, c in enumerate(traj.configs)
    )
    return Trajectory(
        model=traj.model, graph=traj.graph, configs=shifted, stop_iteration=traj.stop_iteration
    )


def displacement_matrix(g: Graph, x: PhaseConfig) -> np.ndarray:
    """Pairwise circular phase distance masked by adjacency.

    Entry (i, j) is min((X_i - X_j) mod period, (X_j - X_i) mod period) when
    (i, j) is an edge, else 0. Symmetric with zero diagonal.
    """
    if x.n != g.n:
        raise ValueError(f"config has {x.n} nodes, graph has {g.n}")
    period = x.kappa if x.is_discrete else TWO_PI
    v = x.values.astype(np.float64)
    d = np.mod(v[:, None] - v[None, :], period)
    delta = np.minimum(d, period - d) * g.adjacency_matrix()
    if x.is_discrete:
        return delta.astype(np.int64)
    return delta


def random_config(
    model: str, g: Graph, rng: np.random.Generator, kappa: int = 5
) -> PhaseConfig:
    """I.i.d. uniform phases: [0, 2*pi) per node, or colors {0,...,kappa-1}."""
    _check_model(model)
    if model == KM:
        return PhaseConfig(rng.random(g.n) * TWO_PI)
    return PhaseConfig(rng.integers(0, kappa, size=g.n), kappa=kappa)


def random_concentrated_config(
    model: str, g: Graph, rng: np.random.Generator, kappa: int = 5
) -> PhaseConfig:
    """Random config already confined to the half-circle.

    Continuous: uniform inside an arc of length 0.9*pi at a uniform offset.
    Discrete: two adjacent colors at a uniform offset (span 2). The excitation
    model gets a constant config, its only concentrated kind.
    """
    _check_model(model)
    if model == KM:
        start = rng.random() * TWO_PI
        return PhaseConfig(np.mod(start + rng.random(g.n) * (0.9 * np.pi), TWO_PI))
    if model == GHM:
        return PhaseConfig(np.full(g.n, rng.integers(0, kappa)), kappa=kappa)
    base = int(rng.integers(0, kappa))
    return PhaseConfig((base + rng.integers(0, 2, size=g.n)) % kappa, kappa=kappa)


def write_trajectory_csv(traj: Trajectory, path, upto: int | None = None, comments=()) -> None:
    """One row per iteration: t then the per-node phases; header t,v0,...,v{n-1}.

    ``comments`` lines are written first, each prefixed with ``# ``.
    """
    n = traj.graph.n
    mat = traj.values_matrix(upto=upto)
    with open(path, "w", newline="\n") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        fh.write("t," + ",".join(f"v{i}" for i in range(n)) + "\n")
        discrete = traj.configs[0].is_discrete
        for t, row in enumerate(mat):
            if discrete:
                cells = ",".join(str(int(v)) for v in row)
            else:
                cells = ",".join(format(float(v), ".17g") for v in row)
            fh.write(f"{t},{cells}\n")
