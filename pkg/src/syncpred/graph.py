"""Undirected graphs: generators, statistics, fingerprints, orderings, subsampling."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Graph",
    "NwsParams",
    "GraphFeatures",
    "ring_graph",
    "path_graph",
    "complete_graph",
    "random_tree",
    "lattice_graph",
    "nws_generate",
    "expected_edge_count",
    "graph_features",
    "is_connected",
    "fingerprint",
    "sample_connected_subgraph",
    "rcm_order",
    "bandwidth",
    "write_edge_list",
    "read_edge_list",
]


class Graph:
    """Simple undirected graph on nodes labeled 0..n-1.

    Edges are stored as a sorted tuple of (u, v) pairs with u < v; adjacency
    lists are sorted tuples. Instances are treated as immutable.
    """

    __slots__ = ("n", "edges", "neighbors")

    def __init__(self, n: int, edges) -> None:
        if n < 1:
            raise ValueError(f"graph needs at least one node, got n={n}")
        seen: set[tuple[int, int]] = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u},{v}) out of range for n={n}")
            if u == v:
                raise ValueError(f"self-loop at node {u}")
            seen.add((u, v) if u < v else (v, u))
        self.n = n
        self.edges: tuple[tuple[int, int], ...] = tuple(sorted(seen))
        adj: list[list[int]] = [[] for _ in range(n)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        self.neighbors: tuple[tuple[int, ...], ...] = tuple(tuple(sorted(a)) for a in adj)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def degrees(self) -> np.ndarray:
        return np.array([len(a) for a in self.neighbors], dtype=np.int64)

    def adjacency_matrix(self) -> np.ndarray:
        """Dense 0/1 adjacency matrix (float64), built on demand."""
        a = np.zeros((self.n, self.n))
        if self.edges:
            e = np.asarray(self.edges)
            a[e[:, 0], e[:, 1]] = 1.0
            a[e[:, 1], e[:, 0]] = 1.0
        return a

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.neighbors[u]

    def __eq__(self, other) -> bool:
        return isinstance(other, Graph) and self.n == other.n and self.edges == other.edges

    def __hash__(self) -> int:
        return hash((self.n, self.edges))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.num_edges})"


@dataclass(frozen=True)
class NwsParams:
    """Parameters of the ring-plus-shortcuts small-world generator.

    n : node count (>= 3)
    k : even ring degree, each node tied to its k nearest ring neighbors;
        k = n - 1 saturates to the complete graph
    p : shortcut probability knob in [0, 1]
    passes : number of independent shortcut-adding sweeps (>= 1)
    """

    n: int
    k: int = 2
    p: float = 0.0
    passes: int = 1

    def validate(self) -> None:
        if self.n < 3:
            raise ValueError(f"n must be >= 3, got {self.n}")
        if self.k % 2 != 0 or not (2 <= self.k <= self.n - 1):
            raise ValueError(f"k must be even with 2 <= k <= n-1, got k={self.k} for n={self.n}")
        if not (0.0 <= self.p <= 1.0):
            raise ValueError(f"p must be in [0, 1], got {self.p}")
        if self.passes < 1:
            raise ValueError(f"passes must be >= 1, got {self.passes}")


@dataclass(frozen=True)
class GraphFeatures:
    """The five basic per-graph statistics used as classifier features."""

    num_edges: int
    min_degree: int
    max_degree: int
    diameter: int
    num_nodes: int

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.num_edges, self.min_degree, self.max_degree, self.diameter, self.num_nodes],
            dtype=np.float64,
        )


FEATURE_NAMES = ("num_edges", "min_degree", "max_degree", "diameter", "num_nodes")


# ----------------------------------------------------------------------------
# Fixed topologies
# ----------------------------------------------------------------------------


def ring_graph(n: int) -> Graph:
    """Cycle on n >= 3 nodes."""
    if n < 3:
        raise ValueError("ring needs n >= 3")
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def path_graph(n: int) -> Graph:
    """Path 0-1-...-(n-1)."""
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def complete_graph(n: int) -> Graph:
    return Graph(n, [(u, v) for u in range(n) for v in range(u + 1, n)])


def random_tree(n: int, rng: np.random.Generator, max_degree: int | None = None) -> Graph:
    """Random tree by sequential attachment, optionally degree-capped.

    Node v in 1..n-1 attaches to a uniformly random earlier node whose degree
    is still below ``max_degree``. Leaves always qualify, so a cap >= 2 never
    dead-ends.
    """
    if n < 1:
        raise ValueError("tree needs n >= 1")
    if max_degree is not None and max_degree < 2 and n > 2:
        raise ValueError("max_degree < 2 cannot host a tree with n > 2")
    deg = [0] * n
    edges = []
    for v in range(1, n):
        if max_degree is None:
            parent = int(rng.integers(v))
        else:
            ok = [u for u in range(v) if deg[u] < max_degree]
            parent = ok[int(rng.integers(len(ok)))]
        edges.append((parent, v))
        deg[parent] += 1
        deg[v] += 1
    return Graph(n, edges)


def lattice_graph(rows: int, cols: int) -> Graph:
    """2D grid with 4-neighborhood, nodes numbered row-major."""
    if rows < 1 or cols < 1:
        raise ValueError("lattice needs positive dimensions")
    edges = []
    for r in range(rows):
        for c in range(cols):
            u = r * cols + c
            if c + 1 < cols:
                edges.append((u, u + 1))
            if r + 1 < rows:
                edges.append((u, u + cols))
    return Graph(rows * cols, edges)


def _ring_lattice_edges(n: int, k: int) -> set[tuple[int, int]]:
    edges: set[tuple[int, int]] = set()
    for i in range(n):
        for j in range(1, k // 2 + 1):
            v = (i + j) % n
            edges.add((i, v) if i < v else (v, i))
    return edges


# ----------------------------------------------------------------------------
# Small-world generator
# ----------------------------------------------------------------------------


def nws_generate(params: NwsParams, rng: np.random.Generator) -> Graph:
    """Draw one ring-plus-shortcuts graph.

    Start from the k-nearest-neighbor ring; each initially absent pair then
    becomes an edge with probability p/(n-k-1) in each of ``passes``
    independent sweeps. The sweeps collapse to a single Bernoulli draw per
    pair with success probability 1-(1-p/(n-k-1))^passes, which is sampled
    directly. The ring keeps the result connected.
    """
    params.validate()
    n, k = params.n, params.k
    ring = _ring_lattice_edges(n, k)
    candidates = sorted(
        (u, v) for u in range(n) for v in range(u + 1, n) if (u, v) not in ring
    )
    edges = set(ring)
    if candidates:
        q = params.p / (n - k - 1)
        q_total = 1.0 - (1.0 - q) ** params.passes
        hits = rng.random(len(candidates)) < q_total
        edges.update(c for c, h in zip(candidates, hits) if h)
    return Graph(n, edges)


def expected_edge_count(params: NwsParams) -> float:
    """Closed-form mean edge count of :func:`nws_generate`."""
    params.validate()
    n, k = params.n, params.k
    ring = n * k // 2 if k < n - 1 else n * (n - 1) // 2
    pairs = n * (n - 1) // 2
    if pairs == ring:
        return float(ring)
    q = params.p / (n - k - 1)
    return ring + (pairs - ring) * (1.0 - (1.0 - q) ** params.passes)


# ----------------------------------------------------------------------------
# Statistics
# ----------------------------------------------------------------------------


def _bfs_distances(g: Graph, source: int) -> np.ndarray:
    dist = np.full(g.n, -1, dtype=np.int64)
    dist[source] = 0
    frontier = [source]
    while frontier:
        nxt = []
        for u in frontier:
            for v in g.neighbors[u]:
                if dist[v] < 0:
                    dist[v] = dist[u] + 1
                    nxt.append(v)
        frontier = nxt
    return dist


def is_connected(g: Graph) -> bool:
    """True iff a BFS from node 0 reaches every node."""
    return bool(np.all(_bfs_distances(g, 0) >= 0))


def graph_features(g: Graph) -> GraphFeatures:
    """Edge count, min/max degree, diameter, node count.

    Diameter is the maximum BFS eccentricity; raises on disconnected input.
    """
    deg = g.degrees()
    diameter = 0
    for s in range(g.n):
        dist = _bfs_distances(g, s)
        if np.any(dist < 0):
            raise ValueError("diameter undefined: graph is disconnected")
        diameter = max(diameter, int(dist.max()))
    return GraphFeatures(
        num_edges=g.num_edges,
        min_degree=int(deg.min()),
        max_degree=int(deg.max()),
        diameter=diameter,
        num_nodes=g.n,
    )


def fingerprint(g: Graph) -> str:
    """Relabeling-invariant digest of a graph.

    Hashes the sorted degree sequence, the sorted multiset of per-node sorted
    neighbor-degree lists, and the edge count. Isomorphic graphs always agree;
    distinct graphs may rarely collide (accepted heuristic).
    """
    deg = g.degrees()
    neigh_degs = sorted(tuple(sorted(int(deg[u]) for u in g.neighbors[v])) for v in range(g.n))
    payload = f"n={g.n};m={g.num_edges};deg={sorted(deg.tolist())};nd={neigh_degs}"
    return hashlib.sha256(payload.encode()).hexdigest()


# ----------------------------------------------------------------------------
# Subgraphs and orderings
# ----------------------------------------------------------------------------


def sample_connected_subgraph(
    g: Graph, n0: int, rng: np.random.Generator
) -> tuple[tuple[int, ...], Graph]:
    """Grow a random connected induced subgraph of exactly n0 nodes.

    Starts at a uniform node and repeatedly absorbs a uniformly random
    neighbor of the current node set (random-frontier growth). Returns the
    selected original labels in ascending order together with the induced
    subgraph relabeled so that ``nodes[i]`` becomes node i.
    """
    if not (1 <= n0 <= g.n):
        raise ValueError(f"n0 must be in [1, {g.n}], got {n0}")
    chosen = {int(rng.integers(g.n))}
    frontier: set[int] = set()
    for u in chosen:
        frontier.update(g.neighbors[u])
    frontier -= chosen
    while len(chosen) < n0:
        if not frontier:
            raise ValueError("graph is disconnected: frontier exhausted")
        pool = sorted(frontier)
        v = pool[int(rng.integers(len(pool)))]
        chosen.add(v)
        frontier.update(g.neighbors[v])
        frontier -= chosen
    nodes = tuple(sorted(chosen))
    index = {v: i for i, v in enumerate(nodes)}
    sub_edges = [(index[u], index[v]) for u, v in g.edges if u in index and v in index]
    return nodes, Graph(n0, sub_edges)


def rcm_order(g: Graph) -> np.ndarray:
    """Reverse Cuthill-McKee node ordering.

    BFS from a minimum-degree node with neighbors visited in increasing-degree
    order (ties by label), then the visit order is reversed. Returns ``perm``
    with ``perm[i]`` = node placed at position i.
    """
    deg = g.degrees()
    visited = np.zeros(g.n, dtype=bool)
    order: list[int] = []
    while len(order) < g.n:
        rest = np.flatnonzero(~visited)
        start = int(rest[np.argmin(deg[rest])])
        visited[start] = True
        queue = [start]
        while queue:
            u = queue.pop(0)
            order.append(u)
            nxt = sorted((int(deg[v]), v) for v in g.neighbors[u] if not visited[v])
            for _, v in nxt:
                visited[v] = True
                queue.append(v)
    return np.array(order[::-1], dtype=np.int64)


def bandwidth(g: Graph, order: np.ndarray) -> int:
    """Max index distance across edges under the given node ordering."""
    order = np.asarray(order)
    if sorted(order.tolist()) != list(range(g.n)):
        raise ValueError("order is not a permutation of 0..n-1")
    pos = np.empty(g.n, dtype=np.int64)
    pos[order] = np.arange(g.n)
    if not g.edges:
        return 0
    e = np.asarray(g.edges)
    return int(np.abs(pos[e[:, 0]] - pos[e[:, 1]]).max())


# ----------------------------------------------------------------------------
# Edge-list files: first line "n m", then one "u v" line per edge
# ----------------------------------------------------------------------------


def write_edge_list(g: Graph, path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(f"{g.n} {g.num_edges}\n")
        for u, v in g.edges:
            fh.write(f"{u} {v}\n")


def read_edge_list(path) -> Graph:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError("edge-list header must be 'n m'")
        n, m = int(header[0]), int(header[1])
        edges = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            u, v = line.split()
            edges.append((int(u), int(v)))
    if len(edges) != m:
        raise ValueError(f"edge-list declares {m} edges but contains {len(edges)}")
    return Graph(n, edges)
