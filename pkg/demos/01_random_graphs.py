"""Random graph sources: small-world draws and fixed toy topologies.

The generator starts from a ring where every node is joined to its k nearest
neighbors, then sweeps all non-ring pairs M times, adding each with
probability p/(n-k-1) per pass. The closed-form expected edge count lets us
sanity-check a Monte Carlo sample. Toy topologies (complete, ring, path,
bounded-degree tree) are the fixed graphs used by the topology-pair datasets.
"""

import numpy as np

from syncpred.graph import (
    NwsParams,
    complete_graph,
    expected_edge_count,
    graph_features,
    is_connected,
    nws_generate,
    random_tree,
    ring_graph,
)

rng = np.random.default_rng(7)

params = NwsParams(n=30, k=2, p=0.65, passes=1)
draws = [nws_generate(params, rng) for _ in range(2000)]
counts = np.array([len(g.edges) for g in draws])
print(f"small-world n=30 k=2 p=0.65: mean edges {counts.mean():.2f} "
      f"(formula {expected_edge_count(params):.2f}), std {counts.std():.2f}")
print(f"connected: {sum(is_connected(g) for g in draws)}/2000")

# doubling the pass count roughly doubles the shortcut mass
dense = NwsParams(n=30, k=2, p=0.65, passes=2)
print(f"same p, two passes: formula {expected_edge_count(dense):.2f}")

# the five per-graph features every classifier can optionally see
g = nws_generate(params, rng)
f = graph_features(g)
print(f"one draw: {f.as_array()}  (edges, min deg, max deg, diameter, nodes)")

# fixed topologies with known synchronization behavior
for g, name in (
    (complete_graph(8), "complete_8"),
    (ring_graph(8), "ring_8"),
    (random_tree(8, np.random.default_rng(0), max_degree=4), "tree_8"),
):
    feats = graph_features(g)
    print(f"{name:10s} edges={len(g.edges):2d} diameter={feats.diameter}")
