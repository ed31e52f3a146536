"""Graphs, probabilistic adjacencies, and Bernoulli edge sampling.

A binary graph is one sample from a matrix of independent edge probabilities.
This walk-through builds both objects, samples, and round-trips through the
JSONL serialization format.
"""
import tempfile

import numpy as np

from kgvae import (Graph, ProbAdjacency, load_jsonl, permute,
                   sample_adjacency, save_jsonl, soft_degrees)

# A 4-node path graph, built from an edge list.
path = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
print("path graph:", path)
print("adjacency:\n", path.adjacency)
print("degrees:", path.degrees())

# Relabeling the nodes permutes rows and columns together.
shuffled = permute(path, [3, 1, 0, 2])
print("\nafter relabeling [3,1,0,2]:\n", shuffled.adjacency)
print("degree multiset is preserved:", sorted(shuffled.degrees()))

# A probabilistic adjacency holds an independent edge probability per pair.
probs = np.array([
    [0.0, 0.9, 0.1, 0.1],
    [0.9, 0.0, 0.9, 0.1],
    [0.1, 0.9, 0.0, 0.9],
    [0.1, 0.1, 0.9, 0.0],
])
pa = ProbAdjacency(probs)
print("\nsoft degrees (row sums):", soft_degrees(pa))

# Sampling is deterministic given a seed; expected edge count is the sum of
# the upper-triangular probabilities.
expected = np.triu(pa.probs, k=1).sum()
counts = [sample_adjacency(pa, seed).num_edges() for seed in range(2000)]
print(f"expected edges {expected:.2f}, observed mean {np.mean(counts):.2f}")
print("one sample:\n", sample_adjacency(pa, 0).adjacency)

# Graphs serialize one-per-line as JSON records.
with tempfile.NamedTemporaryFile(mode="w", suffix=".jsonl", delete=False) as fh:
    jsonl_path = fh.name
save_jsonl(jsonl_path, [path, shuffled])
print("\nround-trip identical:", load_jsonl(jsonl_path) == [path, shuffled])
