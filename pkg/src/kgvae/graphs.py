"""Graph containers, Bernoulli edge sampling, padding, and JSONL serialization.

All graphs are undirected and simple: adjacency matrices are symmetric with a
zero diagonal. Symmetry is enforced at construction by mirroring the upper
triangle, so the lower triangle of whatever the caller passes is ignored.
"""
from __future__ import annotations

import json

import numpy as np

from .errors import ParseError, ValidationError

# Strictly-interior probability band used where a log of p or 1-p is taken.
PROB_EPS = 1e-12


def _square(matrix, name: str) -> np.ndarray:
    arr = np.asarray(matrix)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValidationError(f"{name} must be a square matrix, got shape {arr.shape}")
    return arr


class Graph:
    """Observed graph: node count, binary symmetric adjacency, optional node features."""

    __slots__ = ("n", "adjacency", "features")

    def __init__(self, adjacency, features=None):
        adj = _square(adjacency, "adjacency")
        n = adj.shape[0]
        if n < 1:
            raise ValidationError("graph needs at least one node")
        vals = np.unique(adj)
        if not np.all(np.isin(vals, (0, 1))):
            raise ValidationError(f"adjacency entries must be 0/1, found {vals[:5]}")
        upper = np.triu(adj.astype(np.int64), k=1)
        self.n = n
        self.adjacency = upper + upper.T
        self.adjacency.setflags(write=False)
        if features is not None:
            features = np.asarray(features, dtype=np.float64)
            if features.ndim != 2 or features.shape[0] != n:
                raise ValidationError(
                    f"features must have {n} rows, got shape {features.shape}"
                )
            features = features.copy()
            features.setflags(write=False)
        self.features = features

    @classmethod
    def from_edges(cls, n, edges, features=None) -> "Graph":
        adj = np.zeros((n, n), dtype=np.int64)
        for i, j in edges:
            if i == j:
                raise ValidationError(f"self-loop ({i},{j}) is not allowed")
            if not (0 <= i < n and 0 <= j < n):
                raise ValidationError(f"edge ({i},{j}) out of range for n={n}")
            adj[i, j] = adj[j, i] = 1
        return cls(adj, features)

    @classmethod
    def empty(cls, n) -> "Graph":
        return cls(np.zeros((n, n), dtype=np.int64))

    @classmethod
    def complete(cls, n) -> "Graph":
        return cls(np.ones((n, n), dtype=np.int64) - np.eye(n, dtype=np.int64))

    def edges(self) -> list[tuple[int, int]]:
        """Undirected edge list, each edge once with i < j."""
        ii, jj = np.nonzero(np.triu(self.adjacency, k=1))
        return list(zip(ii.tolist(), jj.tolist()))

    def num_edges(self) -> int:
        return int(self.adjacency.sum()) // 2

    def degrees(self) -> np.ndarray:
        return self.adjacency.sum(axis=1)

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        if self.n != other.n or not np.array_equal(self.adjacency, other.adjacency):
            return False
        if (self.features is None) != (other.features is None):
            return False
        return self.features is None or np.array_equal(self.features, other.features)

    __hash__ = None

    def __repr__(self):
        return f"Graph(n={self.n}, edges={self.num_edges()})"


class ProbAdjacency:
    """Matrix of independent edge probabilities: symmetric, zero diagonal, entries in [0,1]."""

    __slots__ = ("n", "probs")

    def __init__(self, probs):
        mat = _square(probs, "probs").astype(np.float64)
        n = mat.shape[0]
        if n < 1:
            raise ValidationError("probabilistic adjacency needs at least one node")
        if np.any(mat < -PROB_EPS) or np.any(mat > 1.0 + PROB_EPS):
            bad = mat[(mat < -PROB_EPS) | (mat > 1.0 + PROB_EPS)]
            raise ValidationError(f"edge probabilities outside [0,1]: {bad[:5]}")
        if np.max(np.abs(mat - mat.T)) > 1e-9:
            raise ValidationError("edge probability matrix is not symmetric within 1e-9")
        upper = np.triu(np.clip(mat, 0.0, 1.0), k=1)
        self.n = n
        self.probs = upper + upper.T
        self.probs.setflags(write=False)

    @classmethod
    def constant(cls, n, p) -> "ProbAdjacency":
        return cls(np.full((n, n), float(p)) * (1.0 - np.eye(n)))

    def interior_probs(self, eps: float = PROB_EPS) -> np.ndarray:
        """Probabilities clamped into [eps, 1-eps] for safe logs downstream."""
        return np.clip(self.probs, eps, 1.0 - eps)

    def __repr__(self):
        return f"ProbAdjacency(n={self.n})"


class PaddedBatch:
    """Graphs embedded in fixed-size zero-padded adjacency matrices plus node masks."""

    __slots__ = ("graphs", "n_max", "adjacencies", "masks")

    def __init__(self, graphs, n_max, adjacencies, masks):
        self.graphs = graphs
        self.n_max = n_max
        self.adjacencies = adjacencies
        self.masks = masks

    def __len__(self):
        return len(self.graphs)


def pad_batch(graphs, n_max: int | None = None) -> PaddedBatch:
    """Zero-pad every adjacency into the top-left block of an n_max x n_max matrix.

    n_max defaults to the largest node count in the list; a larger value may be
    given (e.g. a dataset-wide maximum) but never a smaller one.
    """
    graphs = list(graphs)
    if not graphs:
        raise ValidationError("cannot pad an empty batch of graphs")
    biggest = max(g.n for g in graphs)
    if n_max is None:
        n_max = biggest
    elif n_max < biggest:
        raise ValidationError(f"n_max={n_max} smaller than largest graph ({biggest})")
    adjacencies = []
    masks = []
    for g in graphs:
        padded = np.zeros((n_max, n_max), dtype=np.float64)
        padded[: g.n, : g.n] = g.adjacency
        mask = np.zeros(n_max, dtype=bool)
        mask[: g.n] = True
        adjacencies.append(padded)
        masks.append(mask)
    return PaddedBatch(graphs, n_max, adjacencies, masks)


def sample_adjacency(pa: ProbAdjacency, seed) -> Graph:
    """Draw a binary graph: each upper-triangular entry is an independent Bernoulli.

    Deterministic given the seed (an int, a SeedSequence, or a Generator).
    """
    rng = np.random.default_rng(seed)
    u = rng.random((pa.n, pa.n))
    upper = np.triu(u < pa.probs, k=1)
    return Graph((upper | upper.T).astype(np.int64))


def soft_degrees(x) -> np.ndarray:
    """Row sums of a (probabilistic) adjacency; equals integer degrees on binary graphs."""
    if isinstance(x, Graph):
        return x.adjacency.sum(axis=1).astype(np.float64)
    if isinstance(x, ProbAdjacency):
        return x.probs.sum(axis=1)
    return np.asarray(x, dtype=np.float64).sum(axis=1)


def permute(g: Graph, perm) -> Graph:
    """Relabel nodes: node i of the result is node perm[i] of the input."""
    perm = np.asarray(perm)
    if perm.shape != (g.n,) or not np.array_equal(np.sort(perm), np.arange(g.n)):
        raise ValidationError(f"perm must be a permutation of 0..{g.n - 1}")
    adj = g.adjacency[np.ix_(perm, perm)]
    feats = None if g.features is None else g.features[perm]
    return Graph(adj, feats)


def _graph_to_record(g: Graph) -> dict:
    record = {"n": g.n, "edges": [[int(i), int(j)] for i, j in g.edges()]}
    record["features"] = None if g.features is None else g.features.tolist()
    return record


def _graph_from_record(record, line: int | None = None) -> Graph:
    if not isinstance(record, dict) or "n" not in record or "edges" not in record:
        raise ParseError("record must be an object with 'n' and 'edges'", line)
    n = record["n"]
    if not isinstance(n, int) or n < 1:
        raise ParseError(f"invalid node count {n!r}", line)
    edges = record["edges"]
    adj = np.zeros((n, n), dtype=np.int64)
    for e in edges:
        if not (isinstance(e, (list, tuple)) and len(e) == 2):
            raise ParseError(f"edge {e!r} is not a pair", line)
        i, j = e
        if not (isinstance(i, int) and isinstance(j, int)):
            raise ParseError(f"edge {e!r} has non-integer endpoints", line)
        if i == j:
            raise ParseError(f"self-loop ({i},{j})", line)
        if not (0 <= i < n and 0 <= j < n):
            raise ParseError(f"edge index out of range in ({i},{j}) for n={n}", line)
        adj[i, j] = adj[j, i] = 1
    features = record.get("features")
    if features is not None:
        features = np.asarray(features, dtype=np.float64)
        if features.ndim != 2 or features.shape[0] != n:
            raise ParseError(f"features must be an {n}-row matrix", line)
    try:
        return Graph(adj, features)
    except ValidationError as exc:
        raise ParseError(str(exc), line) from exc


def save_jsonl(path, graphs) -> None:
    """Write one graph per line: {"n": int, "edges": [[i,j],...], "features": ...|null}."""
    with open(path, "w") as fh:
        for g in graphs:
            fh.write(json.dumps(_graph_to_record(g)) + "\n")


def load_jsonl(path) -> list[Graph]:
    graphs = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                record = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON ({exc.msg})", lineno) from exc
            graphs.append(_graph_from_record(record, lineno))
    return graphs
