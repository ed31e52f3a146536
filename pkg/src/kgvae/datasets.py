"""Synthetic graph corpora (grids and lobster trees), JSONL ingestion, and
the seeded train/test split."""
from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .graphs import Graph, load_jsonl, save_jsonl  # noqa: F401 (re-exported)

# Per-preset generator parameters: (dimension/backbone range, node-count range
# as a half-open interval [lo, hi)).
GRID_PRESETS = {
    "paper": {"dims": (10, 19), "nodes": (100, 400)},
    "desk": {"dims": (3, 5), "nodes": (9, 26)},
}
LOBSTER_PRESETS = {
    "paper": {"backbone": (2, 12), "nodes": (10, 101)},
    "desk": {"backbone": (1, 4), "nodes": (8, 21)},
}
LOBSTER_P1 = 0.7
LOBSTER_P2 = 0.7


def make_grid(rows: int, cols: int) -> Graph:
    """2D lattice: node (r, c) is adjacent to its horizontal/vertical neighbours."""
    if rows < 2 or cols < 2:
        raise ValidationError(f"grid dimensions must be >= 2, got {rows}x{cols}")
    edges = []
    for r in range(rows):
        for c in range(cols):
            idx = r * cols + c
            if c + 1 < cols:
                edges.append((idx, idx + 1))
            if r + 1 < rows:
                edges.append((idx, idx + cols))
    return Graph.from_edges(rows * cols, edges)


def make_lobster(backbone_len: int, p1: float, p2: float, seed) -> Graph:
    """Tree built from a backbone path in two passes of geometric attachment.

    Pass one: each backbone node repeatedly gains a pendant while a uniform
    draw stays below p1. Pass two: each first-level pendant repeatedly gains a
    second-level pendant while a draw stays below p2. Stripping leaves twice
    from the result leaves the backbone path.
    """
    if backbone_len < 1:
        raise ValidationError("backbone must have at least one node")
    for name, p in (("p1", p1), ("p2", p2)):
        if not (0.0 <= p < 1.0):
            raise ValidationError(f"{name} must lie in [0, 1); got {p} "
                                  "(geometric attachment diverges at 1)")
    rng = np.random.default_rng(seed)
    edges = [(i, i + 1) for i in range(backbone_len - 1)]
    next_node = backbone_len
    first_level = []
    for b in range(backbone_len):
        while rng.random() < p1:
            edges.append((b, next_node))
            first_level.append(next_node)
            next_node += 1
    for q in first_level:
        while rng.random() < p2:
            edges.append((q, next_node))
            next_node += 1
    return Graph.from_edges(next_node, edges)


def make_corpus(kind: str, count: int, size_range=None, seed=0, *,
                dim_range=None, backbone_range=None,
                p1: float = LOBSTER_P1, p2: float = LOBSTER_P2,
                preset: str | None = None) -> list[Graph]:
    """Seeded corpus of `count` graphs with node counts inside [lo, hi).

    Parameters may be given directly (size_range plus dim_range or
    backbone_range) or through a named preset ("paper" or "desk").
    """
    if count < 1:
        raise ValidationError("count must be >= 1")
    if kind not in ("grid", "lobster"):
        raise ValidationError(f"unknown corpus kind {kind!r}")
    if preset is not None:
        table = GRID_PRESETS if kind == "grid" else LOBSTER_PRESETS
        if preset not in table:
            raise ValidationError(f"unknown preset {preset!r}")
        size_range = size_range or table[preset]["nodes"]
        if kind == "grid":
            dim_range = dim_range or table[preset]["dims"]
        else:
            backbone_range = backbone_range or table[preset]["backbone"]
    if size_range is None:
        raise ValidationError("size_range is required without a preset")
    lo, hi = size_range
    rng = np.random.default_rng(seed)

    if kind == "grid":
        if dim_range is None:
            raise ValidationError("grid corpora need dim_range")
        dims = range(dim_range[0], dim_range[1] + 1)
        admissible = [(r, c) for r in dims for c in dims if lo <= r * c < hi]
        if not admissible:
            raise ValidationError(f"no grid dimensions in {dim_range} give "
                                  f"node counts in [{lo}, {hi})")
        picks = rng.integers(0, len(admissible), size=count)
        return [make_grid(*admissible[i]) for i in picks]

    if backbone_range is None:
        raise ValidationError("lobster corpora need backbone_range")
    graphs = []
    attempts = 0
    max_attempts = 10_000 * count
    while len(graphs) < count:
        if attempts >= max_attempts:
            raise ValidationError(
                f"could not draw {count} lobsters with sizes in [{lo}, {hi}) "
                f"from backbones {backbone_range}; admissible set looks empty"
            )
        attempts += 1
        backbone = int(rng.integers(backbone_range[0], backbone_range[1] + 1))
        g = make_lobster(backbone, p1, p2, rng)
        if lo <= g.n < hi:
            graphs.append(g)
    return graphs


def split(graphs, train_frac: float = 0.8, seed=0) -> tuple[list[Graph], list[Graph]]:
    """Seeded shuffle followed by a prefix split into (train, test)."""
    graphs = list(graphs)
    if len(graphs) < 2:
        raise ValidationError("need at least 2 graphs to split")
    if not (0.0 < train_frac < 1.0):
        raise ValidationError(f"train_frac must be in (0, 1), got {train_frac}")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(graphs))
    k = int(round(train_frac * len(graphs)))
    k = min(max(k, 1), len(graphs) - 1)
    train = [graphs[i] for i in order[:k]]
    test = [graphs[i] for i in order[k:]]
    return train, test
