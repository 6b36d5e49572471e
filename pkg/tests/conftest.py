"""Shared shapes and file helpers for the test suite."""

import numpy as np
import pytest

# name -> (n, undirected edge list on indices 0..n-1); all n <= 6, m <= 7
SHAPES = {
    "single": (1, []),
    "edge": (2, [(0, 1)]),
    "path3": (3, [(0, 1), (1, 2)]),
    "triangle": (3, [(0, 1), (1, 2), (0, 2)]),
    "star4": (4, [(0, 1), (0, 2), (0, 3)]),
    "paw": (4, [(0, 1), (1, 2), (0, 2), (2, 3)]),
    "path5": (5, [(0, 1), (1, 2), (2, 3), (3, 4)]),
    "k4": (4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]),
    "bowtie": (5, [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (2, 4)]),
    "tree6": (6, [(0, 1), (0, 2), (1, 3), (1, 4), (2, 5)]),
    "c6chord": (6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5), (1, 4)]),
}


def build_graph(shape, p=0.5, theta=1.0):
    """Library graph for a named shape with node ids n0..n{n-1}."""
    from khopgame import Graph

    n, edges = SHAPES[shape]
    return Graph.build(
        [f"n{i}" for i in range(n)],
        [(f"n{a}", f"n{b}", p) for a, b in edges],
        theta=theta,
    )


def write_edge_file(path, edges, isolated=(), probs=None):
    """Write an edge-list file; `edges` holds (u, v) id pairs."""
    lines = []
    for i, (u, v) in enumerate(edges):
        if probs is not None:
            lines.append(f"{u} {v} {probs[i]}")
        else:
            lines.append(f"{u} {v}")
    for u in isolated:
        lines.append(str(u))
    path.write_text("\n".join(lines) + "\n")
    return str(path)


def random_gnm_edges(n, m, seed, prefix="v"):
    """Deterministic simple random graph as an identifier edge list."""
    rng = np.random.default_rng(seed)
    seen = set()
    edges = []
    while len(edges) < m:
        u, v = (int(x) for x in rng.integers(n, size=2))
        if u == v:
            continue
        key = (min(u, v), max(u, v))
        if key in seen:
            continue
        seen.add(key)
        edges.append((f"{prefix}{key[0]}", f"{prefix}{key[1]}"))
    return [f"{prefix}{i}" for i in range(n)], edges


@pytest.fixture
def edge_graph():
    from khopgame import Graph

    return Graph.build(["a", "b"], [("a", "b", 0.5)], theta=1.0)
