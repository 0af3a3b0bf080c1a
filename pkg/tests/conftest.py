"""Shared fixtures for gpminer tests."""

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from gpminer.graph import build_graph


@pytest.fixture
def triangle():
    return build_graph([(0, 1), (1, 2), (0, 2)])


@pytest.fixture
def k4():
    return build_graph([(u, v) for u in range(4) for v in range(u + 1, 4)])


@pytest.fixture
def square_graph():
    """Edges {(0,1),(0,2),(1,3),(2,3)}: a 4-cycle."""
    return build_graph([(0, 1), (0, 2), (1, 3), (2, 3)])


@pytest.fixture
def star_graph():
    """Center 5 with leaves 2, 3, 4 (vertices 0 and 1 isolated)."""
    return build_graph([(5, 2), (5, 3), (5, 4)], num_vertices=6)


@pytest.fixture
def motif_graph():
    """Two disjoint triangles and one disjoint wedge."""
    return build_graph([
        (0, 1), (1, 2), (0, 2),
        (3, 4), (4, 5), (3, 5),
        (6, 7), (7, 8),
    ])


@pytest.fixture
def labeled_edges_graph():
    """Five disjoint edges, every endpoint labeled 0."""
    edges = [(2 * i, 2 * i + 1) for i in range(5)]
    return build_graph(edges, labels=[0] * 10)


@pytest.fixture
def labeled_wedges_graph():
    """Three disjoint copies of the labeled wedge 0 - 1 - 2 (center labeled 1)."""
    edges, labels = [], []
    for copy in range(3):
        a, b, c = 3 * copy, 3 * copy + 1, 3 * copy + 2
        edges += [(a, b), (b, c)]
        labels += [0, 1, 2]
    return build_graph(edges, labels=labels)
