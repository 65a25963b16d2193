"""Shared fixtures: tiny graphs with hand-checkable answers."""

import sys
from pathlib import Path

import numpy as np
import pytest

PROJECT_ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(PROJECT_ROOT))

from rsfsmooth.graph import Graph  # noqa: E402


def path_graph(n, w=1.0):
    u = np.arange(n - 1)
    return Graph.from_edges(n, u, u + 1, np.full(n - 1, float(w)), name=f"path{n}")


def ring_graph(n):
    u = np.arange(n)
    return Graph.from_edges(n, u, (u + 1) % n, name=f"ring{n}")


def random_connected_graph(n, p=0.4, seed=0):
    """Random weighted graph on n nodes, a path backbone keeps it connected."""
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    keep = (rng.random(iu.size) < p) | (ju == iu + 1)
    weights = rng.uniform(0.5, 2.0, keep.sum())
    return Graph.from_edges(n, iu[keep], ju[keep], weights, name=f"random{n}")


@pytest.fixture
def two_node():
    return path_graph(2)


@pytest.fixture
def path3():
    return path_graph(3)


@pytest.fixture
def path4():
    return path_graph(4)


@pytest.fixture
def small_graph():
    return random_connected_graph(8, seed=3)
