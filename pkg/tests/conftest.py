import itertools

import networkx as nx
import numpy as np
import pytest

from core.geometry.grid import brute_force_pairs
from core.geometry.shape import ShapeS
from core.intensity.config import PointConfig
from core.intensity.models import HomogeneousModel, RadialPowerModel
from core.intensity.window import Window
from core.utils.config_parser import load_app_config


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def disk():
    return ShapeS("euclidean", 1.0, 2)


@pytest.fixture
def torus():
    return Window.cube(2, 10.0, periodic=True)


@pytest.fixture
def box():
    return Window.cube(2, 10.0)


@pytest.fixture
def unit_rate():
    return HomogeneousModel(rate=1.0)


@pytest.fixture
def radial():
    return RadialPowerModel(alpha=1.0, gamma=3.0)


@pytest.fixture(scope="session")
def app_config():
    return load_app_config()


@pytest.fixture
def make_config():
    """Uniform random configuration of n points in a window."""

    def make(rng, n, window):
        points = window.lower + window.sides * rng.random((n, window.dimension))
        if window.kind == "ball":
            points = points[window.contains(points)]
        return PointConfig(points, window)

    return make


@pytest.fixture
def nx_graph():
    """networkx oracle built from the O(n²) pair list."""

    def build(config, shape):
        graph = nx.Graph()
        graph.add_nodes_from(range(len(config)))
        graph.add_edges_from(map(tuple, brute_force_pairs(config.points, shape, config.window)))
        return graph

    return build


@pytest.fixture
def connected_subset_count():
    """Brute-force number of k-subsets inducing a connected subgraph accepted by `keep`."""

    def count(graph, k, keep=lambda sub: True):
        total = 0
        for component in nx.connected_components(graph):
            if len(component) < k:
                continue
            for subset in itertools.combinations(sorted(component), k):
                sub = graph.subgraph(subset)
                if nx.is_connected(sub) and keep(sub):
                    total += 1
        return total

    return count
