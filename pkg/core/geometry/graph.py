import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import List, Optional

import numpy as np

from core.intensity.config import PointConfig

from .grid import neighbor_pairs
from .shape import ShapeS
from .unionfind import component_labels

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GeomGraph:
    """
    G_S(ξ) in compressed sparse row form.

    `indptr`/`indices` hold each vertex's sorted neighbour list. Components are
    labelled 0..c-1 in order of their smallest vertex.
    """

    config: PointConfig
    shape: ShapeS
    edges: np.ndarray
    indptr: np.ndarray
    indices: np.ndarray
    component_id: np.ndarray
    component_sizes: np.ndarray = field(repr=False)

    @property
    def n_vertices(self) -> int:
        return len(self.config)

    @property
    def n_edges(self) -> int:
        return int(self.edges.shape[0])

    @property
    def n_components(self) -> int:
        return int(self.component_sizes.size)

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def degree(self) -> np.ndarray:
        return np.diff(self.indptr)

    def adjacency(self) -> List[List[int]]:
        return [self.neighbors(i).tolist() for i in range(self.n_vertices)]

    @cached_property
    def _component_members(self) -> List[np.ndarray]:
        order = np.argsort(self.component_id, kind="stable")
        bounds = np.cumsum(self.component_sizes)[:-1]
        return np.split(order, bounds) if self.n_vertices else []

    def components(self) -> List[np.ndarray]:
        """Vertex sets of the components, each sorted, in component-id order."""
        return self._component_members


def _csr(n: int, edges: np.ndarray):
    both = np.concatenate([edges, edges[:, ::-1]], axis=0) if len(edges) else np.zeros((0, 2), dtype=np.int64)
    order = np.lexsort((both[:, 1], both[:, 0]))
    both = both[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, both[:, 0] + 1, 1)
    return np.cumsum(indptr), both[:, 1].copy()


def graph_from_edges(config: PointConfig, shape: ShapeS, edges: np.ndarray) -> GeomGraph:
    n = len(config)
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    indptr, indices = _csr(n, edges)
    labels = component_labels(n, edges)
    sizes = np.bincount(labels, minlength=int(labels.max()) + 1 if n else 0).astype(np.int64)
    for array in (edges, indptr, indices, labels, sizes):
        array.setflags(write=False)
    return GeomGraph(config, shape, edges, indptr, indices, labels, sizes)


def build_graph(config: PointConfig, shape: ShapeS, threads: Optional[int] = 1) -> GeomGraph:
    """
    Builds G_S(ξ): an edge joins distinct vertices whose difference lies in the
    closed set S (minimum image on a torus window).
    """
    if shape.dimension != config.dimension:
        raise ValueError(f"Shape dimension {shape.dimension} does not match the {config.dimension}-dimensional config.")
    edges = neighbor_pairs(config.points, shape, config.window, threads=threads)
    graph = graph_from_edges(config, shape, edges)
    logger.debug(f"Built graph with {graph.n_vertices} vertices, {graph.n_edges} edges, {graph.n_components} components.")
    return graph


def connected_components(graph: GeomGraph) -> List[np.ndarray]:
    """The component partition of `graph` as sorted vertex arrays."""
    return graph.components()
