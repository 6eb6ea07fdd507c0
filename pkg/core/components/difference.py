from typing import List, Optional

import numpy as np

from core.geometry.graph import GeomGraph, build_graph
from core.geometry.shape import ShapeS
from core.intensity.config import PointConfig

from .census import component_adjacency
from .selector import Selector


def _graph_for(config: PointConfig, shape: ShapeS, graph: Optional[GeomGraph]) -> GeomGraph:
    if graph is None:
        return build_graph(config, shape)
    if graph.config is not config or graph.shape != shape:
        raise ValueError("Supplied graph was not built from this config and shape.")
    return graph


def _selected(graph: GeomGraph, selector: Selector, vertices: np.ndarray) -> bool:
    size = len(vertices)
    if not selector.accepts_size(size):
        return False
    if selector.variant != "iso_to_h":
        return True
    return selector.matches(size, component_adjacency(graph, vertices))


def neighbors_of_point(config: PointConfig, shape: ShapeS, x: np.ndarray) -> np.ndarray:
    """Indices of configuration points y with x − y ∈ S."""
    if not len(config):
        return np.zeros(0, dtype=np.int64)
    differences = config.window.min_image(config.points - x)
    return np.flatnonzero(shape.contains(differences))


def add_one_cost(
    config: PointConfig,
    shape: ShapeS,
    selector: Selector,
    x,
    graph: Optional[GeomGraph] = None,
) -> int:
    """
    D_x F(ξ) = F(ξ + δ_x) − F(ξ), computed locally: the components touched by
    x merge with it into one, everything else is unchanged.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    if config.index_of(x) >= 0:
        raise ValueError(f"Point {tuple(x)} is already in the configuration.")
    graph = _graph_for(config, shape, graph)

    touched = neighbors_of_point(config, shape, x)
    touched_ids = np.unique(graph.component_id[touched])
    components = graph.components()
    before = sum(_selected(graph, selector, components[cid]) for cid in touched_ids)

    merged_size = 1 + int(graph.component_sizes[touched_ids].sum())
    after = 0
    if selector.accepts_size(merged_size):
        if selector.variant == "iso_to_h":
            members = np.concatenate([components[cid] for cid in touched_ids] + [np.zeros(0, dtype=np.int64)])
            matrix = np.zeros((merged_size, merged_size), dtype=np.uint8)
            matrix[:-1, :-1] = component_adjacency(graph, members)
            hits = np.isin(members, touched)
            matrix[:-1, -1] = hits
            matrix[-1, :-1] = hits
            after = int(selector.matches(merged_size, matrix))
        else:
            after = 1
    return int(after - before)


def _bounded_pieces(graph: GeomGraph, removed: int, limit: int) -> List[np.ndarray]:
    """
    Pieces of the removed vertex's component once it is gone, explored by BFS
    that gives up past `limit` vertices. Oversized pieces are returned empty.
    """
    done = {removed}
    pieces = []
    for start in graph.neighbors(removed):
        start = int(start)
        if start in done:
            continue
        seen = {start}
        frontier = [start]
        oversized = False
        while frontier and not oversized:
            v = frontier.pop()
            for w in graph.neighbors(v):
                w = int(w)
                if w != removed and w not in seen:
                    seen.add(w)
                    frontier.append(w)
                    if len(seen) > limit:
                        oversized = True
                        break
        done |= seen
        if oversized:
            pieces.append(np.zeros(0, dtype=np.int64))
        else:
            pieces.append(np.array(sorted(seen), dtype=np.int64))
    return pieces


def remove_one_cost(
    config: PointConfig,
    shape: ShapeS,
    selector: Selector,
    index: int,
    graph: Optional[GeomGraph] = None,
) -> int:
    """F(ξ) − F(ξ − δ_x) for x the vertex at `index`, i.e. D_x F(ξ − δ_x)."""
    if not 0 <= index < len(config):
        raise IndexError(f"Vertex index {index} out of range for {len(config)} points.")
    graph = _graph_for(config, shape, graph)

    cid = int(graph.component_id[index])
    before = int(_selected(graph, selector, graph.components()[cid]))
    after = sum(
        _selected(graph, selector, piece)
        for piece in _bounded_pieces(graph, index, selector.k)
        if piece.size
    )
    return int(before - after)
