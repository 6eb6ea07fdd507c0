import logging
from collections import Counter
from dataclasses import dataclass, field
from math import factorial
from typing import Dict, Iterator, List, Literal, Sequence, Set, Tuple

import numpy as np

from core.geometry.graph import GeomGraph

from .selector import Selector, canonical_form

logger = logging.getLogger(__name__)

BoundaryMode = Literal["raw", "eroded", "torus"]

DEFAULT_U_CAP = 40


@dataclass(frozen=True)
class ComponentCensus:
    """Component counts by size and, up to `depth`, by isomorphism class."""

    counts_by_size: Dict[int, int]
    counts_by_isoclass: Dict[Tuple[int, str], int]
    total_components: int
    depth: int
    boundary: BoundaryMode = "raw"
    excluded: int = field(default=0)

    def count(self, selector: Selector) -> int:
        """F_S^A read off the census (requires depth ≥ selector.k)."""
        if selector.k > self.depth:
            raise ValueError(f"Census depth {self.depth} is below selector k={selector.k}.")
        if selector.variant == "iso_to_h":
            return self.counts_by_isoclass.get((selector.k, selector.h_code), 0)
        return sum(n for size, n in self.counts_by_size.items() if selector.accepts_size(size))


def component_adjacency(graph: GeomGraph, vertices: Sequence[int]) -> np.ndarray:
    """Induced adjacency matrix of `vertices` (in the given order)."""
    local = {int(v): i for i, v in enumerate(vertices)}
    matrix = np.zeros((len(local), len(local)), dtype=np.uint8)
    for i, v in enumerate(vertices):
        for w in graph.neighbors(int(v)):
            j = local.get(int(w))
            if j is not None:
                matrix[i, j] = 1
    return matrix


def kept_components(graph: GeomGraph, boundary: BoundaryMode = "raw", depth: int = 1) -> np.ndarray:
    """
    Boolean mask over component ids for the boundary policy. "eroded" keeps a
    component only when all its vertices lie at least depth·θρ inside the window.
    """
    n_components = graph.n_components
    if boundary == "raw":
        return np.ones(n_components, dtype=bool)
    window = graph.config.window
    if boundary == "torus":
        if not window.periodic:
            raise ValueError("Boundary mode 'torus' needs a torus-box window.")
        return np.ones(n_components, dtype=bool)
    if boundary != "eroded":
        raise ValueError(f"Unknown boundary mode '{boundary}'.")
    if window.periodic:
        return np.ones(n_components, dtype=bool)
    inside = window.contains(graph.config.points, margin=depth * graph.shape.outer_radius)
    outside_count = np.bincount(graph.component_id[~inside], minlength=n_components)
    return outside_count == 0


def selected_mask(graph: GeomGraph, selector: Selector, boundary: BoundaryMode = "raw") -> np.ndarray:
    """Per component id: does the component belong to A (and survive the boundary policy)?"""
    sizes = graph.component_sizes
    mask = np.array([selector.accepts_size(int(s)) for s in sizes], dtype=bool)
    if selector.variant == "iso_to_h" and mask.any():
        components = graph.components()
        for cid in np.flatnonzero(mask):
            mask[cid] = selector.matches(int(sizes[cid]), component_adjacency(graph, components[cid]))
    return mask & kept_components(graph, boundary, selector.k)


def count_f(graph: GeomGraph, selector: Selector, boundary: BoundaryMode = "raw") -> int:
    """F_S^A: the number of components whose vertex set lies in A."""
    return int(selected_mask(graph, selector, boundary).sum())


def census(graph: GeomGraph, depth: int = 3, boundary: BoundaryMode = "raw") -> ComponentCensus:
    kept = kept_components(graph, boundary, depth)
    sizes = graph.component_sizes[kept]
    by_size = dict(sorted(Counter(int(s) for s in sizes).items()))

    by_class: Counter = Counter()
    components = graph.components()
    for cid in np.flatnonzero(kept & (graph.component_sizes <= depth)):
        vertices = components[cid]
        by_class[(len(vertices), canonical_form(component_adjacency(graph, vertices)))] += 1

    return ComponentCensus(
        counts_by_size=by_size,
        counts_by_isoclass=dict(sorted(by_class.items())),
        total_components=int(kept.sum()),
        depth=depth,
        boundary=boundary,
        excluded=int((~kept).sum()),
    )


def connected_subsets(graph: GeomGraph, vertices: Sequence[int], k: int) -> Iterator[Tuple[int, ...]]:
    """
    Every connected induced k-subset inside `vertices`, each exactly once
    (enumeration rooted at the subset's smallest vertex).
    """
    members = set(int(v) for v in vertices)
    adjacency = {v: [int(w) for w in graph.neighbors(v) if int(w) in members] for v in members}

    def extend(subset: List[int], extension: Set[int], closed: Set[int], root: int):
        if len(subset) == k:
            yield tuple(sorted(subset))
            return
        extension = set(extension)
        while extension:
            w = extension.pop()
            fresh = {u for u in adjacency[w] if u > root and u not in closed}
            yield from extend(subset + [w], extension | fresh, closed | fresh, root)

    for root in sorted(members):
        first = {u for u in adjacency[root] if u > root}
        yield from extend([root], first, first | {root}, root)


def count_u(graph: GeomGraph, selector: Selector, cap: int = DEFAULT_U_CAP) -> int:
    """
    U_S^A: ordered k-tuples of distinct vertices inducing a connected graph in A,
    i.e. k! times the number of such vertex subsets.
    """
    if selector.variant == "empty":
        return 0
    if not selector.fixed_size:
        raise ValueError("count_u needs a fixed-size selector (exactly_k or iso_to_h).")
    k = selector.k
    sizes = graph.component_sizes
    if k == 1:
        return int(sizes.sum())

    subsets = 0
    for cid, vertices in enumerate(graph.components()):
        if sizes[cid] < k:
            continue
        if sizes[cid] > cap:
            raise ValueError(f"U enumeration infeasible: component of {int(sizes[cid])} vertices exceeds cap {cap}.")
        for subset in connected_subsets(graph, vertices, k):
            if selector.variant == "iso_to_h" and not selector.matches(k, component_adjacency(graph, subset)):
                continue
            subsets += 1
    return factorial(k) * subsets
