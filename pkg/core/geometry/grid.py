import itertools
import logging
from typing import List, Optional, Tuple

import numpy as np
from joblib import Parallel, delayed

from core.intensity.window import Window

from .shape import ShapeS

logger = logging.getLogger(__name__)

MAX_POINTS = 2**31


class SpatialGrid:
    """
    Uniform grid with cell side ≥ θρ. Only occupied cells are stored, as
    lexicographically sorted coordinate rows. Every S-neighbour of a point lies
    in one of the 3^d cells around the point's own cell.
    """

    def __init__(self, points: np.ndarray, shape: ShapeS, window: Window):
        self.points = np.atleast_2d(points)
        self.shape = shape
        self.window = window
        width = shape.outer_radius

        if window.periodic:
            sides = window.sides
            if np.any(sides < 2.0 * width):
                raise ValueError(
                    f"Torus sides {tuple(sides)} must be at least 2θρ = {2.0 * width:g} for unique minimum images."
                )
            self.n_cells = np.maximum(np.floor(sides / width), 1).astype(np.int64)
            self.cell_width = sides / self.n_cells
            coords = np.floor((self.points - window.lower) / self.cell_width).astype(np.int64)
            self.coords = np.mod(coords, self.n_cells)
        else:
            self.cell_width = np.full(window.dimension, width)
            self.coords = np.floor((self.points - self.points.min(axis=0)) / width).astype(np.int64)

        cells, inverse, counts = np.unique(self.coords, axis=0, return_inverse=True, return_counts=True)
        self.order = np.argsort(inverse.reshape(-1), kind="stable")
        self.cell_coords = cells
        self.cell_counts = counts
        self.cell_starts = np.cumsum(counts) - counts

    @property
    def n_occupied(self) -> int:
        return len(self.cell_coords)

    def locate(self, target: np.ndarray) -> np.ndarray:
        """Index of the occupied cell equal to each row of `target`, or -1."""
        m = self.n_occupied
        rows, inverse = np.unique(np.concatenate([self.cell_coords, target]), axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
        slot = np.full(len(rows), -1, dtype=np.int64)
        slot[inverse[:m]] = np.arange(m)
        return slot[inverse[m:]]

    def offsets(self) -> List[Tuple[int, ...]]:
        return list(itertools.product((-1, 0, 1), repeat=self.window.dimension))

    def candidate_pairs(self, offset: Tuple[int, ...]) -> Tuple[np.ndarray, np.ndarray]:
        """All (i, j), i < j, with j in the cell displaced by `offset` from i's cell."""
        target = self.cell_coords + np.asarray(offset, dtype=np.int64)
        if self.window.periodic:
            target = np.mod(target, self.n_cells)
        pos = self.locate(target)
        src = np.flatnonzero(pos >= 0)
        dst = pos[src]
        if src.size == 0:
            return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)

        count_a = self.cell_counts[src]
        count_b = self.cell_counts[dst]
        sizes = count_a * count_b
        block = np.repeat(np.arange(src.size), sizes)
        local = np.arange(int(sizes.sum())) - np.repeat(np.cumsum(sizes) - sizes, sizes)
        i = self.order[self.cell_starts[src][block] + local // count_b[block]]
        j = self.order[self.cell_starts[dst][block] + local % count_b[block]]
        keep = i < j
        return i[keep], j[keep]

    def edges_for(self, offset: Tuple[int, ...]) -> np.ndarray:
        i, j = self.candidate_pairs(offset)
        if i.size == 0:
            return np.zeros((0, 2), dtype=np.int64)
        differences = self.window.min_image(self.points[j] - self.points[i])
        hit = self.shape.contains(differences)
        return np.column_stack([i[hit], j[hit]])


def neighbor_pairs(
    points: np.ndarray,
    shape: ShapeS,
    window: Window,
    threads: Optional[int] = 1,
) -> np.ndarray:
    """
    Edge list (i < j, lexicographically sorted) of the rule x_i − x_j ∈ S.

    Offsets of the 3^d neighbourhood are processed independently (optionally on
    a thread pool); the merged list is sorted, so the result never depends on
    the partitioning.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n = points.shape[0] if points.size else 0
    if n > MAX_POINTS:
        raise ValueError("config too large")
    if n < 2:
        return np.zeros((0, 2), dtype=np.int64)

    grid = SpatialGrid(points, shape, window)
    offsets = grid.offsets()
    if threads and threads > 1:
        parts = Parallel(n_jobs=threads, prefer="threads")(delayed(grid.edges_for)(o) for o in offsets)
    else:
        parts = [grid.edges_for(o) for o in offsets]

    edges = np.concatenate(parts, axis=0)
    # Few cells per torus axis make distinct offsets alias the same neighbour cell.
    edges = np.unique(edges, axis=0) if len(edges) else edges.reshape(0, 2)
    logger.debug(f"Grid search over {grid.n_occupied} occupied cells found {len(edges)} edges among {n} points.")
    return edges.astype(np.int64)


def brute_force_pairs(points: np.ndarray, shape: ShapeS, window: Window) -> np.ndarray:
    """O(n²) reference for `neighbor_pairs`."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n = points.shape[0] if points.size else 0
    i, j = np.triu_indices(n, k=1)
    if i.size == 0:
        return np.zeros((0, 2), dtype=np.int64)
    hit = shape.contains(window.min_image(points[j] - points[i]))
    return np.column_stack([i[hit], j[hit]]).astype(np.int64)
