from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from .window import Window


@dataclass(frozen=True)
class PointConfig:
    """A finite point configuration inside a simulation window."""

    points: np.ndarray
    window: Window
    seed_provenance: Tuple[int, int] = field(default=(0, 0))

    def __post_init__(self):
        points = np.array(self.points, dtype=float, copy=True).reshape(-1, self.window.dimension)
        points.setflags(write=False)
        object.__setattr__(self, "points", points)

    @property
    def dimension(self) -> int:
        return self.window.dimension

    def __len__(self) -> int:
        return self.points.shape[0]

    def validate(self) -> None:
        """Checks the window and distinctness invariants."""
        if len(self) and not np.all(self.window.contains(self.points)):
            raise ValueError("PointConfig has points outside its window.")
        if len(self) != len(np.unique(self.points, axis=0)):
            raise RuntimeError("PointConfig contains duplicate points.")

    def index_of(self, x: np.ndarray) -> int:
        """Index of an existing point equal to `x`, or -1."""
        if not len(self):
            return -1
        hits = np.flatnonzero(np.all(self.points == np.asarray(x, dtype=float), axis=1))
        return int(hits[0]) if hits.size else -1

    def with_point(self, x: np.ndarray) -> "PointConfig":
        x = np.asarray(x, dtype=float).reshape(1, -1)
        return PointConfig(np.vstack([self.points, x]), self.window, self.seed_provenance)

    def without(self, index: int) -> "PointConfig":
        if not 0 <= index < len(self):
            raise IndexError(f"Vertex index {index} out of range for {len(self)} points.")
        return PointConfig(np.delete(self.points, index, axis=0), self.window, self.seed_provenance)
