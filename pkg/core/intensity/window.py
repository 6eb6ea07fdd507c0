from dataclasses import dataclass
from typing import Literal, Sequence, Tuple

import numpy as np

from core.utils.numerics import ball_volume

WindowKind = Literal["box", "ball", "torus-box"]


@dataclass(frozen=True)
class Window:
    """
    Bounded simulation window. `half_extent` is stored per axis; a ball keeps
    its radius in every entry.
    """

    kind: WindowKind
    center: Tuple[float, ...]
    half_extent: Tuple[float, ...]

    def __post_init__(self):
        if self.kind not in ("box", "ball", "torus-box"):
            raise ValueError(f"Unknown window kind '{self.kind}'.")
        if len(self.center) == 0:
            raise ValueError("Window dimension must be a positive integer.")
        if len(self.half_extent) != len(self.center):
            raise ValueError(
                f"half_extent has {len(self.half_extent)} entries for a {len(self.center)}-dimensional window."
            )
        if any(not np.isfinite(h) or h <= 0 for h in self.half_extent):
            raise ValueError(f"half_extent must be strictly positive in every axis, got {self.half_extent}.")
        if self.kind == "ball" and len(set(self.half_extent)) != 1:
            raise ValueError("A ball window needs a single radius.")

    @classmethod
    def box(cls, center: Sequence[float], half_extent: Sequence[float]) -> "Window":
        return cls("box", tuple(float(c) for c in center), tuple(float(h) for h in half_extent))

    @classmethod
    def torus(cls, center: Sequence[float], half_extent: Sequence[float]) -> "Window":
        return cls("torus-box", tuple(float(c) for c in center), tuple(float(h) for h in half_extent))

    @classmethod
    def ball(cls, center: Sequence[float], radius: float) -> "Window":
        center = tuple(float(c) for c in center)
        return cls("ball", center, (float(radius),) * len(center))

    @classmethod
    def cube(cls, d: int, half: float, periodic: bool = False) -> "Window":
        kind = "torus-box" if periodic else "box"
        return cls(kind, (0.0,) * d, (float(half),) * d)

    @property
    def dimension(self) -> int:
        return len(self.center)

    @property
    def periodic(self) -> bool:
        return self.kind == "torus-box"

    @property
    def radius(self) -> float:
        return self.half_extent[0]

    @property
    def lower(self) -> np.ndarray:
        return np.asarray(self.center) - np.asarray(self.half_extent)

    @property
    def upper(self) -> np.ndarray:
        return np.asarray(self.center) + np.asarray(self.half_extent)

    @property
    def sides(self) -> np.ndarray:
        return 2.0 * np.asarray(self.half_extent)

    @property
    def bounding_volume(self) -> float:
        return float(np.prod(self.sides))

    @property
    def volume(self) -> float:
        if self.kind == "ball":
            return ball_volume(self.dimension, self.radius)
        return self.bounding_volume

    def contains(self, points: np.ndarray, margin: float = 0.0) -> np.ndarray:
        """Membership of each row, optionally in the window shrunk by `margin`."""
        points = np.atleast_2d(points)
        offsets = points - np.asarray(self.center)
        if self.kind == "ball":
            return np.linalg.norm(offsets, axis=1) <= self.radius - margin
        return np.all(np.abs(offsets) <= np.asarray(self.half_extent) - margin, axis=1)

    def min_image(self, differences: np.ndarray) -> np.ndarray:
        """Wraps coordinate differences to the nearest periodic image on a torus."""
        if not self.periodic:
            return differences
        sides = self.sides
        return differences - sides * np.round(differences / sides)

    def wrap(self, points: np.ndarray) -> np.ndarray:
        if not self.periodic:
            return points
        lower = self.lower
        return lower + np.mod(points - lower, self.sides)

    def nearest_origin_distance(self) -> float:
        """Euclidean distance from the origin to the closest point of the window."""
        if self.kind == "ball":
            return max(float(np.linalg.norm(self.center)) - self.radius, 0.0)
        closest = np.clip(0.0, self.lower, self.upper)
        return float(np.linalg.norm(closest))
