from dataclasses import dataclass, replace
from typing import Literal

import numpy as np

from core.utils.numerics import ball_volume

Norm = Literal["euclidean", "sup"]


@dataclass(frozen=True)
class ShapeS:
    """
    The symmetric structuring set S: a closed norm ball of radius ρ.

    Euclidean: S = B(0, ρ) with θ = 1. Sup-norm: S = ρ·[−1, 1]^d with θ = √d.
    In both cases B(0, ρ) ⊆ S ⊆ B(0, θρ).
    """

    norm: Norm
    rho: float
    dimension: int

    def __post_init__(self):
        if self.norm not in ("euclidean", "sup"):
            raise ValueError(f"Unsupported norm '{self.norm}'.")
        if not np.isfinite(self.rho) or self.rho <= 0:
            raise ValueError(f"Shape rho must be > 0, got {self.rho}.")
        if self.dimension < 1:
            raise ValueError(f"Shape dimension must be >= 1, got {self.dimension}.")

    @property
    def theta(self) -> float:
        return 1.0 if self.norm == "euclidean" else float(np.sqrt(self.dimension))

    @property
    def outer_radius(self) -> float:
        """θρ, the radius of the smallest centered Euclidean ball containing S."""
        return self.theta * self.rho

    @property
    def volume(self) -> float:
        if self.norm == "euclidean":
            return ball_volume(self.dimension, self.rho)
        return float((2.0 * self.rho) ** self.dimension)

    def gauge(self, x: np.ndarray) -> np.ndarray:
        """Norm of each row measured in units of ρ; membership is gauge ≤ 1."""
        x = np.atleast_2d(x)
        if self.norm == "euclidean":
            return np.sqrt(np.einsum("ij,ij->i", x, x)) / self.rho
        return np.max(np.abs(x), axis=1) / self.rho

    def contains(self, x: np.ndarray) -> np.ndarray:
        """Closed membership: a difference at exactly ρ is inside S."""
        x = np.atleast_2d(x)
        if self.norm == "euclidean":
            return np.einsum("ij,ij->i", x, x) <= self.rho * self.rho
        return np.max(np.abs(x), axis=1) <= self.rho

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Uniform points in S."""
        if self.norm == "sup":
            return self.rho * (2.0 * rng.random((n, self.dimension)) - 1.0)
        directions = rng.standard_normal((n, self.dimension))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
        return directions * (self.rho * rng.random(n) ** (1.0 / self.dimension))[:, None]

    def with_rho(self, rho: float) -> "ShapeS":
        return replace(self, rho=float(rho))

    def scaled(self, factor: float) -> "ShapeS":
        return self.with_rho(self.rho * factor)
