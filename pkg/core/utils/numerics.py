from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np
from scipy import integrate, special

from .seeding import derive_rng


def sphere_area(d: int) -> float:
    """Surface area ω_d of the unit sphere in ℝ^d (ω_1 = 2, ω_2 = 2π)."""
    return float(2.0 * np.pi ** (d / 2.0) / special.gamma(d / 2.0))


def ball_volume(d: int, radius: float = 1.0) -> float:
    return float(np.pi ** (d / 2.0) / special.gamma(d / 2.0 + 1.0) * radius**d)


def radial_integral(profile: Callable[[float], float], d: int, upper: float = np.inf) -> float:
    """∫_{‖x‖ ≤ upper} f(‖x‖) dx for a radial profile f, by adaptive quadrature."""
    value, _ = integrate.quad(lambda r: profile(r) * r ** (d - 1), 0.0, upper, limit=200)
    return sphere_area(d) * value


def uniform_in_ball(rng: np.random.Generator, n: int, d: int, radius: float) -> np.ndarray:
    directions = rng.standard_normal((n, d))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    radii = radius * rng.random(n) ** (1.0 / d)
    return directions * radii[:, None]


def uniform_directions(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    directions = rng.standard_normal((n, d))
    return directions / np.linalg.norm(directions, axis=1, keepdims=True)


@dataclass(frozen=True)
class Estimate:
    """A Monte Carlo (or exact, std_error = 0) estimate."""

    value: float
    std_error: float
    evaluations: int = 0

    @property
    def exact(self) -> bool:
        return self.std_error == 0.0

    def __float__(self) -> float:
        return self.value


def chunked_mean(
    draw: Callable[[np.random.Generator, int], np.ndarray],
    n_samples: int,
    seed: int,
    chunk_size: int = 10000,
    stream: int = 0,
) -> Tuple[float, float, int]:
    """
    Mean and standard error of `draw` outputs over `n_samples` draws.

    Draws happen in fixed-size chunks, each with its own derived generator,
    and the partial sums are combined in chunk order.
    """
    if n_samples < 2:
        raise ValueError(f"n_samples must be >= 2, got {n_samples}.")
    total = 0.0
    total_sq = 0.0
    count = 0
    for chunk_index, start in enumerate(range(0, n_samples, chunk_size)):
        size = min(chunk_size, n_samples - start)
        values = np.asarray(draw(derive_rng(seed, stream, chunk_index), size), dtype=float)
        total += float(values.sum())
        total_sq += float(np.square(values).sum())
        count += values.size
    mean = total / count
    variance = max(total_sq / count - mean**2, 0.0) * count / (count - 1)
    return mean, float(np.sqrt(variance / count)), count
