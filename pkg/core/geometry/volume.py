import itertools
import logging
from typing import Optional, Sequence

import numpy as np

from core.utils.numerics import Estimate
from core.utils.seeding import derive_rng

from .shape import ShapeS

logger = logging.getLogger(__name__)

_EXACT_BOX_LIMIT = 6


def lens_area(rho: float, s):
    """Area of the intersection of two radius-ρ disks whose centres are s apart."""
    s = np.minimum(np.asarray(s, dtype=float), 2.0 * rho)
    area = 2.0 * rho**2 * np.arccos(s / (2.0 * rho)) - 0.5 * s * np.sqrt(4.0 * rho**2 - s * s)
    area = np.where(s >= 2.0 * rho, 0.0, area)
    return float(area) if area.ndim == 0 else area


def interval_union_lengths(centers: np.ndarray, rho: float) -> np.ndarray:
    """Length of ∪[c − ρ, c + ρ] for each row of centers (n, k, 1)."""
    ordered = np.sort(centers[:, :, 0], axis=1)
    return 2.0 * rho + np.minimum(np.diff(ordered, axis=1), 2.0 * rho).sum(axis=1)


def box_union_volumes(centers: np.ndarray, rho: float) -> np.ndarray:
    """Inclusion–exclusion over the axis-parallel cubes centre ± ρ, per row of (n, k, d)."""
    n, k, _ = centers.shape
    total = np.zeros(n)
    for size in range(1, k + 1):
        sign = 1.0 if size % 2 else -1.0
        for subset in itertools.combinations(range(k), size):
            chosen = centers[:, list(subset), :]
            overlap = np.clip(chosen.min(axis=1) - chosen.max(axis=1) + 2.0 * rho, 0.0, None)
            total += sign * overlap.prod(axis=1)
    return total


def exact_union_volumes(shape: ShapeS, centers: np.ndarray) -> Optional[np.ndarray]:
    """
    λ(∪ᵢ(S + cᵢ)) for each row of centers (n, k, d) where a closed form exists:
    one set, d = 1, sup-norm cubes up to six sets and two Euclidean disks.
    None otherwise.
    """
    n, k, d = centers.shape
    if k == 1:
        return np.full(n, shape.volume)
    if d == 1:
        return interval_union_lengths(centers, shape.rho)
    if shape.norm == "sup" and k <= _EXACT_BOX_LIMIT:
        return box_union_volumes(centers, shape.rho)
    if shape.norm == "euclidean" and d == 2 and k == 2:
        s = np.linalg.norm(centers[:, 1, :] - centers[:, 0, :], axis=1)
        return 2.0 * shape.volume - lens_area(shape.rho, s)
    return None


def _hit_or_miss(
    shape: ShapeS,
    centers: np.ndarray,
    rel_error: float,
    batch_size: int,
    max_samples: int,
    seed: int,
) -> Estimate:
    lower = centers.min(axis=0) - shape.rho
    upper = centers.max(axis=0) + shape.rho
    box_volume = float(np.prod(upper - lower))
    hits = 0
    n = 0
    batch = 0
    converged = False
    while n < max_samples:
        rng = derive_rng(seed, batch)
        x = lower + (upper - lower) * rng.random((batch_size, shape.dimension))
        covered = np.zeros(batch_size, dtype=bool)
        for c in centers:
            covered |= shape.contains(x - c)
        hits += int(covered.sum())
        n += batch_size
        batch += 1
        p = hits / n
        if 0 < p and np.sqrt(p * (1.0 - p) / n) / p <= rel_error:
            converged = True
            break
    p = hits / n
    if not converged:
        logger.warning(f"union_volume stopped at max_samples={max_samples} before reaching rel_error={rel_error}.")
    return Estimate(box_volume * p, box_volume * float(np.sqrt(p * (1.0 - p) / n)), n)


def union_volume(
    shape: ShapeS,
    offsets: Sequence[Sequence[float]],
    rel_error: float = 1e-3,
    batch_size: int = 20000,
    max_samples: int = 20_000_000,
    seed: int = 0,
) -> Estimate:
    """
    λ(S ∪ (S + x₂) ∪ … ∪ (S + x_k)).

    Exact for a single set, for d = 1, for two Euclidean disks and for
    sup-norm cubes (inclusion–exclusion up to six sets). Otherwise a seeded
    hit-or-miss estimate over the union's bounding box, run until the relative
    standard error reaches `rel_error`.
    """
    if not rel_error > 0:
        raise ValueError(f"requested error must be > 0, got {rel_error}.")
    d = shape.dimension
    offsets = np.asarray(offsets, dtype=float).reshape(-1, d)
    centers = np.vstack([np.zeros((1, d)), offsets])
    exact = exact_union_volumes(shape, centers[None])
    if exact is not None:
        return Estimate(float(exact[0]), 0.0)
    return _hit_or_miss(shape, centers, rel_error, batch_size, max_samples, seed)


def union_volume_mc(
    shape: ShapeS,
    offsets: Sequence[Sequence[float]],
    rel_error: float = 1e-3,
    batch_size: int = 20000,
    max_samples: int = 20_000_000,
    seed: int = 0,
) -> Estimate:
    """Hit-or-miss estimate regardless of whether a closed form exists."""
    if not rel_error > 0:
        raise ValueError(f"requested error must be > 0, got {rel_error}.")
    d = shape.dimension
    centers = np.vstack([np.zeros((1, d)), np.asarray(offsets, dtype=float).reshape(-1, d)])
    return _hit_or_miss(shape, centers, rel_error, batch_size, max_samples, seed)
