import logging
from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from core.utils.numerics import uniform_directions
from core.utils.seeding import derive_rng

from .shape import ShapeS

logger = logging.getLogger(__name__)

KNOWN_PACKING = {"euclidean": {1: 2, 2: 5}}


@dataclass(frozen=True)
class PackingResult:
    lower_bound: int
    value: Optional[int]

    @property
    def known(self) -> bool:
        return self.value is not None


@dataclass(frozen=True)
class PackingResolution:
    """The c_S actually used in bound constants and where it came from."""

    value: int
    certified: bool
    lower_bound: int
    source: str


def known_packing_value(shape: ShapeS, table: Optional[Mapping] = None) -> Optional[int]:
    if shape.norm == "sup":
        return 2**shape.dimension
    table = KNOWN_PACKING if table is None else table
    entries = table.get(shape.norm) or {}
    value = entries.get(shape.dimension, entries.get(str(shape.dimension)))
    return None if value is None else int(value)


def _candidate_pool(shape: ShapeS, rng: np.random.Generator, size: int) -> np.ndarray:
    """Unit-scale candidates in S, weighted towards the boundary where packings live."""
    d = shape.dimension
    unit = shape.with_rho(1.0)
    interior = unit.sample(rng, size // 4)
    if shape.norm == "euclidean":
        boundary = uniform_directions(rng, size - size // 4, d)
    else:
        boundary = 2.0 * rng.random((size - size // 4, d)) - 1.0
        axis = rng.integers(0, d, size=boundary.shape[0])
        boundary[np.arange(boundary.shape[0]), axis] = rng.choice([-1.0, 1.0], size=boundary.shape[0])
    return np.vstack([boundary, interior])


def _greedy_packing(unit: ShapeS, pool: np.ndarray) -> int:
    chosen = np.zeros((0, unit.dimension))
    for candidate in pool:
        if chosen.shape[0] == 0 or np.all(unit.gauge(chosen - candidate) > 1.0):
            chosen = np.vstack([chosen, candidate])
    return chosen.shape[0]


def packing_lower_bound(shape: ShapeS, restarts: int = 24, pool_size: int = 4000, seed: int = 0) -> int:
    """
    Largest number of points of S with pairwise differences outside S found
    by greedy placement over randomized candidate pools. Always a valid lower
    bound on c_S.
    """
    unit = shape.with_rho(1.0)
    best = 1
    for restart in range(restarts):
        rng = derive_rng(seed, restart)
        best = max(best, _greedy_packing(unit, _candidate_pool(shape, rng, pool_size)))
    return best


def packing_constant(
    shape: ShapeS,
    d: Optional[int] = None,
    table: Optional[Mapping] = None,
    restarts: int = 24,
    pool_size: int = 4000,
    seed: int = 0,
) -> PackingResult:
    """c_S: a searched lower bound and the exact value where it is known."""
    if d is not None and d != shape.dimension:
        raise ValueError(f"Dimension {d} does not match the {shape.dimension}-dimensional shape.")
    lower = packing_lower_bound(shape, restarts=restarts, pool_size=pool_size, seed=seed)
    value = known_packing_value(shape, table)
    if value is not None and lower > value:
        raise RuntimeError(f"Packing search found {lower} points, exceeding the tabulated c_S = {value}.")
    return PackingResult(lower_bound=lower, value=value)


def resolve_packing_constant(
    shape: ShapeS,
    override: Optional[int] = None,
    table: Optional[Mapping] = None,
    restarts: int = 24,
    pool_size: int = 4000,
    seed: int = 0,
) -> PackingResolution:
    """
    Picks the c_S used by concentration bounds: the exact value when known,
    otherwise the configured override floored by the search lower bound.
    """
    value = known_packing_value(shape, table)
    if value is not None:
        return PackingResolution(value=value, certified=True, lower_bound=value, source="table")

    lower = packing_lower_bound(shape, restarts=restarts, pool_size=pool_size, seed=seed)
    if override is None:
        raise ValueError(
            f"c_S unknown for {shape.norm} norm in d={shape.dimension}; configure packing_override "
            f"(search lower bound {lower})."
        )
    used = max(int(override), lower)
    logger.warning(f"c_S not certified: using {used} (override {override}, search lower bound {lower}).")
    return PackingResolution(value=used, certified=False, lower_bound=lower, source="override")
