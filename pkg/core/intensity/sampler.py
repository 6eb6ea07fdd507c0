import logging
from typing import Optional

import numpy as np

from core.utils.seeding import check_seed, replication_rng

from .config import PointConfig
from .models import IntensityModel
from .window import Window

logger = logging.getLogger(__name__)


def check_model_window(model: IntensityModel, window: Window) -> None:
    """Rejects model/window combinations the sampler cannot honour."""
    if window.periodic and not model.is_homogeneous:
        raise ValueError("A torus-box window requires a homogeneous intensity model.")


def sample_poisson(
    model: IntensityModel,
    window: Window,
    seed: int,
    replication: Optional[int] = None,
) -> PointConfig:
    """
    Samples the Poisson process with intensity t·m restricted to `window`.

    A homogeneous process with rate t·sup m on the window's bounding box is
    thinned: each point x survives with probability m(x)/sup m (and only if it
    lies in the window). The result is a deterministic function of
    (model, window, seed, replication).
    """
    check_model_window(model, window)
    rng = replication_rng(check_seed(seed), replication)

    sup = model.sup_density(window)
    dominating_mean = model.scale * sup * window.bounding_volume
    if not np.isfinite(dominating_mean):
        raise ValueError("window mass not finite")

    n = int(rng.poisson(dominating_mean))
    candidates = window.lower + window.sides * rng.random((n, window.dimension))
    keep = window.contains(candidates) if n else np.zeros(0, dtype=bool)

    if n and not model.is_homogeneous:
        densities = model.density(candidates)
        if np.any(densities > sup * (1.0 + 1e-12)):
            raise ValueError(
                f"density exceeds its declared bound {sup} at {int(np.sum(densities > sup))} sampled points."
            )
        keep &= rng.random(n) * sup < densities

    config = PointConfig(candidates[keep], window, (int(seed), int(replication or 0)))
    if len(config) != len(np.unique(config.points, axis=0)):
        raise RuntimeError("Sampler produced duplicate points; the intensity must be non-atomic.")
    logger.debug(f"Sampled {len(config)} of {n} dominating points (mean {dominating_mean:.3f}).")
    return config
