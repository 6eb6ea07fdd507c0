import logging
from dataclasses import dataclass
from typing import Literal, Optional, TypedDict

import numpy as np
from scipy import integrate, optimize
from scipy.stats import qmc

from core.geometry.shape import ShapeS
from core.utils.numerics import ball_volume, radial_integral

from .models import CustomModel, HomogeneousModel, IntensityModel, RadialPowerModel
from .window import Window

logger = logging.getLogger(__name__)

Verdict = Literal["integrable", "unknown", "not-integrable", "integrable-on-window"]


class IntegrabilityDiagnostic(TypedDict):
    """Outcome of the ∫m^k integrability criterion for one (model, k, S)."""

    sigma_finite: bool
    mk_integrable: Optional[bool]
    mk_integral: Optional[float]
    u_upper_bound: Optional[float]
    verdict: Verdict


@dataclass(frozen=True)
class SigmaSearch:
    value: float
    pitch: float
    argmax: tuple


def _shape_cubature(shape: ShapeS, m: int = 12) -> np.ndarray:
    """Fixed scrambled-Sobol nodes inside S used for μ(S + x) cubature."""
    sampler = qmc.Sobol(d=shape.dimension, scramble=True, seed=12345)
    cube = shape.rho * (2.0 * sampler.random_base2(m) - 1.0)
    return cube[shape.contains(cube)]


def shape_mass(model: IntensityModel, shape: ShapeS, center: np.ndarray) -> float:
    """t·μ(S + center)."""
    center = np.asarray(center, dtype=float)
    if model.is_homogeneous:
        return model.scale * float(model.density(center[None, :])[0]) * shape.volume
    d = shape.dimension
    if isinstance(model, RadialPowerModel) and shape.norm == "euclidean" and not np.any(center):
        return model.scale * radial_integral(lambda r: float(model.profile(r)), d, upper=shape.rho)
    if d <= 2:
        func = lambda *x: float(model.density(np.array([x]) + center)[0])
        if shape.norm == "sup":
            ranges = [(-shape.rho, shape.rho)] * d
            value, _ = integrate.nquad(func, ranges, opts={"limit": 100})
        elif d == 1:
            value, _ = integrate.quad(lambda x: func(x), -shape.rho, shape.rho, limit=100)
        else:
            rho = shape.rho
            value, _ = integrate.dblquad(
                lambda y, x: func(x, y), -rho, rho,
                lambda x: -np.sqrt(max(rho * rho - x * x, 0.0)),
                lambda x: np.sqrt(max(rho * rho - x * x, 0.0)),
            )
        return model.scale * value
    nodes = _shape_cubature(shape)
    return model.scale * shape.volume * float(np.mean(model.density(nodes + center)))


def search_sigma(model: IntensityModel, shape: ShapeS, pitch: Optional[float] = None) -> SigmaSearch:
    """Grid search of x ↦ t·μ(S + x) over a custom model's declared search box."""
    if not isinstance(model, CustomModel) or model.search_box is None:
        raise ValueError("sigma search region required")
    lower = np.asarray(model.search_box[0], dtype=float)
    upper = np.asarray(model.search_box[1], dtype=float)
    pitch = float(pitch if pitch is not None else shape.rho / 2.0)
    axes = [np.arange(lo, hi + 0.5 * pitch, pitch) for lo, hi in zip(lower, upper)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, shape.dimension)

    nodes = _shape_cubature(shape)
    masses = np.array([np.mean(model.density(nodes + x)) for x in grid]) * shape.volume * model.scale
    best = int(np.argmax(masses))
    return SigmaSearch(float(masses[best]), pitch, tuple(grid[best]))


def sigma_s(model: IntensityModel, shape: ShapeS) -> float:
    """
    σ_S^μ = sup_x t·μ(S + x).

    Homogeneous: rate·t·vol(S). Radially nonincreasing densities peak at the
    origin. Custom densities need a search box; the grid pitch is logged.
    """
    if model.is_homogeneous:
        return model.scale * model.sup_norm() * shape.volume
    if model.is_radially_nonincreasing:
        return shape_mass(model, shape, np.zeros(shape.dimension))
    search = search_sigma(model, shape)
    logger.info(f"sigma_s by grid search: {search.value:.6g} at {search.argmax} (pitch {search.pitch:g}).")
    return search.value


def validate_integrability(
    model: IntensityModel,
    k: int,
    shape: ShapeS,
    window: Optional[Window] = None,
) -> IntegrabilityDiagnostic:
    """
    Applies the sufficient criterion ∫m^k < ∞ for integrability of k-component
    counts. A window restriction makes every bounded density integrable.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}.")
    d = shape.dimension
    try:
        sigma_finite = bool(np.isfinite(sigma_s(model, shape)))
    except ValueError:
        sigma_finite = False

    mk = model.mk_integral(k, d)
    mk_integrable = None if mk is None else bool(np.isfinite(mk))
    u_bound = None
    if mk_integrable:
        u_bound = k * ball_volume(d, (k - 1) * shape.outer_radius) ** (k - 1) * model.scale**k * mk

    if window is not None:
        verdict: Verdict = "integrable-on-window"
    elif isinstance(model, HomogeneousModel):
        verdict = "integrable" if model.rate == 0 else "not-integrable"
    elif mk_integrable and sigma_finite:
        verdict = "integrable"
    else:
        verdict = "unknown"

    return {
        "sigma_finite": sigma_finite,
        "mk_integrable": mk_integrable,
        "mk_integral": mk,
        "u_upper_bound": u_bound,
        "verdict": verdict,
    }


def truncation_bias(model: IntensityModel, k: int, d: int, radius: float) -> float:
    """∫_{‖x‖>R} m(x)^k dx, the mass of m^k a window of radius R leaves out."""
    if isinstance(model, RadialPowerModel):
        return model.tail_mk_integral(k, d, radius)
    if model.is_homogeneous:
        return 0.0 if model.sup_norm() == 0 else float("inf")
    total = model.mk_integral(k, d)
    if total is None:
        raise ValueError(f"truncation bias unknown: {type(model).__name__} declares no ∫m^{k}.")
    inside = radial_integral(
        lambda r: float(model.density(np.array([[r] + [0.0] * (d - 1)]))[0]) ** k, d, upper=radius
    ) if model.is_radially_nonincreasing else None
    if inside is None:
        raise ValueError("truncation bias needs a radial density or a closed form.")
    return max(total - inside, 0.0)


def window_radius_for_tail(model: IntensityModel, k: int, d: int, fraction: float) -> float:
    """Smallest R whose tail ∫_{‖x‖>R} m^k is below `fraction` of ∫ m^k."""
    if not 0 < fraction < 1:
        raise ValueError(f"tail fraction must lie in (0, 1), got {fraction}.")
    total = model.mk_integral(k, d)
    if total is None or not np.isfinite(total):
        raise ValueError("not integrable")
    excess = lambda r: truncation_bias(model, k, d, r) - fraction * total
    upper = 1.0
    while excess(upper) > 0:
        upper *= 2.0
        if upper > 1e12:
            raise ValueError("tail radius search diverged")
    if excess(0.0) <= 0:
        return 0.0
    return float(optimize.brentq(excess, 0.0, upper))
