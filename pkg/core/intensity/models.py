from abc import ABC, abstractmethod
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Optional, Tuple

import numpy as np
from scipy import integrate, special
from scipy.stats import qmc

from core.utils.numerics import radial_integral, sphere_area

from .window import Window


DensityFn = Callable[[np.ndarray], np.ndarray]


class IntensityModel(ABC):
    """
    An intensity measure t·μ with Lebesgue density t·m.

    `density` is the base density m; the scale t multiplies the whole measure.
    """

    scale: float

    @abstractmethod
    def density(self, x: np.ndarray) -> np.ndarray:
        """Base density m evaluated at the rows of `x`."""

    @abstractmethod
    def sup_density(self, window: Window) -> float:
        """An upper bound of m on the window (the thinning majorant)."""

    @abstractmethod
    def mk_integral(self, k: int, d: int) -> Optional[float]:
        """∫_{ℝ^d} m(x)^k dx, `inf` when divergent, None when unknown."""

    @property
    def is_homogeneous(self) -> bool:
        return False

    @property
    def is_radially_nonincreasing(self) -> bool:
        return False

    def intensity(self, x: np.ndarray) -> np.ndarray:
        return self.scale * self.density(x)

    def sup_norm(self) -> float:
        """‖m‖∞ over ℝ^d."""
        raise NotImplementedError(f"{type(self).__name__} does not know its global supremum.")

    def mass(self, window: Window) -> float:
        """t·μ(window)."""
        d = window.dimension
        if window.kind == "ball" and self.is_radially_nonincreasing and not np.any(window.center):
            profile = lambda r: float(self.density(np.array([[r] + [0.0] * (d - 1)]))[0])
            return self.scale * radial_integral(profile, d, upper=window.radius)
        if window.kind != "ball" and d <= 3:
            func = lambda *x: float(self.density(np.array([x]))[0])
            ranges = list(zip(window.lower, window.upper))
            value, _ = integrate.nquad(func, ranges, opts={"limit": 200})
            return self.scale * value
        return self.scale * _qmc_mass(self, window)

    def with_scale(self, scale: float) -> "IntensityModel":
        if scale <= 0:
            raise ValueError(f"Model scale t must be > 0, got {scale}.")
        return replace(self, scale=scale)


def _qmc_mass(model: IntensityModel, window: Window, m: int = 16) -> float:
    sampler = qmc.Sobol(d=window.dimension, scramble=True, seed=0)
    unit = sampler.random_base2(m)
    points = window.lower + unit * window.sides
    inside = window.contains(points)
    return float(window.bounding_volume * np.mean(model.density(points) * inside))


def _check_scale(scale: float) -> None:
    if not np.isfinite(scale) or scale <= 0:
        raise ValueError(f"Model scale t must be > 0, got {scale}.")


@dataclass(frozen=True)
class HomogeneousModel(IntensityModel):
    """Constant density `rate` (points per unit volume)."""

    rate: float
    scale: float = 1.0

    def __post_init__(self):
        if not np.isfinite(self.rate) or self.rate < 0:
            raise ValueError(f"Homogeneous rate must be a finite non-negative number, got {self.rate}.")
        _check_scale(self.scale)

    @property
    def is_homogeneous(self) -> bool:
        return True

    @property
    def is_radially_nonincreasing(self) -> bool:
        return True

    def density(self, x: np.ndarray) -> np.ndarray:
        return np.full(np.atleast_2d(x).shape[0], self.rate, dtype=float)

    def sup_density(self, window: Window) -> float:
        return self.rate

    def sup_norm(self) -> float:
        return self.rate

    def mk_integral(self, k: int, d: int) -> Optional[float]:
        return 0.0 if self.rate == 0 else float("inf")

    def mass(self, window: Window) -> float:
        return self.scale * self.rate * window.volume


@dataclass(frozen=True)
class RadialPowerModel(IntensityModel):
    """m(x) = α(‖x‖ + 1)^{−γ}: positive, radially nonincreasing, bounded by α."""

    alpha: float
    gamma: float
    scale: float = 1.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"radial_power alpha must be > 0, got {self.alpha}.")
        if not self.gamma > 0:
            raise ValueError(f"radial_power gamma must be > 0, got {self.gamma}.")
        _check_scale(self.scale)

    @property
    def is_radially_nonincreasing(self) -> bool:
        return True

    def profile(self, r):
        return self.alpha * (np.asarray(r, dtype=float) + 1.0) ** (-self.gamma)

    def density(self, x: np.ndarray) -> np.ndarray:
        return self.profile(np.linalg.norm(np.atleast_2d(x), axis=1))

    def sup_density(self, window: Window) -> float:
        return float(self.profile(window.nearest_origin_distance()))

    def sup_norm(self) -> float:
        return self.alpha

    def mk_integral(self, k: int, d: int) -> Optional[float]:
        s = self.gamma * k
        if s <= d:
            return float("inf")
        return float(self.alpha**k * sphere_area(d) * special.beta(d, s - d))

    def tail_mk_integral(self, k: int, d: int, radius: float) -> float:
        """∫_{‖x‖>R} m(x)^k dx in closed form (regularized incomplete beta)."""
        s = self.gamma * k
        if s <= d:
            return float("inf")
        u = radius / (1.0 + radius)
        return float(
            self.alpha**k * sphere_area(d) * special.beta(d, s - d) * special.betainc(s - d, d, 1.0 - u)
        )

    def mass(self, window: Window) -> float:
        if window.kind == "ball" and not np.any(window.center):
            d = window.dimension
            # ∫_0^R r^{d-1}(1+r)^{-γ} dr = B(d, γ-d) I_{R/(1+R)}(d, γ-d) needs γ > d; quadrature covers all γ.
            return self.scale * radial_integral(lambda r: float(self.profile(r)), d, upper=window.radius)
        return super().mass(window)


@dataclass(frozen=True)
class CustomModel(IntensityModel):
    """
    A bounded user density. `density_fn` maps an (n, d) array to n values and
    must never exceed `sup_bound`.
    """

    density_fn: DensityFn
    sup_bound: float
    scale: float = 1.0
    search_box: Optional[Tuple[Tuple[float, ...], Tuple[float, ...]]] = None
    mk_integrals: Mapping[int, float] = field(default_factory=dict)
    envelope: Optional[Tuple[float, float]] = None
    radially_nonincreasing: bool = False

    def __post_init__(self):
        if not np.isfinite(self.sup_bound) or self.sup_bound < 0:
            raise ValueError(f"custom sup_bound must be a finite non-negative number, got {self.sup_bound}.")
        _check_scale(self.scale)
        if self.envelope is not None and (self.envelope[0] <= 0 or self.envelope[1] <= 0):
            raise ValueError(f"custom envelope (alpha, gamma) must be positive, got {self.envelope}.")

    @property
    def is_radially_nonincreasing(self) -> bool:
        return self.radially_nonincreasing

    def density(self, x: np.ndarray) -> np.ndarray:
        values = np.asarray(self.density_fn(np.atleast_2d(x)), dtype=float).reshape(-1)
        if np.any(values < 0):
            raise ValueError("custom density returned negative values.")
        return values

    def sup_density(self, window: Window) -> float:
        return self.sup_bound

    def sup_norm(self) -> float:
        return self.sup_bound

    def mk_integral(self, k: int, d: int) -> Optional[float]:
        value = self.mk_integrals.get(k)
        return None if value is None else float(value)
