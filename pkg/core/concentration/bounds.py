import math
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator


class BoundParams(BaseModel):
    """Constants of the component-count tail bounds."""

    model_config = ConfigDict(frozen=True)

    k: int = Field(..., ge=1, description="Largest component size the selector admits.")
    c_s: int = Field(..., ge=1, description="Packing constant c_S of the structuring set.")
    sigma: float = Field(..., ge=0.0, description="σ_S^μ = sup_x μ(S + x).")
    mean_f: float = Field(..., ge=0.0, description="𝔼F, from a pilot run or from theory.")
    mean_source: Literal["mc", "theory"] = Field("mc", description="Where mean_f came from.")
    c_s_certified: bool = Field(True, description="False when c_S came from a configured override.")

    @field_validator("sigma", "mean_f")
    @classmethod
    def check_finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("must be finite")
        return value

    @computed_field
    @property
    def a(self) -> float:
        return float(self.k * (self.c_s**2 * self.sigma + 1))

    @property
    def lower_scale(self) -> float:
        """max(a, 4c_S/3)."""
        return max(self.a, 4.0 * self.c_s / 3.0)


def _finish(values, r):
    values = np.where(np.asarray(r) == 0, 1.0, values)
    return float(values) if np.ndim(values) == 0 else values


def _check_r(r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or np.any(~np.isfinite(r)):
        raise ValueError("Deviations r must be finite and >= 0.")
    return r


def upper_tail_bound(r, p: BoundParams):
    """P(F ≥ 𝔼F + r) ≤ exp(−r²/(a(2𝔼F + r)))."""
    r = _check_r(r)
    with np.errstate(divide="ignore", invalid="ignore"):
        values = np.exp(-(r**2) / (p.a * (2.0 * p.mean_f + r)))
    return _finish(values, r)


def lower_tail_bound(r, p: BoundParams):
    """
    P(F ≤ 𝔼F − r) ≤ exp(−r²/(2·max(a, 4c_S/3)·𝔼F)). With 𝔼F = 0 the event has
    probability zero for r > 0, so the bound is 0 there.
    """
    r = _check_r(r)
    if p.mean_f == 0:
        return _finish(np.zeros_like(r), r)
    values = np.exp(-(r**2) / (2.0 * p.lower_scale * p.mean_f))
    return _finish(values, r)


def bounded_upper_tail_bound(r, p: BoundParams, cap: float):
    """Upper tail exp(−r²/(a(2𝔼F + C))) for functionals with F ≤ C almost surely."""
    if not cap >= 0:
        raise ValueError(f"cap must be >= 0, got {cap}.")
    r = _check_r(r)
    with np.errstate(divide="ignore", invalid="ignore"):
        values = np.exp(-(r**2) / (p.a * (2.0 * p.mean_f + cap)))
    values = np.where(r > cap, 0.0, values)
    return _finish(values, r)


def unit_lower_tail_bound(r, a: float, mean: float):
    """Lower tail exp(−r²/(2·max(a, 4/3)·𝔼F)) for functionals whose differences satisfy |DF| ≤ 1."""
    r = _check_r(r)
    if mean < 0 or a <= 0:
        raise ValueError("unit lower tail needs a > 0 and mean >= 0.")
    if mean == 0:
        return _finish(np.zeros_like(r), r)
    return _finish(np.exp(-(r**2) / (2.0 * max(a, 4.0 / 3.0) * mean)), r)


def variance_bound(p: BoundParams) -> float:
    """𝕍F ≤ 2v₂ + 4v₁ + 8w² with v₁ = 2a𝔼F, w = a, v₂ = max(a, 4c_S/3)𝔼F."""
    v1 = p.a * 2.0 * p.mean_f
    v2 = p.lower_scale * p.mean_f
    return float(2.0 * v2 + 4.0 * v1 + 8.0 * p.a**2)
