from typing import TypedDict

import numpy as np
from scipy.stats import qmc

SERIES_CUTOFF = 1e-4
# Relative slack for comparisons evaluated in double precision.
_REL_TOL = 64.0 * np.finfo(float).eps


def psi(z):
    """ψ(z) = z·e^z − e^z + 1, by its Taylor series near zero."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < SERIES_CUTOFF
    with np.errstate(over="ignore", invalid="ignore"):
        # expm1 keeps full precision on (-1, 1); the factored form cannot overflow to inf - inf.
        exact = np.where(np.abs(z) <= 1.0, z * np.exp(z) - np.expm1(z), (z - 1.0) * np.exp(z) + 1.0)
    series = z**2 / 2.0 + z**3 / 3.0 + z**4 / 8.0 + z**5 / 30.0
    result = np.where(small, series, exact)
    return float(result) if result.ndim == 0 else result


def phi(z):
    """φ(z) = e^z − z − 1."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < SERIES_CUTOFF
    with np.errstate(over="ignore"):
        exact = np.expm1(z) - z
    series = z**2 / 2.0 + z**3 / 6.0 + z**4 / 24.0 + z**5 / 120.0
    result = np.where(small, series, exact)
    return float(result) if result.ndim == 0 else result


def lemma_ratio(a, z):
    """(aψ(z)/z²) / (1 + aψ(z)/z)."""
    a = np.asarray(a, dtype=float)
    z = np.asarray(z, dtype=float)
    p = psi(z)
    return (a * p / z**2) / (1.0 + a * p / z)


def lemma_check(a, z):
    """True where (aψ(z)/z²)/(1 + aψ(z)/z) ≤ max(a, 4/3)/2."""
    a = np.asarray(a, dtype=float)
    z = np.asarray(z, dtype=float)
    if np.any(a <= 0) or np.any(z <= 0):
        raise ValueError("lemma check needs a > 0 and z > 0.")
    bound = np.maximum(a, 4.0 / 3.0) / 2.0
    result = lemma_ratio(a, z) <= bound * (1.0 + _REL_TOL)
    return bool(result) if result.ndim == 0 else result


def quadratic_majorant_check(z):
    """True where ψ(z)(1 − 2z/3) ≤ z²/2."""
    z = np.asarray(z, dtype=float)
    lhs = psi(z) * (1.0 - 2.0 * z / 3.0)
    rhs = z**2 / 2.0
    result = lhs <= rhs + _REL_TOL * np.maximum(np.abs(lhs), rhs)
    return bool(result) if result.ndim == 0 else result


class SweepResult(TypedDict):
    points: int
    lemma_violations: int
    majorant_violations: int
    worst_ratio: float
    psi_over_z2_monotone: bool
    phi_below_psi: bool


def lemma_sweep(
    n_points: int = 1_000_000,
    a_max: float = 10.0,
    z_max: float = 50.0,
    seed: int = 0,
) -> SweepResult:
    """
    Checks the ratio bound on scrambled Halton pairs (a, z) in (0, a_max] × (0, z_max],
    together with ψ(z)(1 − 2z/3) ≤ z²/2, the monotonicity of ψ(z)/z² and
    φ(z) ≤ ψ(z) for z > 0.
    """
    sampler = qmc.Halton(d=2, scramble=True, seed=seed)
    unit = sampler.random(n_points)
    # Map [0, 1) onto (0, max] so that no coordinate is exactly zero.
    a = a_max * (1.0 - unit[:, 0])
    z = z_max * (1.0 - unit[:, 1])

    ok = lemma_check(a, z)
    ratio = lemma_ratio(a, z) / (np.maximum(a, 4.0 / 3.0) / 2.0)
    majorant = quadratic_majorant_check(z)

    grid = np.sort(z)
    scaled = psi(grid) / grid**2
    monotone = bool(np.all(np.diff(scaled) >= -_REL_TOL * scaled[1:]))
    below = bool(np.all(phi(grid) <= psi(grid) * (1.0 + _REL_TOL)))

    return {
        "points": int(n_points),
        "lemma_violations": int((~ok).sum()),
        "majorant_violations": int((~majorant).sum()),
        "worst_ratio": float(ratio.max()),
        "psi_over_z2_monotone": monotone,
        "phi_below_psi": below,
    }
