import logging
from dataclasses import dataclass, replace
from math import factorial
from typing import Callable, Literal, Optional, Tuple

import numpy as np
import pandas as pd
from scipy import special

from core.components.selector import Selector, adjacency_from_bits
from core.geometry.shape import ShapeS
from core.geometry.volume import exact_union_volumes
from core.intensity.models import CustomModel, HomogeneousModel, IntensityModel, RadialPowerModel
from core.intensity.window import Window
from core.utils.numerics import Estimate, ball_volume, chunked_mean, radial_integral, sphere_area, uniform_in_ball

logger = logging.getLogger(__name__)

MAX_EXACT_K = 4
# Upper bound on outer × inner points held at once by the nested union-volume estimator.
_NESTED_BLOCK = 2_000_000

ConstantName = Literal["s", "t", "d"]


@dataclass(frozen=True)
class AsymptoticsReport:
    """A limit constant with its Monte Carlo error and, for experiments, the per-t table."""

    constant_name: ConstantName
    value: float
    std_error: float
    evaluations: int = 0
    method: str = "mc"
    table: Optional[pd.DataFrame] = None

    def __post_init__(self):
        if not np.isfinite(self.value):
            raise ValueError(f"Constant {self.constant_name} evaluated to a non-finite value.")
        if not self.std_error >= 0:
            raise ValueError(f"std_error must be >= 0, got {self.std_error}.")

    def with_table(self, table: pd.DataFrame) -> "AsymptoticsReport":
        return replace(self, table=table)

    def summary(self) -> dict:
        return {
            "constant": self.constant_name,
            "value": self.value,
            "std_error": self.std_error,
            "evaluations": self.evaluations,
            "method": self.method,
        }


def _combine(name: ConstantName, parts, method: str) -> AsymptoticsReport:
    value = float(sum(p.value for p in parts))
    error = float(np.sqrt(sum(p.std_error**2 for p in parts)))
    return AsymptoticsReport(name, value, error, int(sum(p.evaluations for p in parts)), method)


def _warn_scale(model: IntensityModel) -> None:
    if model.scale != 1.0:
        logger.warning(f"Limit constants use the base density m; model scale t={model.scale:g} is ignored.")


# --- Integrand building blocks -------------------------------------------------


def support_radius(shape: ShapeS, k: int) -> float:
    """I(x) vanishes unless every offset lies within (k − 1)θρ of the origin."""
    return (k - 1) * shape.outer_radius


def _match_table(selector: Selector) -> np.ndarray:
    k = selector.k
    m = k * (k - 1) // 2
    table = np.zeros(2**m, dtype=bool)
    for code in range(2**m):
        bits = "".join(str((code >> p) & 1) for p in range(m))
        table[code] = selector.matches(k, adjacency_from_bits(bits, k))
    return table


def component_indicator(
    shape: ShapeS,
    selector: Selector,
    points: np.ndarray,
    window: Optional[Window] = None,
) -> np.ndarray:
    """
    1{x ∈ A, G_S(x) connected} for each row of k points, shape (n, k, d).
    Differences use the minimum image when a torus window is given.
    """
    n, k, d = points.shape
    if not selector.accepts_size(k):
        return np.zeros(n, dtype=bool)
    if k == 1:
        return np.ones(n, dtype=bool)
    differences = points[:, :, None, :] - points[:, None, :, :]
    if window is not None:
        differences = window.min_image(differences)
    adjacency = shape.contains(differences.reshape(-1, d)).reshape(n, k, k)
    adjacency[:, np.arange(k), np.arange(k)] = False

    reach = (adjacency | np.eye(k, dtype=bool)).astype(np.uint8)
    for _ in range(k):
        reach = (np.matmul(reach, reach) > 0).astype(np.uint8)
    connected = reach[:, 0, :].all(axis=1)

    if selector.variant == "iso_to_h":
        rows, cols = np.triu_indices(k, 1)
        codes = (adjacency[:, rows, cols].astype(np.int64) << np.arange(rows.size)).sum(axis=1)
        connected &= _match_table(selector)[codes]
    return connected


def union_measures(
    shape: ShapeS,
    centers: np.ndarray,
    rng: np.random.Generator,
    inner_samples: int,
    weight: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    window: Optional[Window] = None,
    exact: bool = True,
) -> np.ndarray:
    """
    ν(∪ᵢ(S + cᵢ)) for each row of centers (n, k, d), with ν Lebesgue measure
    or the measure with density `weight`.

    Lebesgue unions use closed forms when `exact` and one exists. Otherwise
    ν(∪) = k·vol(S)·E[w(Y)/cover(Y)] with Y = c_J + U(S), J uniform: each
    row gets `inner_samples` draws.
    """
    n, k, d = centers.shape
    if weight is None and exact:
        offsets = centers[:, 1:, :] - centers[:, :1, :]
        if window is not None:
            offsets = window.min_image(offsets)
        values = exact_union_volumes(shape, _with_origin(offsets))
        if values is not None:
            return values

    result = np.empty(n)
    block = max(1, _NESTED_BLOCK // (inner_samples * k))
    for start in range(0, n, block):
        rows = centers[start:start + block]
        b = rows.shape[0]
        pick = rng.integers(0, k, size=(b, inner_samples))
        y = rows[np.arange(b)[:, None], pick] + shape.sample(rng, b * inner_samples).reshape(b, inner_samples, d)
        cover = np.zeros((b, inner_samples))
        for i in range(k):
            diff = y - rows[:, i:i + 1, :]
            if window is not None:
                diff = window.min_image(diff)
            cover += shape.contains(diff.reshape(-1, d)).reshape(b, inner_samples)
        w = np.ones((b, inner_samples))
        if weight is not None:
            flat = y.reshape(-1, d)
            if window is not None:
                flat = window.wrap(flat)
                w = (weight(flat) * window.contains(flat)).reshape(b, inner_samples)
            else:
                w = weight(flat).reshape(b, inner_samples)
        result[start:start + b] = k * shape.volume * np.mean(w / cover, axis=1)
    return result


def _offsets(rng: np.random.Generator, n: int, k: int, shape: ShapeS) -> np.ndarray:
    """k − 1 independent uniform offsets per row on the support ball."""
    d = shape.dimension
    if k == 1:
        return np.zeros((n, 0, d))
    return uniform_in_ball(rng, n * (k - 1), d, support_radius(shape, k)).reshape(n, k - 1, d)


def _support_volume(shape: ShapeS, k: int) -> float:
    return ball_volume(shape.dimension, support_radius(shape, k)) ** (k - 1)


def _with_origin(offsets: np.ndarray) -> np.ndarray:
    n, _, d = offsets.shape
    return np.concatenate([np.zeros((n, 1, d)), offsets], axis=1)


def _envelope(model: IntensityModel) -> Tuple[float, float]:
    if isinstance(model, RadialPowerModel):
        return model.alpha, model.gamma
    if isinstance(model, CustomModel) and model.envelope is not None:
        return model.envelope
    raise ValueError(
        f"{type(model).__name__} needs an envelope m(x) ≤ α(‖x‖+1)^(-γ) for the limit constants."
    )


def _sample_envelope_power(rng: np.random.Generator, n: int, d: int, alpha: float, gamma: float, k: int) -> np.ndarray:
    """Points with density ∝ (‖x‖ + 1)^{−γk}: radius B/(1 − B) with B ~ Beta(d, γk − d)."""
    b = rng.beta(d, gamma * k - d, size=n)
    radii = b / (1.0 - b)
    directions = rng.standard_normal((n, d))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    return directions * radii[:, None]


X1Sampler = Callable[[np.random.Generator, int], Tuple[np.ndarray, np.ndarray]]


def _x1_sampler(model: IntensityModel, k: int, d: int, window: Optional[Window] = None) -> Tuple[float, X1Sampler]:
    """
    (Z, sample) with ∫ g(m(x)) m(x)^k dx = Z·E[w·g(m(x₁))] for (m(x₁), w) = sample(rng, n).

    Integrable densities are sampled from their power envelope. A homogeneous
    density is only integrable on a window, where x₁ is uniform.
    """
    if isinstance(model, HomogeneousModel):
        rate = model.rate
        if rate == 0:
            return 0.0, lambda rng, n: (np.zeros(n), np.zeros(n))
        if window is None:
            raise ValueError("not integrable")
        return rate**k * window.volume, lambda rng, n: (np.full(n, rate), np.ones(n))

    alpha, gamma = _envelope(model)
    if gamma * k <= d:
        raise ValueError("not integrable")

    def sample(rng: np.random.Generator, n: int) -> Tuple[np.ndarray, np.ndarray]:
        x1 = _sample_envelope_power(rng, n, d, alpha, gamma, k)
        m1 = model.density(x1)
        envelope = alpha * (np.linalg.norm(x1, axis=1) + 1.0) ** (-gamma)
        return m1, (m1 / envelope) ** k

    return RadialPowerModel(alpha, gamma).mk_integral(k, d), sample


def mk_integral_quadrature(model: IntensityModel, k: int, d: int) -> float:
    """∫ m(x)^k dx by radial quadrature, for radially symmetric densities."""
    if not model.is_radially_nonincreasing or model.is_homogeneous:
        raise ValueError("Radial quadrature needs a radially symmetric, integrable density.")
    profile = lambda r: float(model.density(np.array([[r] + [0.0] * (d - 1)]))[0]) ** k
    return radial_integral(profile, d)


# --- Limit constants -----------------------------------------------------------


def sparse_constant(
    model: IntensityModel,
    shape: ShapeS,
    selector: Selector,
    n_samples: int = 200_000,
    seed: int = 0,
    chunk_size: int = 10_000,
    window: Optional[Window] = None,
) -> AsymptoticsReport:
    """
    𝔰 = (1/k!) ∫ m^k dx · ∫ I(x) dx over (ℝ^d)^{k−1}, with I(x) the indicator
    that {0, x₂, …, x_k} induces a connected graph in A.

    ∫ m^k uses the model's closed form or declared value when there is one and
    envelope importance sampling otherwise. A homogeneous model needs `window`.
    """
    if selector.variant == "empty":
        return AsymptoticsReport("s", 0.0, 0.0, 0, "exact")
    if not selector.fixed_size:
        raise ValueError("The sparse constant needs a fixed-size selector (exactly_k or iso_to_h).")
    _warn_scale(model)
    k, d = selector.k, shape.dimension

    envelope_mk, sample_x1 = _x1_sampler(model, k, d, window)
    mk = None if model.is_homogeneous else model.mk_integral(k, d)
    mk_se = 0.0
    evaluations = 0
    if model.is_homogeneous:
        mk = envelope_mk
    elif mk is None:
        draw = lambda rng, n: sample_x1(rng, n)[1] * envelope_mk
        mk, mk_se, evaluations = chunked_mean(draw, n_samples, seed, chunk_size, stream=1)

    if k == 1:
        return AsymptoticsReport("s", float(mk), float(mk_se), evaluations, "exact" if mk_se == 0 else "mc")

    volume = _support_volume(shape, k)
    draw = lambda rng, n: component_indicator(shape, selector, _with_origin(_offsets(rng, n, k, shape)))
    mean, se, count = chunked_mean(draw, n_samples, seed, chunk_size)
    inner = volume * mean
    inner_se = volume * se
    value = mk * inner / factorial(k)
    error = np.sqrt((mk * inner_se) ** 2 + (mk_se * inner) ** 2) / factorial(k)
    return AsymptoticsReport("s", float(value), float(error), evaluations + count, "mc")


def thermo_constant(
    model: IntensityModel,
    shape: ShapeS,
    selector: Selector,
    c: float,
    n_samples: int = 200_000,
    inner_samples: int = 4000,
    seed: int = 0,
    chunk_size: int = 10_000,
    method: Literal["auto", "mc"] = "auto",
    exact_union: bool = True,
    window: Optional[Window] = None,
) -> AsymptoticsReport:
    """
    𝔱 = (c^{k−1}/k!) ∫ I(x) m(x₁)^k exp(−c·λ(S ∪ (S+x₂) ∪ …)·m(x₁)) dx.

    x₁ is importance-sampled from the envelope α^k(‖x‖+1)^{−γk}; offsets are
    uniform on the support ball. For k = 1 and a radial density the integral
    is one-dimensional and done by quadrature unless `method="mc"`.
    """
    if not c > 0:
        raise ValueError(f"Thermodynamic constant c must be > 0, got {c}.")
    if selector.variant == "empty":
        return AsymptoticsReport("t", 0.0, 0.0, 0, "exact")
    if selector.variant == "at_most_k":
        parts = [
            thermo_constant(
                model, shape, part, c, n_samples, inner_samples, seed + i, chunk_size, method, exact_union, window
            )
            for i, part in enumerate(selector.parts())
        ]
        return _combine("t", parts, "sum-of-parts")
    _warn_scale(model)
    k, d = selector.k, shape.dimension
    envelope_mk, sample_x1 = _x1_sampler(model, k, d, window)

    if k == 1 and method == "auto":
        volume = shape.volume
        if model.is_homogeneous:
            value = envelope_mk * np.exp(-c * volume * model.rate)
            return AsymptoticsReport("t", float(value), 0.0, 0, "closed-form")
        if model.is_radially_nonincreasing:
            profile = lambda r: _radial_density(model, d, r)
            value = radial_integral(lambda r: profile(r) * np.exp(-c * volume * profile(r)), d)
            return AsymptoticsReport("t", float(value), 0.0, 0, "quadrature")

    support = _support_volume(shape, k)

    def draw(rng: np.random.Generator, n: int) -> np.ndarray:
        m1, weights = sample_x1(rng, n)
        offsets = _offsets(rng, n, k, shape)
        indicator = component_indicator(shape, selector, _with_origin(offsets))
        values = np.zeros(n)
        hit = np.flatnonzero(indicator)
        if hit.size:
            union = union_measures(shape, _with_origin(offsets[hit]), rng, inner_samples, exact=exact_union)
            values[hit] = weights[hit] * np.exp(-c * union * m1[hit])
        return values * envelope_mk * support

    mean, se, count = chunked_mean(draw, n_samples, seed, chunk_size)
    prefactor = c ** (k - 1) / factorial(k)
    return AsymptoticsReport("t", float(prefactor * mean), float(prefactor * se), count, "mc")


def _radial_density(model: IntensityModel, d: int, r: float) -> float:
    return float(model.density(np.array([[r] + [0.0] * (d - 1)]))[0])


def dense_radial_integrand(r, union_volume, alpha: float, gamma: float, k: int):
    """r^{−γk}·exp(−α r^{−γ} L), evaluated in log space; tends to 0 as r → 0."""
    r = np.maximum(np.asarray(r, dtype=float), np.finfo(float).tiny)
    with np.errstate(over="ignore"):
        log_value = -gamma * k * np.log(r) - alpha * union_volume * r ** (-gamma)
    return np.exp(log_value)


def _check_dense_model(model: IntensityModel) -> RadialPowerModel:
    if not isinstance(model, RadialPowerModel):
        raise ValueError("The dense constant requires a radial_power model m(x) = α(‖x‖+1)^(-γ).")
    return model


def dense_constant(
    model: IntensityModel,
    shape: ShapeS,
    selector: Selector,
    n_samples: int = 200_000,
    inner_samples: int = 4000,
    seed: int = 0,
    chunk_size: int = 10_000,
    method: Literal["semi_analytic", "importance"] = "importance",
) -> AsymptoticsReport:
    """
    𝔡 = (α^k/k!) ∫ I(x) ‖x₁‖^{−γk} exp(−α‖x₁‖^{−γ} λ(S ∪ ⋃(S + xᵢ))) dx.

    "importance" samples x₁ from a density ∝ min(‖x₁‖^{−γk}, R₀^{−γk}) with
    R₀ = (α vol S)^{1/γ}. "semi_analytic" integrates the radial part of x₁
    in closed form: 𝔡 = α^{d/γ} ω_d Γ(k − d/γ)/(γ k!) ∫ I(x) λ(U(x))^{d/γ − k} dx.
    """
    radial = _check_dense_model(model)
    if selector.variant == "empty":
        return AsymptoticsReport("d", 0.0, 0.0, 0, "exact")
    if selector.variant == "at_most_k":
        parts = [
            dense_constant(model, shape, part, n_samples, inner_samples, seed + i, chunk_size, method)
            for i, part in enumerate(selector.parts())
        ]
        return _combine("d", parts, "sum-of-parts")
    _warn_scale(model)
    k, d = selector.k, shape.dimension
    alpha, gamma = radial.alpha, radial.gamma
    if gamma * k <= d:
        raise ValueError("not integrable")

    semi_prefactor = alpha ** (d / gamma) * sphere_area(d) * special.gamma(k - d / gamma) / (gamma * factorial(k))
    if k == 1:
        value = semi_prefactor * shape.volume ** (d / gamma - 1.0)
        return AsymptoticsReport("d", float(value), 0.0, 0, "closed-form")

    support = _support_volume(shape, k)
    if method == "semi_analytic":
        def draw(rng: np.random.Generator, n: int) -> np.ndarray:
            offsets = _offsets(rng, n, k, shape)
            indicator = component_indicator(shape, selector, _with_origin(offsets))
            values = np.zeros(n)
            hit = np.flatnonzero(indicator)
            if hit.size:
                union = union_measures(shape, _with_origin(offsets[hit]), rng, inner_samples)
                values[hit] = union ** (d / gamma - k)
            return values * support

        mean, se, count = chunked_mean(draw, n_samples, seed, chunk_size)
        return AsymptoticsReport("d", float(semi_prefactor * mean), float(semi_prefactor * se), count, method)

    if method != "importance":
        raise ValueError(f"Unknown dense method '{method}'.")
    s = gamma * k
    r0 = (alpha * shape.volume) ** (1.0 / gamma)
    inner_weight = 1.0 / d
    outer_weight = 1.0 / (s - d)
    log_norm = np.log(sphere_area(d)) + (d - s) * np.log(r0) + np.log(inner_weight + outer_weight)

    def draw(rng: np.random.Generator, n: int) -> np.ndarray:
        inside = rng.random(n) < inner_weight / (inner_weight + outer_weight)
        u = 1.0 - rng.random(n)
        radii = np.where(inside, r0 * u ** (1.0 / d), r0 * u ** (-1.0 / (s - d)))
        offsets = _offsets(rng, n, k, shape)
        indicator = component_indicator(shape, selector, _with_origin(offsets))
        values = np.zeros(n)
        hit = np.flatnonzero(indicator)
        if hit.size:
            union = union_measures(shape, _with_origin(offsets[hit]), rng, inner_samples)
            r = radii[hit]
            log_proposal = -s * np.log(np.maximum(r, r0)) - log_norm
            values[hit] = dense_radial_integrand(r, union, alpha, gamma, k) * np.exp(-log_proposal)
        return values * support

    mean, se, count = chunked_mean(draw, n_samples, seed, chunk_size)
    prefactor = alpha**k / factorial(k)
    return AsymptoticsReport("d", float(prefactor * mean), float(prefactor * se), count, method)


# --- Finite-t expectation --------------------------------------------------------


def _sample_window_points(model: IntensityModel, window: Window, rng: np.random.Generator, n: int) -> np.ndarray:
    """n i.i.d. points from μ restricted to the window, normalised (rejection from the bounding box)."""
    sup = model.sup_density(window)
    out = np.empty((0, window.dimension))
    while out.shape[0] < n:
        size = max(2 * (n - out.shape[0]), 1024)
        candidates = window.lower + window.sides * rng.random((size, window.dimension))
        keep = window.contains(candidates)
        if not model.is_homogeneous:
            keep &= rng.random(size) * sup < model.density(candidates)
        out = np.vstack([out, candidates[keep]])
    return out[:n]


def expected_count_exact(
    model: IntensityModel,
    shape: ShapeS,
    selector: Selector,
    window: Window,
    n_samples: int = 200_000,
    inner_samples: int = 4000,
    seed: int = 0,
    chunk_size: int = 10_000,
) -> Estimate:
    """
    𝔼F = (1/k!) ∫ 1{x ∈ A, G_S(x) connected} exp(−μ(∪ᵢ(S + xᵢ))) dμ^k(x)
    for the process on `window`: the k points are drawn from μ_W/μ(W), so the
    estimate is μ(W)^k/k! times a sample mean.
    """
    if selector.variant == "empty":
        return Estimate(0.0, 0.0)
    if selector.variant == "at_most_k":
        parts = [
            expected_count_exact(model, shape, part, window, n_samples, inner_samples, seed + i, chunk_size)
            for i, part in enumerate(selector.parts())
        ]
        return Estimate(
            float(sum(p.value for p in parts)),
            float(np.sqrt(sum(p.std_error**2 for p in parts))),
            int(sum(p.evaluations for p in parts)),
        )
    k = selector.k
    if k > MAX_EXACT_K:
        raise ValueError("use simulation estimate")
    mass = model.mass(window)
    if mass == 0:
        return Estimate(0.0, 0.0)
    d = window.dimension
    torus = window if window.periodic else None
    homogeneous_torus = model.is_homogeneous and window.periodic
    rate = model.scale * model.sup_norm() if model.is_homogeneous else None

    def draw(rng: np.random.Generator, n: int) -> np.ndarray:
        points = _sample_window_points(model, window, rng, n * k).reshape(n, k, d)
        indicator = component_indicator(shape, selector, points, torus)
        values = np.zeros(n)
        hit = np.flatnonzero(indicator)
        if hit.size:
            if homogeneous_torus:
                measure = rate * union_measures(shape, points[hit], rng, inner_samples, window=torus)
            else:
                measure = union_measures(
                    shape, points[hit], rng, inner_samples, weight=model.intensity, window=window
                )
            values[hit] = np.exp(-measure)
        return values

    mean, se, count = chunked_mean(draw, n_samples, seed, chunk_size)
    scale = mass**k / factorial(k)
    return Estimate(float(scale * mean), float(scale * se), count)
