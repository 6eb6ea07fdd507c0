import logging
from dataclasses import dataclass
from math import factorial
from typing import Optional, Tuple

import numpy as np
import pandas as pd
from scipy import special

from core.components.census import BoundaryMode, count_f, count_u
from core.components.selector import Selector
from core.geometry.graph import build_graph
from core.geometry.shape import ShapeS
from core.intensity.measures import window_radius_for_tail
from core.intensity.models import CustomModel, IntensityModel, RadialPowerModel
from core.intensity.sampler import sample_poisson
from core.intensity.window import Window
from core.utils.runner import ReplicationRunner

from .integrals import AsymptoticsReport, dense_constant, sparse_constant, thermo_constant
from .regime import RegimeSpec

logger = logging.getLogger(__name__)

REGIME_COLUMNS = ["t", "rho", "occupancy", "window_half", "mean_f", "se_f", "scaled", "limit", "ratio"]
SPARSE_COLUMNS = ["mean_u", "kf_over_u", "bracket_lower", "bracket_ok"]
STRONG_LAW_COLUMNS = ["t", "rho", "f", "scaled", "limit", "deviation", "running_max_deviation", "growth", "growth_ok"]


@dataclass(frozen=True)
class ExperimentSettings:
    """Numerical knobs shared by the regime and strong-law experiments."""

    n_samples: int = 200_000
    inner_samples: int = 4000
    chunk_size: int = 10_000
    tail_fraction: float = 1e-3
    min_radius: float = 3.0
    boundary: BoundaryMode = "eroded"
    u_cap: int = 40
    dense_method: str = "importance"


def _gamma_of(model: IntensityModel) -> Optional[float]:
    if isinstance(model, RadialPowerModel):
        return model.gamma
    if isinstance(model, CustomModel) and model.envelope is not None:
        return model.envelope[1]
    return None


def limit_constant(
    regime: RegimeSpec,
    model: IntensityModel,
    shape: ShapeS,
    selector: Selector,
    settings: ExperimentSettings,
    seed: int,
    window: Optional[Window] = None,
) -> AsymptoticsReport:
    """The regime's limit constant for the base density (scale 1)."""
    base = model.with_scale(1.0)
    name = regime.classified_regime
    if name == "sparse":
        return sparse_constant(base, shape, selector, settings.n_samples, seed, settings.chunk_size, window=window)
    if name == "thermodynamic":
        return thermo_constant(
            base, shape, selector, regime.limit_c, settings.n_samples, settings.inner_samples, seed,
            settings.chunk_size, window=window,
        )
    return dense_constant(
        base, shape, selector, settings.n_samples, settings.inner_samples, seed, settings.chunk_size,
        method=settings.dense_method,
    )


def _dense_radius(model: RadialPowerModel, shape: ShapeS, k: int, occupancy: float, fraction: float) -> float:
    """
    Radius beyond which the dense integrand, rescaled by (tρ^d)^{1/γ}, keeps less
    than `fraction` of its mass (union volume bounded below by vol S).
    """
    d, gamma, alpha = shape.dimension, model.gamma, model.alpha
    s = gamma * k
    total = special.gamma(k - d / gamma) * (alpha * shape.volume) ** (d / gamma - k) / gamma
    scaled = (fraction * (s - d) * total) ** (1.0 / (d - s))
    return float(occupancy ** (1.0 / gamma) * scaled)


def experiment_window(
    model: IntensityModel,
    shape: ShapeS,
    rho: float,
    k: int,
    regime: RegimeSpec,
    occupancy: float,
    settings: ExperimentSettings,
    window: Optional[Window] = None,
) -> Window:
    """
    Homogeneous models run on the supplied torus. Otherwise a centred box whose
    half-extent leaves out less than `tail_fraction` of ∫m^k (and, in the dense
    regime, of the rescaled dense integrand), plus a margin of kθρ_t.
    """
    shape_t = shape.scaled(rho)
    d = shape_t.dimension
    if model.is_homogeneous:
        if window is None or not window.periodic:
            raise ValueError("Homogeneous regime experiments need a torus-box window.")
        return window
    tail_model = model
    if isinstance(model, CustomModel) and model.mk_integral(k, d) is None and model.envelope is not None:
        tail_model = RadialPowerModel(*model.envelope)
    radius = max(settings.min_radius, window_radius_for_tail(tail_model.with_scale(1.0), k, d, settings.tail_fraction))
    if regime.classified_regime == "dense" and isinstance(model, RadialPowerModel):
        radius = max(radius, _dense_radius(model, shape, k, occupancy, settings.tail_fraction))
    return Window.cube(d, radius + k * shape_t.outer_radius)


def _check_dense(regime: RegimeSpec, model: IntensityModel) -> None:
    if regime.classified_regime == "dense" and not isinstance(model, RadialPowerModel):
        raise ValueError("The dense regime requires a radial_power model m(x) = α(‖x‖+1)^(-γ).")


def regime_experiment(
    regime: RegimeSpec,
    shape: ShapeS,
    selector: Selector,
    model: IntensityModel,
    n_replications: int,
    master_seed: int,
    settings: ExperimentSettings = ExperimentSettings(),
    runner: Optional[ReplicationRunner] = None,
    window: Optional[Window] = None,
) -> AsymptoticsReport:
    """
    Scaled simulation means of F_t along the grid against the regime's limit constant.

    `shape` is the unit-scale S; at each t the graph uses ρ_t·S and intensity t·m.
    Replication j at grid index i uses sampler replication i·n_replications + j.
    Sparse runs also report k!·mean(F)/mean(U) against its lower bracket.
    """
    _check_dense(regime, model)
    runner = runner or ReplicationRunner()
    k = selector.k
    sparse = regime.classified_regime == "sparse" and selector.fixed_size
    constant = limit_constant(regime, model, shape, selector, settings, master_seed, window)
    factors = regime.scale_factors(k, _gamma_of(model))
    logger.info(
        f"{regime.classified_regime} regime: limit constant {constant.value:.6g} ± {constant.std_error:.2g}."
    )

    rows = []
    for i, (t, rho, occupancy) in enumerate(zip(regime.t_grid, regime.rhos, regime.occupancies)):
        shape_t = shape.scaled(rho)
        model_t = model.with_scale(t)
        window_t = experiment_window(model, shape, rho, k, regime, occupancy, settings, window)

        def task(j: int, i=i, shape_t=shape_t, model_t=model_t, window_t=window_t):
            config = sample_poisson(model_t, window_t, master_seed, replication=i * n_replications + j)
            graph = build_graph(config, shape_t)
            f = count_f(graph, selector, settings.boundary)
            if not sparse:
                return f, 0, 0
            try:
                u = count_u(graph, selector, settings.u_cap)
            except ValueError:
                u = -1
            return f, count_f(graph, selector, "raw"), u

        results = np.array(runner.map(task, range(n_replications)), dtype=float)
        f = results[:, 0]
        mean_f = float(f.mean())
        scaled = mean_f / factors[i]
        row = {
            "t": t,
            "rho": rho,
            "occupancy": occupancy,
            "window_half": window_t.half_extent[0],
            "mean_f": mean_f,
            "se_f": float(f.std(ddof=1) / np.sqrt(n_replications)) if n_replications > 1 else float("nan"),
            "scaled": scaled,
            "limit": constant.value,
            "ratio": scaled / constant.value if constant.value else float("nan"),
        }
        if sparse:
            if np.any(results[:, 2] < 0):
                logger.warning(f"t={t:g}: a component exceeds the U enumeration cap; k!F/U not reported.")
                mean_u = float("nan")
            else:
                mean_u = float(results[:, 2].mean())
            ratio = factorial(k) * float(results[:, 1].mean()) / mean_u if mean_u else float("nan")
            lower = float(np.exp(-t * k * shape_t.volume * model.sup_norm()))
            row.update(
                mean_u=mean_u,
                kf_over_u=ratio,
                bracket_lower=lower,
                bracket_ok=bool(lower <= ratio <= 1.0) if np.isfinite(ratio) else False,
            )
        rows.append(row)
        logger.info(f"t={t:g}: mean F = {mean_f:.4g}, scaled = {scaled:.4g} (limit {constant.value:.4g}).")

    columns = REGIME_COLUMNS + (SPARSE_COLUMNS if sparse else [])
    return constant.with_table(pd.DataFrame(rows, columns=columns))


def strong_law_experiment(
    regime: RegimeSpec,
    shape: ShapeS,
    selector: Selector,
    model: IntensityModel,
    master_seed: int,
    settings: ExperimentSettings = ExperimentSettings(),
    runner: Optional[ReplicationRunner] = None,
    window: Optional[Window] = None,
) -> AsymptoticsReport:
    """
    One independent realization per grid t (sampler replication = grid index),
    its scaled count and the running max deviation from the limit over the
    remainder of the grid. A violated growth condition is flagged, not fatal.
    """
    _check_dense(regime, model)
    runner = runner or ReplicationRunner()
    k = selector.k
    gamma = _gamma_of(model)
    growth_ok = regime.growth_condition_holds(k, gamma)
    constant = limit_constant(regime, model, shape, selector, settings, master_seed, window)
    factors = regime.scale_factors(k, gamma)
    rhos, occupancies = regime.rhos, regime.occupancies

    def task(i: int) -> int:
        shape_t = shape.scaled(rhos[i])
        window_t = experiment_window(model, shape, rhos[i], k, regime, occupancies[i], settings, window)
        config = sample_poisson(model.with_scale(regime.t_grid[i]), window_t, master_seed, replication=i)
        return count_f(build_graph(config, shape_t), selector, settings.boundary)

    counts = np.array(runner.map(task, range(len(regime.t_grid))), dtype=float)
    scaled = counts / factors
    deviation = np.abs(scaled - constant.value)
    running = np.maximum.accumulate(deviation[::-1])[::-1]
    table = pd.DataFrame(
        {
            "t": regime.t_grid,
            "rho": rhos,
            "f": counts,
            "scaled": scaled,
            "limit": constant.value,
            "deviation": deviation,
            "running_max_deviation": running,
            "growth": regime.growth_values(k, gamma),
            "growth_ok": growth_ok,
        },
        columns=STRONG_LAW_COLUMNS,
    )
    logger.info(f"Strong-law trajectory over {len(counts)} grid points; final deviation {deviation[-1]:.4g}.")
    return constant.with_table(table)


def quartile_deviations(table: pd.DataFrame) -> Tuple[float, float]:
    """Max |scaled − limit| over the bottom and the top quartile of the grid."""
    if table.empty:
        raise ValueError("Empty strong-law table.")
    deviation = table["deviation"].to_numpy()
    q = max(1, len(deviation) // 4)
    return float(deviation[:q].max()), float(deviation[-q:].max())
