import logging
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from core.components.census import count_f, selected_mask
from core.components.difference import add_one_cost, neighbors_of_point, remove_one_cost
from core.components.selector import Selector
from core.geometry.graph import GeomGraph, build_graph
from core.geometry.shape import ShapeS
from core.intensity.config import PointConfig
from core.intensity.measures import sigma_s
from core.intensity.models import IntensityModel
from core.utils.seeding import derive_rng

from .bounds import BoundParams

logger = logging.getLogger(__name__)

MIN_MC_POINTS = 1000


@dataclass(frozen=True)
class ConditionRecord:
    f_value: int
    a: float
    a_times_f: float
    sum_term: int
    integral_estimate: float
    integral_se: float
    satisfied: bool
    sum_bound_ok: bool
    negative_measure: float
    negative_measure_se: float
    negative_measure_bound: float
    negative_measure_ok: bool
    max_abs_difference: int

    def to_dict(self) -> dict:
        return asdict(self)


def condition_check(
    config: PointConfig,
    shape: ShapeS,
    selector: Selector,
    model: IntensityModel,
    mc_points: int,
    seed: int,
    c_s: int,
    sigma: Optional[float] = None,
    graph: Optional[GeomGraph] = None,
) -> ConditionRecord:
    """
    Evaluates ∫(D_xF(η))₋² dμ(x) + Σ_{x∈η}(D_xF(η − δ_x))₊² ≤ a·F(η) on one configuration.

    The sum is exact. The integrand vanishes outside ∪(S + y) over vertices y
    of selected components, so the integral is importance-sampled there:
    pick such a vertex uniformly, add a uniform point of S, and weight by
    t·m(x)·n·vol(S)/cover(x). μ is the intensity restricted to the window.
    """
    if mc_points < MIN_MC_POINTS:
        raise ValueError(f"mc_points must be >= {MIN_MC_POINTS}, got {mc_points}.")
    graph = graph if graph is not None else build_graph(config, shape)
    sigma = sigma_s(model, shape) if sigma is None else float(sigma)
    f_value = count_f(graph, selector)
    params = BoundParams(k=selector.k, c_s=c_s, sigma=sigma, mean_f=float(f_value))

    removal = [remove_one_cost(config, shape, selector, i, graph=graph) for i in range(len(config))]
    sum_term = int(sum(max(v, 0) ** 2 for v in removal))
    max_abs = max((abs(v) for v in removal), default=0)

    integral, integral_se, neg, neg_se = 0.0, 0.0, 0.0, 0.0
    mask = selected_mask(graph, selector)
    if mask.any():
        support = np.concatenate([graph.components()[cid] for cid in np.flatnonzero(mask)])
        centers = config.points[support]
        rng = derive_rng(seed, 0)
        picks = centers[rng.integers(0, len(centers), size=mc_points)]
        window = config.window
        xs = window.wrap(picks + shape.sample(rng, mc_points))

        costs = np.zeros(mc_points, dtype=np.int64)
        weights = np.zeros(mc_points)
        inside = window.contains(xs)
        for i in np.flatnonzero(inside):
            costs[i] = add_one_cost(config, shape, selector, xs[i], graph=graph)
            cover = int(np.isin(neighbors_of_point(config, shape, xs[i]), support).sum())
            weights[i] = model.intensity(xs[i][None, :])[0] * len(centers) * shape.volume / cover
        max_abs = max(max_abs, int(np.abs(costs).max()))

        squared = weights * np.minimum(costs, 0) ** 2
        indicator = weights * (costs < 0)
        integral, integral_se = float(squared.mean()), float(squared.std(ddof=1) / np.sqrt(mc_points))
        neg, neg_se = float(indicator.mean()), float(indicator.std(ddof=1) / np.sqrt(mc_points))

    a_f = params.a * f_value
    negative_bound = selector.k * sigma * f_value
    record = ConditionRecord(
        f_value=f_value,
        a=params.a,
        a_times_f=a_f,
        sum_term=sum_term,
        integral_estimate=integral,
        integral_se=integral_se,
        satisfied=bool(sum_term + integral - 4.0 * integral_se <= a_f),
        sum_bound_ok=bool(sum_term <= selector.k * f_value),
        negative_measure=neg,
        negative_measure_se=neg_se,
        negative_measure_bound=negative_bound,
        negative_measure_ok=bool(neg - 4.0 * neg_se <= negative_bound),
        max_abs_difference=int(max_abs),
    )
    if not record.satisfied:
        logger.warning(f"Condition violated: {record.sum_term} + {integral:.4g} > {a_f:.4g}.")
    return record
