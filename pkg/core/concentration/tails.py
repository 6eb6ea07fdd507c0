import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.stats import binomtest

from core.components.census import BoundaryMode, count_f
from core.components.selector import Selector
from core.geometry.graph import build_graph
from core.geometry.shape import ShapeS
from core.intensity.models import IntensityModel
from core.intensity.sampler import sample_poisson
from core.intensity.window import Window
from core.utils.runner import ReplicationRunner

from .bounds import BoundParams, lower_tail_bound, upper_tail_bound, variance_bound

logger = logging.getLogger(__name__)

MIN_REPLICATIONS = 1000
CONFIDENCE = 0.99
HARD_FAILURE_WIDTHS = 5.0

TAIL_COLUMNS = [
    "r", "upper_bound", "upper_emp", "upper_lo", "upper_hi",
    "lower_bound", "lower_emp", "lower_lo", "lower_hi",
]


def wilson_interval(successes: int, trials: int, confidence: float = CONFIDENCE) -> Tuple[float, float]:
    interval = binomtest(int(successes), int(trials)).proportion_ci(confidence_level=confidence, method="wilson")
    return float(interval.low), float(interval.high)


@dataclass(frozen=True)
class TailReport:
    r_grid: np.ndarray
    upper_bound: np.ndarray
    lower_bound: np.ndarray
    upper_emp: np.ndarray
    upper_ci: np.ndarray
    lower_emp: np.ndarray
    lower_ci: np.ndarray
    n_replications: int
    master_seed: int
    params: BoundParams
    mean_se: float
    empirical_variance: float
    counts: np.ndarray = field(repr=False)
    flags: Tuple[str, ...] = ()

    @property
    def variance_bound(self) -> float:
        return variance_bound(self.params)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "r": self.r_grid,
                "upper_bound": self.upper_bound,
                "upper_emp": self.upper_emp,
                "upper_lo": self.upper_ci[:, 0],
                "upper_hi": self.upper_ci[:, 1],
                "lower_bound": self.lower_bound,
                "lower_emp": self.lower_emp,
                "lower_lo": self.lower_ci[:, 0],
                "lower_hi": self.lower_ci[:, 1],
            },
            columns=TAIL_COLUMNS,
        )

    def log_tail_frame(self) -> pd.DataFrame:
        """Exploratory log-tails against r and r²; empty tails give -inf."""
        with np.errstate(divide="ignore"):
            return pd.DataFrame(
                {
                    "r": self.r_grid,
                    "r_squared": self.r_grid**2,
                    "log_upper_emp": np.log(self.upper_emp),
                    "log_lower_emp": np.log(self.lower_emp),
                }
            )

    def domination(self) -> pd.DataFrame:
        """Per r: does each bound exceed the empirical frequency minus the Wilson half-width?"""
        upper_half = (self.upper_ci[:, 1] - self.upper_ci[:, 0]) / 2.0
        lower_half = (self.lower_ci[:, 1] - self.lower_ci[:, 0]) / 2.0
        return pd.DataFrame(
            {
                "r": self.r_grid,
                "upper_dominated": self.upper_bound >= self.upper_emp - upper_half,
                "lower_dominated": self.lower_bound >= self.lower_emp - lower_half,
                "upper_excess_widths": (self.upper_emp - self.upper_bound) / upper_half,
                "lower_excess_widths": (self.lower_emp - self.lower_bound) / lower_half,
            }
        )

    def summary(self) -> dict:
        dom = self.domination()
        return {
            "n_replications": self.n_replications,
            "mean_f": self.params.mean_f,
            "mean_se": self.mean_se,
            "a": self.params.a,
            "c_s": self.params.c_s,
            "sigma": self.params.sigma,
            "variance_emp": self.empirical_variance,
            "variance_bound": self.variance_bound,
            "all_dominated": bool(dom["upper_dominated"].all() and dom["lower_dominated"].all()),
            "flags": ";".join(self.flags),
        }


def replicate_counts(
    model: IntensityModel,
    window: Window,
    shape: ShapeS,
    selector: Selector,
    n_replications: int,
    master_seed: int,
    boundary: BoundaryMode = "raw",
    runner: Optional[ReplicationRunner] = None,
) -> np.ndarray:
    """F for each replication i, sampled with the seed derived from (master_seed, i)."""
    runner = runner or ReplicationRunner()

    def task(i: int) -> int:
        config = sample_poisson(model, window, master_seed, replication=i)
        return count_f(build_graph(config, shape), selector, boundary)

    return np.array(runner.map(task, range(n_replications)), dtype=np.int64)


def check_domination(report: TailReport) -> None:
    """Raises on a hard failure: an empirical tail above its bound by more than five half-widths."""
    dom = report.domination()
    excess = dom[["upper_excess_widths", "lower_excess_widths"]].to_numpy()
    if np.any(excess > HARD_FAILURE_WIDTHS):
        logger.error(
            "Tail bound violated beyond statistical error:\n"
            + report.to_frame().join(dom.drop(columns="r")).to_markdown(index=False, tablefmt="grid")
        )
        raise RuntimeError(
            f"Empirical tail exceeds the theoretical bound by more than {HARD_FAILURE_WIDTHS:g} Wilson half-widths."
        )
    if not (dom["upper_dominated"].all() and dom["lower_dominated"].all()):
        logger.warning("Some empirical tails exceed their bound by more than one Wilson half-width.")


def empirical_tails(
    model: IntensityModel,
    window: Window,
    shape: ShapeS,
    selector: Selector,
    r_grid: Sequence[float],
    n_replications: int,
    master_seed: int,
    c_s: int,
    sigma: float,
    c_s_certified: bool = True,
    boundary: BoundaryMode = "raw",
    mean_f: Optional[float] = None,
    runner: Optional[ReplicationRunner] = None,
    enforce: bool = True,
) -> TailReport:
    """
    Monte Carlo tails of F against the theoretical bounds.

    𝔼F is the replication mean unless a theoretical `mean_f` is supplied. With
    `enforce`, a hard domination failure raises RuntimeError.
    """
    if n_replications < MIN_REPLICATIONS:
        raise ValueError(f"n_replications must be >= {MIN_REPLICATIONS}, got {n_replications}.")
    r = np.asarray(sorted(float(v) for v in r_grid))
    if r.size == 0 or np.any(r < 0):
        raise ValueError("r_grid must be a non-empty list of values >= 0.")

    logger.info(f"Running {n_replications} replications for {selector.describe()} ({boundary} boundary).")
    counts = replicate_counts(model, window, shape, selector, n_replications, master_seed, boundary, runner)
    plug_in = float(counts.mean())
    mean_se = float(counts.std(ddof=1) / np.sqrt(n_replications))
    source = "mc" if mean_f is None else "theory"
    params = BoundParams(
        k=selector.k,
        c_s=c_s,
        sigma=sigma,
        mean_f=plug_in if mean_f is None else float(mean_f),
        mean_source=source,
        c_s_certified=c_s_certified,
    )

    upper_hits = [(counts >= params.mean_f + v).sum() for v in r]
    lower_hits = [(counts <= params.mean_f - v).sum() for v in r]
    upper_ci = np.array([wilson_interval(h, n_replications) for h in upper_hits])
    lower_ci = np.array([wilson_interval(h, n_replications) for h in lower_hits])

    flags: List[str] = []
    if not c_s_certified:
        flags.append("c_S not certified")

    report = TailReport(
        r_grid=r,
        upper_bound=np.atleast_1d(upper_tail_bound(r, params)),
        lower_bound=np.atleast_1d(lower_tail_bound(r, params)),
        upper_emp=np.array(upper_hits, dtype=float) / n_replications,
        upper_ci=upper_ci,
        lower_emp=np.array(lower_hits, dtype=float) / n_replications,
        lower_ci=lower_ci,
        n_replications=n_replications,
        master_seed=master_seed,
        params=params,
        mean_se=mean_se,
        empirical_variance=float(counts.var(ddof=1)),
        counts=counts,
        flags=tuple(flags),
    )
    logger.info(f"Mean F = {plug_in:.4f} ± {mean_se:.4f}; a = {params.a:g}.")
    if enforce:
        check_domination(report)
    return report
