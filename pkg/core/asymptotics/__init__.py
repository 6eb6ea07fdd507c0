from .experiments import (
    ExperimentSettings,
    experiment_window,
    limit_constant,
    quartile_deviations,
    regime_experiment,
    strong_law_experiment,
)
from .integrals import (
    AsymptoticsReport,
    dense_constant,
    expected_count_exact,
    sparse_constant,
    thermo_constant,
)
from .regime import RegimeSpec, RhoRule

__all__ = [
    "AsymptoticsReport",
    "RegimeSpec",
    "RhoRule",
    "ExperimentSettings",
    "sparse_constant",
    "thermo_constant",
    "dense_constant",
    "expected_count_exact",
    "limit_constant",
    "experiment_window",
    "regime_experiment",
    "strong_law_experiment",
    "quartile_deviations",
]
