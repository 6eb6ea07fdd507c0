import numpy as np
import pandas as pd
import pytest
from scipy import integrate

from core.asymptotics import (
    AsymptoticsReport,
    ExperimentSettings,
    RegimeSpec,
    RhoRule,
    dense_constant,
    expected_count_exact,
    quartile_deviations,
    regime_experiment,
    sparse_constant,
    strong_law_experiment,
    thermo_constant,
)
from core.asymptotics.experiments import REGIME_COLUMNS, SPARSE_COLUMNS, STRONG_LAW_COLUMNS
from core.asymptotics.integrals import component_indicator, dense_radial_integrand, mk_integral_quadrature
from core.components import Selector
from core.concentration.tails import replicate_counts
from core.geometry import ShapeS
from core.intensity import CustomModel, HomogeneousModel, RadialPowerModel, Window
from core.utils.runner import ReplicationRunner

QUICK = ExperimentSettings(n_samples=20000, inner_samples=500, chunk_size=5000)
# Single-point experiments need a density whose tail window stays small.
STEEP = RadialPowerModel(alpha=1.0, gamma=6.0)


def power_profile(x):
    return (np.linalg.norm(x, axis=1) + 1.0) ** -3.0


# --- integrands -----------------------------------------------------------------


def test_component_indicator_shapes(disk):
    path = np.array([[[0.0, 0.0], [0.9, 0.0], [1.8, 0.0]]])
    triangle = np.array([[[0.0, 0.0], [0.5, 0.0], [0.25, 0.4]]])
    split = np.array([[[0.0, 0.0], [0.5, 0.0], [3.0, 0.0]]])
    points = np.concatenate([path, triangle, split])
    assert component_indicator(disk, Selector.exactly(3), points).tolist() == [True, True, False]
    assert component_indicator(disk, Selector.iso_to_bits("110", 3), points).tolist() == [True, False, False]
    assert component_indicator(disk, Selector.iso_to_bits("111", 3), points).tolist() == [False, True, False]
    assert not component_indicator(disk, Selector.exactly(2), points).any()


def test_component_indicator_uses_minimum_image(disk, torus):
    points = np.array([[[-9.7, 0.0], [9.7, 0.0]]])
    assert not component_indicator(disk, Selector.exactly(2), points)[0]
    assert component_indicator(disk, Selector.exactly(2), points, window=torus)[0]


def test_dense_integrand_is_finite_at_origin():
    values = dense_radial_integrand(np.array([0.0, 1e-300, 1.0]), 3.0, 1.0, 3.0, 2)
    assert np.all(np.isfinite(values))
    assert values[0] == 0.0
    assert values[2] == pytest.approx(np.exp(-3.0))


def test_report_validation():
    with pytest.raises(ValueError, match="non-finite"):
        AsymptoticsReport("s", float("nan"), 0.0)
    with pytest.raises(ValueError):
        AsymptoticsReport("s", 1.0, -1.0)
    report = AsymptoticsReport("t", 2.0, 0.1).with_table(pd.DataFrame({"t": [1.0]}))
    assert report.summary()["constant"] == "t"
    assert len(report.table) == 1


# --- sparse ---------------------------------------------------------------------


def test_sparse_pair_constant_is_exact(radial, disk):
    report = sparse_constant(radial, disk, Selector.exactly(2), n_samples=5000)
    assert report.value == pytest.approx(np.pi / 2.0 * radial.mk_integral(2, 2), rel=1e-12)
    assert report.std_error == pytest.approx(0.0, abs=1e-12)


def test_sparse_single_point_constant(radial, disk):
    report = sparse_constant(radial, disk, Selector.exactly(1))
    assert report.value == pytest.approx(radial.mk_integral(1, 2))
    assert report.method == "exact"
    assert report.value == pytest.approx(mk_integral_quadrature(radial, 1, 2), rel=1e-6)


def test_sparse_triangle_below_all_triples(radial, disk):
    every = sparse_constant(radial, disk, Selector.exactly(3), n_samples=40000, seed=2)
    triangles = sparse_constant(radial, disk, Selector.iso_to_bits("111", 3), n_samples=40000, seed=2)
    paths = sparse_constant(radial, disk, Selector.iso_to_bits("110", 3), n_samples=40000, seed=2)
    assert 0 < triangles.value < every.value
    assert triangles.value + paths.value == pytest.approx(every.value, rel=1e-9)


def test_sparse_custom_envelope_matches_closed_form(radial, disk):
    custom = CustomModel(density_fn=power_profile, sup_bound=1.0, envelope=(1.0, 3.0))
    closed = sparse_constant(radial, disk, Selector.exactly(2), n_samples=5000, seed=3)
    sampled = sparse_constant(custom, disk, Selector.exactly(2), n_samples=5000, seed=3)
    assert sampled.value == pytest.approx(closed.value, rel=1e-9)


def test_sparse_constant_errors(disk, torus):
    with pytest.raises(ValueError, match="not integrable"):
        sparse_constant(RadialPowerModel(1.0, 1.0), disk, Selector.exactly(2))
    with pytest.raises(ValueError, match="not integrable"):
        sparse_constant(HomogeneousModel(1.0), disk, Selector.exactly(2))
    with pytest.raises(ValueError, match="fixed-size"):
        sparse_constant(RadialPowerModel(1.0, 3.0), disk, Selector.at_most(2))
    on_torus = sparse_constant(HomogeneousModel(1.0), disk, Selector.exactly(2), n_samples=5000, window=torus)
    assert on_torus.value == pytest.approx(400.0 * np.pi / 2.0)
    assert sparse_constant(RadialPowerModel(1.0, 3.0), disk, Selector.empty(2)).value == 0.0


def test_sparse_constant_is_seed_stable(radial, disk):
    first = sparse_constant(radial, disk, Selector.exactly(3), n_samples=10000, seed=11)
    again = sparse_constant(radial, disk, Selector.exactly(3), n_samples=10000, seed=11)
    assert first.value == again.value
    assert first.std_error == again.std_error


# --- thermodynamic --------------------------------------------------------------


def test_thermo_single_point_quadrature_matches_mc(radial, disk):
    quad = thermo_constant(radial, disk, Selector.exactly(1), c=2.0)
    mc = thermo_constant(radial, disk, Selector.exactly(1), c=2.0, n_samples=100000, method="mc")
    assert quad.method == "quadrature"
    assert abs(quad.value - mc.value) < 4.0 * mc.std_error + 1e-9


def test_thermo_homogeneous_closed_form(disk, torus):
    report = thermo_constant(HomogeneousModel(1.0), disk, Selector.exactly(1), c=1.0, window=torus)
    assert report.value == pytest.approx(400.0 * np.exp(-np.pi))


def test_thermo_small_c_approaches_sparse(radial, disk):
    c = 1e-4
    thermo = thermo_constant(radial, disk, Selector.exactly(2), c=c, n_samples=20000, inner_samples=200)
    sparse = sparse_constant(radial, disk, Selector.exactly(2), n_samples=5000)
    assert thermo.value / c == pytest.approx(sparse.value, rel=1e-2)


def test_thermo_exact_and_nested_unions_agree(radial, disk):
    exact = thermo_constant(radial, disk, Selector.exactly(2), c=1.0, n_samples=20000, inner_samples=500)
    nested = thermo_constant(
        radial, disk, Selector.exactly(2), c=1.0, n_samples=20000, inner_samples=500, exact_union=False
    )
    tolerance = 4.0 * np.hypot(exact.std_error, nested.std_error) + 1e-2 * exact.value
    assert abs(exact.value - nested.value) < tolerance


def test_thermo_at_most_sums_parts(radial, disk):
    total = thermo_constant(radial, disk, Selector.at_most(2), c=1.0, n_samples=5000, inner_samples=200, seed=4)
    one = thermo_constant(radial, disk, Selector.exactly(1), c=1.0, seed=4)
    two = thermo_constant(radial, disk, Selector.exactly(2), c=1.0, n_samples=5000, inner_samples=200, seed=5)
    assert total.value == pytest.approx(one.value + two.value)
    assert total.method == "sum-of-parts"


def test_thermo_rejects_non_positive_c(radial, disk):
    with pytest.raises(ValueError):
        thermo_constant(radial, disk, Selector.exactly(1), c=0.0)


# --- dense ----------------------------------------------------------------------


def test_dense_single_point_closed_form(disk):
    model = RadialPowerModel(alpha=1.5, gamma=3.0)
    report = dense_constant(model, disk, Selector.exactly(1))
    integrand = lambda r: 0.0 if r == 0 else 1.5 * r ** (2 - 1 - 3.0) * np.exp(-1.5 * np.pi * r**-3.0)
    value, _ = integrate.quad(integrand, 0.0, np.inf, limit=200)
    assert report.method == "closed-form"
    assert report.value == pytest.approx(2.0 * np.pi * value, rel=1e-6)


def test_dense_importance_matches_semi_analytic(radial, disk):
    importance = dense_constant(radial, disk, Selector.exactly(2), n_samples=50000, seed=1)
    semi = dense_constant(radial, disk, Selector.exactly(2), n_samples=50000, seed=2, method="semi_analytic")
    assert abs(importance.value - semi.value) < 4.0 * np.hypot(importance.std_error, semi.std_error)


def test_dense_constant_errors(disk, unit_rate):
    with pytest.raises(ValueError, match="not integrable"):
        dense_constant(RadialPowerModel(1.0, 2.0), disk, Selector.exactly(1))
    with pytest.raises(ValueError, match="radial_power"):
        dense_constant(unit_rate, disk, Selector.exactly(1))


# --- finite-t expectation ---------------------------------------------------------


def test_expected_isolated_points_on_torus():
    window = Window.cube(2, 10.0, periodic=True)
    shape = ShapeS("euclidean", 0.5, 2)
    estimate = expected_count_exact(HomogeneousModel(1.0), shape, Selector.exactly(1), window, n_samples=1000)
    assert estimate.value == pytest.approx(400.0 * np.exp(-np.pi / 4.0), rel=1e-9)


def test_expected_count_limits(disk, torus, unit_rate):
    assert expected_count_exact(unit_rate, disk, Selector.empty(2), torus).value == 0.0
    with pytest.raises(ValueError, match="use simulation estimate"):
        expected_count_exact(unit_rate, disk, Selector.exactly(5), torus)


def test_expected_pairs_match_simulation():
    window = Window.cube(2, 5.0, periodic=True)
    shape = ShapeS("euclidean", 0.5, 2)
    model = HomogeneousModel(1.0)
    exact = expected_count_exact(model, shape, Selector.exactly(2), window, n_samples=200000, inner_samples=200)
    counts = replicate_counts(model, window, shape, Selector.exactly(2), 1000, 17)
    simulated_se = counts.std(ddof=1) / np.sqrt(len(counts))
    assert abs(exact.value - counts.mean()) < 4.0 * np.hypot(exact.std_error, simulated_se)


# --- regimes --------------------------------------------------------------------


def test_rho_rule_classification():
    assert RhoRule.power(1.0).classify(2) == ("sparse", None)
    assert RhoRule.power(0.25).classify(2) == ("dense", None)
    assert RhoRule.power(0.5, prefactor=2.0).classify(2) == ("thermodynamic", pytest.approx(4.0))
    assert RhoRule.thermodynamic(3.0).classify(2) == ("thermodynamic", 3.0)
    assert RhoRule.thermodynamic(4.0)(16.0, 2) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        RhoRule("linear")


def test_regime_spec_scalings():
    sparse = RegimeSpec.build([16.0, 64.0], RhoRule.power(1.0), 2)
    assert sparse.classified_regime == "sparse"
    assert sparse.scale_factors(2) == pytest.approx([1.0, 1.0])
    assert sparse.scale_factors(3) == pytest.approx([16.0**-1, 64.0**-1])
    thermo = RegimeSpec.build([10.0, 100.0], RhoRule.thermodynamic(2.0), 2)
    assert thermo.limit_c == 2.0
    assert thermo.occupancies == pytest.approx([2.0, 2.0])
    assert thermo.scale_factors(3) == pytest.approx([10.0, 100.0])


def test_dense_growth_exponent():
    dense = RegimeSpec.build([10.0, 100.0, 1000.0], RhoRule.power(5.0 / 16.0), 2)
    assert dense.classified_regime == "dense"
    assert dense.growth_exponent(2, gamma=3.0) == pytest.approx(0.5)
    assert dense.growth_condition_holds(2, gamma=3.0)
    with pytest.raises(ValueError, match="gamma"):
        dense.scale_factors(2)


def test_growth_condition_failure_is_logged(caplog):
    spec = RegimeSpec.build([10.0, 100.0], RhoRule.power(1.0), 2)
    with caplog.at_level("WARNING"):
        assert not spec.growth_condition_holds(2)
    assert "growth condition fails" in caplog.text


def test_regime_spec_rejects_bad_grid():
    with pytest.raises(ValueError, match="strictly increasing"):
        RegimeSpec.build([4.0, 2.0], RhoRule.power(1.0), 2)
    with pytest.raises(ValueError):
        RegimeSpec.build([], RhoRule.power(1.0), 2)


def test_quartile_deviations():
    table = pd.DataFrame({"deviation": [4.0, 3.0, 2.0, 1.0, 0.5, 0.2, 0.1, 0.0]})
    assert quartile_deviations(table) == (4.0, 0.1)
    assert quartile_deviations(pd.DataFrame({"deviation": [2.0]})) == (2.0, 2.0)
    with pytest.raises(ValueError):
        quartile_deviations(pd.DataFrame({"deviation": []}))


# --- experiments ----------------------------------------------------------------


def test_sparse_regime_experiment_table(radial, disk):
    regime = RegimeSpec.build([16.0, 64.0], RhoRule.power(1.0), 2)
    report = regime_experiment(regime, disk, Selector.exactly(2), radial, 20, 5, QUICK)
    table = report.table
    assert list(table.columns) == REGIME_COLUMNS + SPARSE_COLUMNS
    assert len(table) == 2
    assert table["scaled"].to_numpy() == pytest.approx(table["mean_f"].to_numpy())
    assert (table["limit"] == report.value).all()
    ratios = table["kf_over_u"].dropna()
    assert (ratios <= 1.0 + 1e-12).all()


def test_regime_experiment_independent_of_threads(disk):
    regime = RegimeSpec.build([16.0, 32.0], RhoRule.power(1.0), 2)
    serial = regime_experiment(regime, disk, Selector.exactly(1), STEEP, 8, 3, QUICK)
    threaded = regime_experiment(
        regime, disk, Selector.exactly(1), STEEP, 8, 3, QUICK, runner=ReplicationRunner(threads=3, chunk_size=2)
    )
    pd.testing.assert_frame_equal(serial.table, threaded.table)


def test_thermodynamic_isolated_points_on_torus():
    window = Window.cube(2, 10.0, periodic=True)
    regime = RegimeSpec.build([25.0, 100.0], RhoRule.thermodynamic(1.0), 2)
    report = regime_experiment(
        regime, ShapeS("euclidean", 1.0, 2), Selector.exactly(1), HomogeneousModel(1.0), 30, 8, QUICK, window=window
    )
    assert report.value == pytest.approx(400.0 * np.exp(-np.pi))
    assert np.abs(report.table["ratio"].to_numpy() - 1.0).max() < 0.05


def test_homogeneous_experiment_needs_torus(disk, unit_rate):
    regime = RegimeSpec.build([16.0, 64.0], RhoRule.power(1.0), 2)
    with pytest.raises(ValueError):
        regime_experiment(regime, disk, Selector.exactly(1), unit_rate, 4, 0, QUICK, window=Window.cube(2, 5.0))


def test_dense_experiment_requires_radial_model(disk):
    custom = CustomModel(density_fn=power_profile, sup_bound=1.0, envelope=(1.0, 3.0))
    regime = RegimeSpec.build([16.0, 64.0], RhoRule.power(0.25), 2)
    with pytest.raises(ValueError, match="radial_power"):
        strong_law_experiment(regime, disk, Selector.exactly(1), custom, 0, QUICK)


def test_strong_law_with_empty_selector(radial, disk):
    regime = RegimeSpec.build([8.0, 16.0, 32.0, 64.0], RhoRule.power(1.0), 2)
    report = strong_law_experiment(regime, disk, Selector.empty(2), radial, 1, QUICK)
    table = report.table
    assert list(table.columns) == STRONG_LAW_COLUMNS
    assert report.value == 0.0
    assert (table["f"] == 0).all()
    assert (table["running_max_deviation"] == 0).all()


def test_strong_law_running_max_is_suffix_maximum(disk):
    regime = RegimeSpec.build([4.0, 8.0, 16.0, 32.0, 64.0], RhoRule.power(0.75), 2)
    table = strong_law_experiment(regime, disk, Selector.exactly(1), STEEP, 2, QUICK).table
    deviation = table["deviation"].to_numpy()
    expected = [deviation[i:].max() for i in range(len(deviation))]
    assert table["running_max_deviation"].to_numpy() == pytest.approx(expected)
    assert table["growth_ok"].all()


@pytest.mark.slow
def test_sparse_pairs_converge_on_torus():
    window = Window.cube(2, 5.0, periodic=True)
    regime = RegimeSpec.build([100.0, 1600.0], RhoRule.power(0.75), 2)
    report = regime_experiment(
        regime, ShapeS("euclidean", 1.0, 2), Selector.exactly(2), HomogeneousModel(1.0), 20, 12, QUICK,
        window=window,
    )
    assert report.value == pytest.approx(100.0 * np.pi / 2.0)
    gaps = np.abs(report.table["ratio"].to_numpy() - 1.0)
    assert gaps[-1] < gaps[0]
    assert gaps[-1] < 0.15
    assert report.table["bracket_ok"].all()


@pytest.mark.slow
@pytest.mark.parametrize("seed", [1, 2, 3])
def test_strong_law_deviation_shrinks_along_the_grid(seed):
    window = Window.cube(2, 2.0, periodic=True)
    regime = RegimeSpec.build([2.0**p for p in range(4, 15)], RhoRule.power(1.0), 2)
    report = strong_law_experiment(
        regime, ShapeS("euclidean", 1.0, 2), Selector.exactly(1), HomogeneousModel(1.0), seed, QUICK, window=window
    )
    assert report.value == pytest.approx(16.0)
    bottom, top = quartile_deviations(report.table)
    assert top < bottom
    assert report.table["growth_ok"].all()


# --- consistency ----------------------------------------------------------------


def _agree(first, second, width=4.0):
    return abs(first.value - second.value) <= width * np.hypot(first.std_error, second.std_error)


@pytest.mark.slow
def test_constants_stable_when_samples_double(radial, disk):
    pair = Selector.exactly(2)
    for compute in (
        lambda n, seed: sparse_constant(radial, disk, Selector.exactly(3), n_samples=n, seed=seed),
        lambda n, seed: thermo_constant(radial, disk, pair, c=1.0, n_samples=n, inner_samples=200, seed=seed),
        lambda n, seed: dense_constant(radial, disk, pair, n_samples=n, inner_samples=200, seed=seed),
    ):
        single = compute(20000, 31)
        double = compute(40000, 32)
        assert double.std_error < single.std_error
        assert _agree(single, double)


def test_doubling_lengths_and_quartering_rates_keeps_expectations():
    small = (HomogeneousModel(1.0), ShapeS("euclidean", 0.5, 2), Window.cube(2, 5.0, periodic=True))
    large = (HomogeneousModel(0.25), ShapeS("euclidean", 1.0, 2), Window.cube(2, 10.0, periodic=True))

    singles = [expected_count_exact(m, s, Selector.exactly(1), w) for m, s, w in (small, large)]
    assert singles[0].value == pytest.approx(singles[1].value, rel=1e-12)

    pairs = [
        expected_count_exact(m, s, Selector.exactly(2), w, n_samples=50000, inner_samples=200, seed=i)
        for i, (m, s, w) in enumerate((small, large))
    ]
    assert _agree(pairs[0], pairs[1])

    means = []
    for (m, s, w), seed in zip((small, large), (41, 42)):
        counts = replicate_counts(m, w, s, Selector.exactly(2), 300, seed)
        means.append((counts.mean(), counts.std(ddof=1) / np.sqrt(len(counts))))
    assert abs(means[0][0] - means[1][0]) < 4.0 * np.hypot(means[0][1], means[1][1])
