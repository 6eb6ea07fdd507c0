import numpy as np
import pytest
from scipy import integrate, stats

from core.geometry.shape import ShapeS
from core.intensity import (
    CustomModel,
    HomogeneousModel,
    PointConfig,
    RadialPowerModel,
    Window,
    create_intensity_model,
    sample_poisson,
    sigma_s,
    truncation_bias,
    validate_integrability,
    window_radius_for_tail,
)
from core.intensity.factory import load_callable


def bump(x):
    return np.exp(-np.sum(x**2, axis=1))


def test_window_geometry():
    window = Window.box([0.0, 0.0], [2.0, 1.0])
    assert window.volume == pytest.approx(8.0)
    assert window.contains(np.array([[2.0, 1.0], [2.1, 0.0]])).tolist() == [True, False]
    assert window.contains(np.array([[1.5, 0.0]]), margin=1.0).tolist() == [False]

    ball = Window.ball([0.0, 0.0], 2.0)
    assert ball.volume == pytest.approx(4.0 * np.pi)
    assert ball.nearest_origin_distance() == 0.0


def test_torus_min_image_and_wrap(torus):
    d = torus.min_image(np.array([[19.0, -19.5]]))
    assert d == pytest.approx(np.array([[-1.0, 0.5]]))
    assert torus.wrap(np.array([[10.5, -11.0]])) == pytest.approx(np.array([[-9.5, 9.0]]))


def test_window_rejects_bad_extent():
    with pytest.raises(ValueError):
        Window.box([0.0, 0.0], [1.0, 0.0])
    with pytest.raises(ValueError):
        Window.box([0.0, 0.0], [1.0])


def test_point_config_is_read_only(torus):
    config = PointConfig(np.zeros((2, 2)) + [[0, 0], [1, 1]], torus)
    with pytest.raises(ValueError):
        config.points[0, 0] = 5.0
    assert config.index_of([1.0, 1.0]) == 1
    assert len(config.with_point([2.0, 2.0])) == 3
    with pytest.raises(IndexError):
        config.without(4)


def test_radial_mk_integral_matches_quadrature():
    model = RadialPowerModel(alpha=2.0, gamma=3.0)
    expected, _ = integrate.quad(lambda r: 2.0**2 * (1.0 + r) ** -6.0 * 2.0 * np.pi * r, 0.0, np.inf)
    assert model.mk_integral(2, 2) == pytest.approx(expected, rel=1e-8)
    assert model.tail_mk_integral(2, 2, 0.0) == pytest.approx(expected, rel=1e-8)
    assert model.tail_mk_integral(2, 2, 5.0) < model.tail_mk_integral(2, 2, 1.0)


def test_radial_mk_integral_diverges_when_gamma_k_at_most_d():
    assert RadialPowerModel(alpha=1.0, gamma=1.0).mk_integral(2, 2) == float("inf")


def test_homogeneous_mass_scales_with_t():
    model = HomogeneousModel(rate=2.0, scale=3.0)
    window = Window.cube(2, 5.0)
    assert model.mass(window) == pytest.approx(600.0)
    assert model.with_scale(1.0).mass(window) == pytest.approx(200.0)


def test_radial_mass_on_ball_window(radial):
    window = Window.ball([0.0, 0.0], 4.0)
    expected, _ = integrate.quad(lambda r: (1.0 + r) ** -3.0 * 2.0 * np.pi * r, 0.0, 4.0)
    assert radial.mass(window) == pytest.approx(expected, rel=1e-6)


def test_sampler_is_deterministic(unit_rate, torus):
    first = sample_poisson(unit_rate, torus, 7, replication=3)
    again = sample_poisson(unit_rate, torus, 7, replication=3)
    other = sample_poisson(unit_rate, torus, 7, replication=4)
    assert np.array_equal(first.points, again.points)
    assert not np.array_equal(first.points, other.points)
    first.validate()


def test_zero_rate_gives_empty_configuration(torus):
    config = sample_poisson(HomogeneousModel(rate=0.0), torus, 1)
    assert len(config) == 0


def test_sampler_mean_count(torus):
    model = HomogeneousModel(rate=0.5)
    counts = np.array([len(sample_poisson(model, torus, 11, replication=i)) for i in range(200)])
    mean = model.mass(torus)
    assert abs(counts.mean() - mean) < 4.0 * np.sqrt(mean / 200)


def test_thinned_sampler_respects_window_and_density(radial):
    window = Window.ball([0.0, 0.0], 5.0)
    model = radial.with_scale(200.0)
    counts = [len(sample_poisson(model, window, 5, replication=i)) for i in range(100)]
    mean = model.mass(window)
    assert abs(np.mean(counts) - mean) < 4.0 * np.sqrt(mean / 100)
    config = sample_poisson(model, window, 5)
    assert np.all(np.linalg.norm(config.points, axis=1) <= 5.0)


def test_torus_requires_homogeneous_model(radial, torus):
    with pytest.raises(ValueError, match="homogeneous"):
        sample_poisson(radial, torus, 0)


def test_custom_density_exceeding_bound_is_rejected():
    model = CustomModel(density_fn=lambda x: np.full(len(x), 2.0), sup_bound=1.0)
    with pytest.raises(ValueError, match="exceeds"):
        sample_poisson(model.with_scale(50.0), Window.cube(2, 2.0), 0)


def test_factory_builds_every_variant():
    assert isinstance(create_intensity_model({"variant": "homogeneous", "rate": 1}), HomogeneousModel)
    model = create_intensity_model({"variant": "radial_power", "alpha": 100, "gamma": 2, "scale": 3})
    assert isinstance(model, RadialPowerModel) and model.scale == 3.0
    custom = create_intensity_model(
        {"variant": "custom", "density": bump, "sup_bound": 1.0, "envelope": [1.0, 3.0], "mk_integrals": {"2": 0.5}}
    )
    assert custom.mk_integral(2, 2) == 0.5
    assert custom.envelope == (1.0, 3.0)
    with pytest.raises(ValueError, match="not supported"):
        create_intensity_model({"variant": "lattice"})


def test_load_callable_errors():
    assert load_callable("numpy.ones") is np.ones
    for bad in ["nodots", "numpy.not_there", "no_such_module_xyz.f", "math.pi"]:
        with pytest.raises(ValueError):
            load_callable(bad)


def test_sigma_for_homogeneous_and_radial(disk, radial):
    assert sigma_s(HomogeneousModel(rate=2.0, scale=3.0), disk) == pytest.approx(6.0 * np.pi)
    expected, _ = integrate.quad(lambda r: (1.0 + r) ** -3.0 * 2.0 * np.pi * r, 0.0, 1.0)
    assert sigma_s(radial, disk) == pytest.approx(expected, rel=1e-6)


def test_sigma_search_for_custom_density(disk):
    model = CustomModel(density_fn=bump, sup_bound=1.0, search_box=((-1.0, -1.0), (1.0, 1.0)))
    expected, _ = integrate.quad(lambda r: np.exp(-r * r) * 2.0 * np.pi * r, 0.0, 1.0)
    assert sigma_s(model, disk) == pytest.approx(expected, rel=1e-2)
    with pytest.raises(ValueError, match="sigma search region required"):
        sigma_s(CustomModel(density_fn=bump, sup_bound=1.0), disk)


def test_integrability_verdicts(disk, radial, torus):
    assert validate_integrability(HomogeneousModel(rate=1.0), 2, disk)["verdict"] == "not-integrable"
    assert validate_integrability(HomogeneousModel(rate=1.0), 2, disk, torus)["verdict"] == "integrable-on-window"
    diagnostic = validate_integrability(radial, 2, disk)
    assert diagnostic["verdict"] == "integrable"
    assert diagnostic["u_upper_bound"] == pytest.approx(2 * np.pi * radial.mk_integral(2, 2))
    assert validate_integrability(RadialPowerModel(1.0, 1.0), 2, disk)["verdict"] == "unknown"


def test_window_radius_for_tail(radial):
    radius = window_radius_for_tail(radial, 2, 2, 1e-3)
    total = radial.mk_integral(2, 2)
    assert truncation_bias(radial, 2, 2, radius) / total == pytest.approx(1e-3, rel=1e-4)
    with pytest.raises(ValueError, match="not integrable"):
        window_radius_for_tail(RadialPowerModel(1.0, 1.0), 2, 2, 1e-3)


def test_shape_bounds():
    cube = ShapeS("sup", 0.5, 3)
    assert cube.theta == pytest.approx(np.sqrt(3))
    assert cube.volume == pytest.approx(1.0)
    assert cube.contains(np.array([[0.5, -0.5, 0.5], [0.51, 0, 0]])).tolist() == [True, False]


def test_superposition_matches_summed_intensity():
    window = Window.ball([0.0, 0.0], 4.0)
    base = RadialPowerModel(alpha=1.0, gamma=3.0)
    first, second, summed = base.with_scale(20.0), base.with_scale(30.0), base.with_scale(50.0)
    union_counts, direct_counts, union_radii, direct_radii = [], [], [], []
    for i in range(2000):
        a = sample_poisson(first, window, 1, replication=i).points
        b = sample_poisson(second, window, 2, replication=i).points
        c = sample_poisson(summed, window, 3, replication=i).points
        union_counts.append(len(a) + len(b))
        direct_counts.append(len(c))
        if i < 200:
            union_radii.extend(np.linalg.norm(np.vstack([a, b]), axis=1))
            direct_radii.extend(np.linalg.norm(c, axis=1))
    assert stats.ks_2samp(union_counts, direct_counts).pvalue > 1e-3
    assert stats.ks_2samp(union_radii, direct_radii).pvalue > 1e-3
    assert np.mean(union_counts) == pytest.approx(summed.mass(window), rel=0.02)


def test_sigma_approaches_pointwise_limit_as_rho_shrinks(radial):
    shapes = [ShapeS("euclidean", rho, 2) for rho in (1.0, 0.3, 0.1, 0.01)]
    values = [sigma_s(radial, shape) for shape in shapes]
    averages = [value / shape.volume for value, shape in zip(values, shapes)]
    assert all(b < a for a, b in zip(values, values[1:]))
    assert all(b > a for a, b in zip(averages, averages[1:]))
    assert averages[-1] == pytest.approx(radial.alpha, rel=0.03)
    assert averages[-1] < radial.alpha


def test_peaked_radial_mean_count_matches_quadrature():
    model = RadialPowerModel(alpha=100.0, gamma=2.0)
    window = Window.cube(2, 30.0)
    quadrant, _ = integrate.dblquad(lambda y, x: 100.0 * (np.hypot(x, y) + 1.0) ** -2.0, 0.0, 30.0, 0.0, 30.0)
    oracle = 4.0 * quadrant
    assert model.mass(window) == pytest.approx(oracle, rel=1e-5)
    counts = np.array([len(sample_poisson(model, window, 7, replication=i)) for i in range(40)])
    assert abs(counts.mean() - oracle) < 4.0 * np.sqrt(oracle / len(counts))
