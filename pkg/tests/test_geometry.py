import networkx as nx
import numpy as np
import pytest

from core.geometry import (
    ShapeS,
    build_graph,
    exact_union_volumes,
    lens_area,
    packing_constant,
    resolve_packing_constant,
    union_volume,
)
from core.geometry.grid import brute_force_pairs, neighbor_pairs
from core.geometry.unionfind import component_labels
from core.geometry.volume import union_volume_mc
from core.intensity import PointConfig, Window


def _sorted_pairs(edges):
    return sorted(map(tuple, np.asarray(edges).tolist()))


@pytest.mark.parametrize("norm", ["euclidean", "sup"])
@pytest.mark.parametrize("d", [1, 2, 3])
@pytest.mark.parametrize("periodic", [False, True])
def test_grid_matches_brute_force(norm, d, periodic, rng):
    window = Window.cube(d, 4.0, periodic=periodic)
    shape = ShapeS(norm, 0.7, d)
    n = {1: 60, 2: 300, 3: 500}[d]
    points = window.lower + window.sides * rng.random((n, d))
    expected = _sorted_pairs(brute_force_pairs(points, shape, window))
    assert _sorted_pairs(neighbor_pairs(points, shape, window)) == expected
    assert _sorted_pairs(neighbor_pairs(points, shape, window, threads=4)) == expected


def test_grid_edges_are_sorted_and_closed():
    window = Window.cube(1, 5.0)
    shape = ShapeS("euclidean", 1.0, 1)
    edges = neighbor_pairs(np.array([[0.0], [1.0], [3.0]]), shape, window)
    assert edges.tolist() == [[0, 1]]


def test_torus_too_small_for_shape_raises():
    window = Window.cube(2, 1.0, periodic=True)
    with pytest.raises(ValueError, match="Torus sides"):
        neighbor_pairs(np.zeros((2, 2)) + [[0, 0], [0.5, 0.5]], ShapeS("sup", 1.5, 2), window)


def test_torus_edge_uses_minimum_image(torus, disk):
    config = PointConfig(np.array([[-9.8, 0.0], [9.8, 0.0]]), torus)
    graph = build_graph(config, disk)
    assert graph.n_edges == 1
    assert graph.n_components == 1


def test_graph_components_match_networkx(rng, make_config, nx_graph, box):
    shape = ShapeS("euclidean", 0.8, 2)
    config = make_config(rng, 250, box)
    graph = build_graph(config, shape, threads=2)
    oracle = nx_graph(config, shape)
    assert graph.n_edges == oracle.number_of_edges()
    expected = sorted(sorted(c) for c in nx.connected_components(oracle))
    assert sorted(c.tolist() for c in graph.components()) == expected
    assert int(graph.component_sizes.sum()) == len(config)
    for v in (0, 17, 101):
        assert sorted(graph.neighbors(v).tolist()) == sorted(oracle.neighbors(v))


def test_graph_dimension_mismatch(box):
    config = PointConfig(np.zeros((1, 2)), box)
    with pytest.raises(ValueError, match="dimension"):
        build_graph(config, ShapeS("euclidean", 1.0, 3))


def test_empty_graph(box, disk):
    graph = build_graph(PointConfig(np.zeros((0, 2)), box), disk)
    assert graph.n_vertices == 0
    assert graph.n_components == 0
    assert graph.components() == []


def test_component_labels_numbered_by_smallest_vertex():
    labels = component_labels(6, np.array([[4, 5], [1, 3], [3, 5]]))
    assert labels.tolist() == [0, 1, 2, 1, 1, 1]
    assert component_labels(0, np.zeros((0, 2))).size == 0


def test_union_volume_single_and_disjoint(disk):
    assert union_volume(disk, np.zeros((0, 2))).value == pytest.approx(np.pi)
    assert union_volume(disk, [[0.0, 0.0]]).value == pytest.approx(np.pi)
    far = union_volume(disk, [[2.0, 0.0]])
    assert far.exact
    assert far.value == pytest.approx(2.0 * np.pi)


def test_union_volume_sup_and_interval():
    square = ShapeS("sup", 1.0, 2)
    assert union_volume(square, [[1.0, 0.0]]).value == pytest.approx(6.0)
    assert union_volume(square, [[1.0, 1.0], [2.0, 0.0]]).value == pytest.approx(4.0 * 3 - 1.0 - 1.0)
    segment = ShapeS("euclidean", 1.0, 1)
    assert union_volume(segment, [[1.0], [5.0]]).value == pytest.approx(5.0)


def test_lens_area_matches_hit_or_miss(disk):
    exact = 2.0 * np.pi - lens_area(1.0, 0.8)
    estimate = union_volume_mc(disk, [[0.8, 0.0]], rel_error=2e-3, seed=3)
    assert abs(estimate.value - exact) < 4.0 * estimate.std_error
    assert lens_area(1.0, 0.0) == pytest.approx(np.pi)
    assert lens_area(1.0, 2.5) == 0.0


def test_union_volume_three_disks_by_hit_or_miss(disk):
    estimate = union_volume(disk, [[3.0, 0.0], [0.0, 3.0]], rel_error=5e-3, seed=1)
    assert not estimate.exact
    assert abs(estimate.value - 3.0 * np.pi) < 4.0 * estimate.std_error


def test_union_volume_rejects_non_positive_error(disk):
    with pytest.raises(ValueError):
        union_volume(disk, [[1.0, 0.0], [0.0, 1.0]], rel_error=0.0)


def test_packing_known_values():
    planar = packing_constant(ShapeS("euclidean", 2.0, 2), restarts=4, pool_size=1500)
    assert planar.value == 5
    assert 1 <= planar.lower_bound <= 5
    assert packing_constant(ShapeS("sup", 1.0, 3), restarts=2, pool_size=500).value == 8


def test_resolve_packing_constant(caplog):
    assert resolve_packing_constant(ShapeS("euclidean", 1.0, 1)).value == 2
    ball = ShapeS("euclidean", 1.0, 3)
    with pytest.raises(ValueError, match="packing_override"):
        resolve_packing_constant(ball, restarts=2, pool_size=500)
    with caplog.at_level("WARNING"):
        resolution = resolve_packing_constant(ball, override=12, restarts=2, pool_size=500)
    assert not resolution.certified
    assert resolution.value >= 12
    assert "c_S not certified" in caplog.text


def test_grid_handles_far_apart_points_with_tiny_shape():
    window = Window.cube(2, 1e6)
    shape = ShapeS("euclidean", 1e-7, 2)
    points = np.array([[-4e5, -4e5], [4e5, 4e5], [4e5, 4e5 + 5e-8]])
    assert neighbor_pairs(points, shape, window).tolist() == [[1, 2]]
    assert neighbor_pairs(points[:2], shape, window).shape == (0, 2)


@pytest.mark.parametrize("norm", ["euclidean", "sup"])
def test_edges_are_monotone_in_rho(norm, rng, make_config, box):
    config = make_config(rng, 300, box)
    previous = set()
    for rho in (0.3, 0.6, 0.9, 1.2):
        edges = set(map(tuple, build_graph(config, ShapeS(norm, rho, 2)).edges.tolist()))
        assert previous <= edges
        previous = edges


def test_exact_union_volumes_match_per_row(rng):
    for shape, k in ((ShapeS("sup", 1.0, 2), 4), (ShapeS("euclidean", 1.0, 1), 5), (ShapeS("euclidean", 1.0, 2), 2)):
        d = shape.dimension
        centers = np.concatenate([np.zeros((20, 1, d)), rng.uniform(-2.0, 2.0, (20, k - 1, d))], axis=1)
        batch = exact_union_volumes(shape, centers)
        for row, value in zip(centers, batch):
            assert value == pytest.approx(union_volume(shape, row[1:]).value)
    assert exact_union_volumes(ShapeS("euclidean", 1.0, 2), np.zeros((3, 3, 2))) is None


def test_union_volume_is_monotone_in_offsets(disk):
    offsets = [[0.5, 0.0], [0.0, 0.7], [-0.6, -0.4], [1.5, 1.5]]
    previous = union_volume(disk, [])
    for m in range(1, len(offsets) + 1):
        current = union_volume(disk, offsets[:m], rel_error=5e-3, seed=m)
        assert current.value >= previous.value - 4.0 * (current.std_error + previous.std_error)
        previous = current

    square = ShapeS("sup", 1.0, 2)
    values = [union_volume(square, offsets[:m]).value for m in range(len(offsets) + 1)]
    assert all(b >= a for a, b in zip(values, values[1:]))
