"""Graph construction: naive and sweep builders, persistence, annuli."""

import math

import numpy as np
import pytest

from hrgg.geometry import (
    ModelParams,
    RadiusRule,
    direction_from_angles,
    hyperbolic_distance,
)
from hrgg.graph import (
    Graph,
    build_euclidean_graph,
    build_hyperbolic_graph,
    load_graph,
    restrict_annulus,
    save_graph,
)
from hrgg.sampling import (
    PointCloud,
    RngStream,
    sample_euclidean_cloud,
    sample_point_cloud,
)


def make_params(**over):
    base = dict(d=2, alpha=2.0, zeta=1.0, n=400.0,
                radius_rule=RadiusRule.thermodynamic(1.0), gamma=1.0)
    base.update(over)
    return ModelParams(**base)


def edges_by_metric(cloud):
    """Reference edge set straight from the distance definition."""
    n = len(cloud)
    r = cloud.radii
    out = set()
    for i in range(n):
        for j in range(i + 1, n):
            cosang = float(np.clip(cloud.directions[i] @ cloud.directions[j],
                                   -1.0, 1.0))
            dist = hyperbolic_distance(r[i], r[j], math.acos(cosang),
                                       cloud.params.zeta)
            if 0.0 < dist <= cloud.R:
                out.add((i, j))
    return out


def test_naive_builder_matches_metric_definition():
    cloud = sample_point_cloud(make_params(n=150.0), 5)
    g = build_hyperbolic_graph(cloud, strategy="naive")
    assert set(map(tuple, g.edge_array())) == edges_by_metric(cloud)


@pytest.mark.parametrize("alpha,seed", [(2.0, 0), (0.8, 1), (0.55, 2), (3.0, 3)])
def test_sweep_equals_naive(alpha, seed):
    cloud = sample_point_cloud(make_params(alpha=alpha, n=2500.0), seed)
    a = build_hyperbolic_graph(cloud, strategy="naive")
    b = build_hyperbolic_graph(cloud, strategy="sweep")
    np.testing.assert_array_equal(a.indptr, b.indptr)
    np.testing.assert_array_equal(a.indices, b.indices)


def test_sweep_handles_angular_wraparound():
    """Points packed around the 0/2pi seam must pair across it."""
    params = make_params(n=600.0)
    base = sample_point_cloud(params, 17)
    angles = np.mod(base.angles * 0.02, 2 * math.pi)  # squeeze near angle 0
    angles[::2] = np.mod(angles[::2] - 0.04, 2 * math.pi)  # half just below 2pi
    squeezed = PointCloud(params=params, R=base.R, t=base.t, angles=angles,
                          directions=direction_from_angles(angles),
                          seed=base.seed, stream_index=base.stream_index,
                          annulus_gamma=base.annulus_gamma)
    a = build_hyperbolic_graph(squeezed, strategy="naive")
    b = build_hyperbolic_graph(squeezed, strategy="sweep")
    assert a.num_edges > 0
    np.testing.assert_array_equal(a.indptr, b.indptr)
    np.testing.assert_array_equal(a.indices, b.indices)


def test_auto_strategy_picks_sweep_only_at_scale():
    small = build_hyperbolic_graph(sample_point_cloud(make_params(n=100.0), 1))
    assert small.build_meta["strategy"] == "naive"
    big = build_hyperbolic_graph(sample_point_cloud(make_params(n=4000.0), 1))
    assert big.build_meta["strategy"] == "sweep"


def test_coincident_points_never_self_connect():
    params = make_params(radius_rule=RadiusRule.explicit(10.0))
    t = np.array([1.0, 1.0, 2.5])
    angles = np.array([[0.3], [0.3], [0.3]])  # first two coincide exactly
    cloud = PointCloud(params=params, R=10.0, t=t, angles=angles,
                       directions=direction_from_angles(angles),
                       seed=0, stream_index=0, annulus_gamma=None)
    g = build_hyperbolic_graph(cloud, strategy="naive")
    assert not g.has_edge(0, 1)
    assert g.has_edge(0, 2) and g.has_edge(1, 2)


def test_graph_accessors_consistent():
    cloud = sample_point_cloud(make_params(n=300.0), 8)
    g = build_hyperbolic_graph(cloud)
    g.validate()
    assert g.degrees.sum() == 2 * g.num_edges
    edges = g.edge_array()
    assert np.all(edges[:, 0] < edges[:, 1])
    for v in (0, len(cloud) // 2):
        nbrs = g.neighbors(v)
        assert np.all(np.diff(nbrs) > 0)
        assert all(g.has_edge(v, int(u)) for u in nbrs)
    assert not g.has_edge(0, 0)


def test_restrict_annulus_bounds_depth():
    cloud = sample_point_cloud(make_params(alpha=0.6, n=800.0), 12)
    ann = restrict_annulus(cloud, 0.3)
    assert ann.t.max() <= 0.3 * cloud.R + 1e-12
    assert ann.annulus_gamma == 0.3
    full = restrict_annulus(cloud, 1.0)
    assert len(full) == len(cloud)
    with pytest.raises(ValueError):
        restrict_annulus(cloud, 0.0)
    with pytest.raises(ValueError):
        restrict_annulus(cloud, 1.5)


def test_full_annulus_graph_identical_to_plain_build():
    cloud = sample_point_cloud(make_params(n=500.0), 4)
    direct = build_hyperbolic_graph(cloud)
    via_annulus = build_hyperbolic_graph(restrict_annulus(cloud, 1.0))
    np.testing.assert_array_equal(direct.indptr, via_annulus.indptr)
    np.testing.assert_array_equal(direct.indices, via_annulus.indices)


def test_save_load_round_trip(tmp_path):
    cloud = sample_point_cloud(make_params(n=250.0), 6)
    g = build_hyperbolic_graph(cloud)
    path = tmp_path / "graph.txt"
    save_graph(g, path)
    back = load_graph(path)
    assert back.num_vertices == g.num_vertices
    np.testing.assert_array_equal(back.indptr, g.indptr)
    np.testing.assert_array_equal(back.indices, g.indices)
    assert back.build_meta["R"] == g.build_meta["R"]


def test_euclidean_builder_matches_bruteforce():
    rng = RngStream(2, stream_index=0)
    pts = sample_euclidean_cloud(200.0, 1.0, 2, rng)
    s = 0.2
    g = build_euclidean_graph(pts, s)
    expected = set()
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            dist = float(np.linalg.norm(pts[i] - pts[j]))
            if 0.0 < dist <= s:
                expected.add((i, j))
    assert set(map(tuple, g.edge_array())) == expected


def test_empty_cloud_builds_empty_graph():
    cloud = sample_point_cloud(
        make_params(n=1e-9, radius_rule=RadiusRule.explicit(8.0)), 0)
    g = build_hyperbolic_graph(cloud)
    assert g.num_vertices == 0
    assert g.num_edges == 0
