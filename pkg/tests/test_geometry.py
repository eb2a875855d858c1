import numpy as np
import pytest
from scipy.stats import chi2

from losmimo.errors import InvariantViolation
from losmimo.geometry import (
    DiscCluster,
    NodeCluster,
    fresnel_distance,
    project_to_disc,
    sample_ball_cluster,
    sample_disc_cluster,
)


def test_single_point_containment():
    c = sample_ball_cluster(1.0, 1, seed=7)
    assert c.count == 1
    assert np.linalg.norm(c.nodes[0]) <= 1.0
    d = sample_disc_cluster(1.0, 1, seed=7)
    assert np.linalg.norm(d.nodes[0]) <= 1.0


def test_sampling_determinism():
    a = sample_ball_cluster(3.0, 50, seed=42, counter=5)
    b = sample_ball_cluster(3.0, 50, seed=42, counter=5)
    assert np.array_equal(a.nodes, b.nodes)
    c = sample_ball_cluster(3.0, 50, seed=42, counter=6)
    assert not np.array_equal(a.nodes, c.nodes)
    d1 = sample_disc_cluster(2.0, 50, seed=9)
    d2 = sample_disc_cluster(2.0, 50, seed=9)
    assert np.array_equal(d1.nodes, d2.nodes)


def test_ball_third_moment():
    # uniform ball of radius R: radius density 3 r^2 / R^3, so E r^3 = R^3 / 2
    R = 10.0
    c = sample_ball_cluster(R, 10_000, seed=11)
    emp = float(np.mean(np.linalg.norm(c.nodes, axis=1) ** 3))
    assert emp == pytest.approx(R**3 / 2.0, rel=0.02)


def test_disc_second_moment():
    # uniform disc of radius R: E r^2 = R^2 / 2
    R = 1.0
    c = sample_disc_cluster(R, 100_000, seed=13)
    emp = float(np.mean(np.sum(c.nodes**2, axis=1)))
    assert emp == pytest.approx(0.5, rel=0.01)


def test_disc_angular_uniformity_chi2():
    c = sample_disc_cluster(1.0, 100_000, seed=17)
    angles = np.arctan2(c.nodes[:, 1], c.nodes[:, 0])
    counts, _ = np.histogram(angles, bins=36, range=(-np.pi, np.pi))
    expected = len(angles) / 36
    stat = float(np.sum((counts - expected) ** 2 / expected))
    assert stat < chi2.ppf(0.99, df=35)


def test_rejects_empty_cluster():
    with pytest.raises(InvariantViolation):
        sample_ball_cluster(1.0, 0, seed=0)
    with pytest.raises(InvariantViolation):
        sample_disc_cluster(1.0, 0, seed=0)


def test_cluster_invariants():
    with pytest.raises(InvariantViolation):
        NodeCluster(nodes=np.array([[2.0, 0.0, 0.0]]), radius_m=1.0)
    with pytest.raises(InvariantViolation):
        DiscCluster(nodes=np.array([[2.0, 0.0]]), disc_radius_m=1.0)


def test_projection_drops_los_axis():
    cluster = NodeCluster(nodes=np.array([[5.0, 0.0, 0.0], [1.0, 2.0, 3.0]]), radius_m=6.0)
    disc = project_to_disc(cluster)
    assert np.array_equal(disc.nodes, np.array([[0.0, 0.0], [2.0, 3.0]]))
    assert disc.disc_radius_m == cluster.radius_m
    assert disc.count == cluster.count


def test_fresnel_distance_values():
    assert fresnel_distance(np.zeros(3), np.zeros(3), 1e6) == 0.0
    assert fresnel_distance(np.zeros(3), np.array([1.0, 0.0, 0.0]), 1e6) == 1.0
    got = fresnel_distance(np.array([0.0, 3.0, 4.0]), np.zeros(3), 1e6)
    assert got == pytest.approx(25.0 / 2e6, rel=1e-14)


def test_fresnel_distance_range_precondition():
    with pytest.raises(InvariantViolation):
        fresnel_distance(np.array([0.0, 50.0, 0.0]), np.zeros(3), d=100.0)


def test_fresnel_matches_exact_distance_at_long_range():
    # |exact - (d + fresnel)| < lam/100 for d >= 1e4 * radius, lam = 1 cm
    rng = np.random.default_rng(23)
    radius, lam = 1.0e4, 0.01
    d = 1.0e4 * radius
    tx = sample_ball_cluster(radius, 24, seed=3, counter=0)
    rx = sample_ball_cluster(radius, 24, seed=3, counter=1)
    for u in tx.nodes:
        for v in rx.nodes:
            exact = float(np.linalg.norm([d + v[0] - u[0], v[1] - u[1], v[2] - u[2]]))
            approx = d + fresnel_distance(u, v, d)
            assert abs(exact - approx) < lam / 100.0
