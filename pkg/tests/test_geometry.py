"""Distances, geodesic averages and polylines on every manifold."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from scipy.linalg import fractional_matrix_power, logm, sqrtm
from scipy.spatial.transform import Rotation, Slerp

from conftest import ALL_KINDS, CURVED, KIND_IDS, seeds
from georefine.errors import GeodesicDomainError, KindMismatchError, ValidationError
from georefine.geometry import (
    OPEN,
    PERIODIC,
    SPD,
    Euclidean,
    ManifoldPoint,
    Polyline,
    Rotations3D,
    Sphere,
    admissible,
    canonical_quaternion,
    distance,
    geodesic_point,
    manifold_from_json,
    mesh_size,
    sample_interpolant,
)
from georefine.samples import random_loop, random_point

S2 = Sphere(3)
E2 = Euclidean(2)
P2 = SPD(2)


def pt(kind, x):
    return ManifoldPoint(kind, np.asarray(x, dtype=float))


# -- oracle values -----------------------------------------------------------


def test_euclidean_distance():
    assert distance(pt(E2, [0, 0]), pt(E2, [3, 4])) == pytest.approx(5.0, abs=1e-15)


def test_sphere_distance_orthogonal():
    assert distance(pt(S2, [1, 0, 0]), pt(S2, [0, 1, 0])) == pytest.approx(np.pi / 2, abs=1e-15)


def test_spd_distance_diagonal():
    d = distance(pt(P2, np.eye(2)), pt(P2, np.diag([np.e**2, 1.0])))
    assert d == pytest.approx(2.0, abs=1e-13)


def test_euclidean_average():
    out = geodesic_point(pt(E2, [0, 0]), pt(E2, [2, 0]), 0.75)
    np.testing.assert_allclose(out.coords, [1.5, 0.0], atol=1e-15)


def test_sphere_midpoint():
    out = geodesic_point(pt(S2, [1, 0, 0]), pt(S2, [0, 1, 0]), 0.5)
    np.testing.assert_allclose(out.coords, [2**-0.5, 2**-0.5, 0.0], atol=1e-15)


def test_sphere_extrapolation():
    out = geodesic_point(pt(S2, [1, 0, 0]), pt(S2, [0, 1, 0]), -0.5)
    np.testing.assert_allclose(out.coords, [np.cos(-np.pi / 4), np.sin(-np.pi / 4), 0.0], atol=1e-15)


def test_spd_geometric_mean():
    out = geodesic_point(pt(P2, np.eye(2)), pt(P2, np.diag([4.0, 1.0])), 0.5)
    np.testing.assert_allclose(out.coords, np.diag([2.0, 1.0]), atol=1e-13)


def test_admissibility_examples():
    assert not admissible(pt(S2, [1, 0, 0]), pt(S2, [-1, 0, 0]))
    assert admissible(pt(P2, np.eye(2)), pt(P2, np.diag([100.0, 0.01])))
    assert admissible(pt(E2, [0, 0]), pt(E2, [1e9, -1e9]))


def test_mesh_size_examples():
    assert mesh_size(Polyline(E2, [[0, 0], [1, 0], [3, 0]], OPEN)) == 2.0
    assert mesh_size(Polyline(Euclidean(1), [[0], [1], [3]], PERIODIC)) == 3.0
    assert mesh_size(Polyline(S2, [[1, 0, 0], [0, 1, 0]], OPEN)) == pytest.approx(np.pi / 2)


def test_sample_interpolant_thirds():
    p = Polyline(S2, [[1, 0, 0], [0, 1, 0]], OPEN)
    out = sample_interpolant(p, 2)
    assert len(out) == 4
    ang = np.arctan2(out.points[:, 1], out.points[:, 0])
    np.testing.assert_allclose(ang, [0, np.pi / 6, np.pi / 3, np.pi / 2], atol=1e-15)
    np.testing.assert_allclose(np.linalg.norm(out.points, axis=1), 1.0, atol=1e-15)


def test_sample_interpolant_collinear():
    p = Polyline(E2, [[0, 0], [1, 1], [3, 3]], OPEN)
    out = sample_interpolant(p, 3)
    np.testing.assert_allclose(out.points[:, 0], out.points[:, 1])


# -- validation --------------------------------------------------------------


def test_sphere_repairs_small_drift_and_rejects_large():
    p = pt(S2, [1 + 5e-12, 0, 0])
    assert np.linalg.norm(p.coords) == pytest.approx(1.0, abs=1e-16)
    with pytest.raises(ValidationError):
        pt(S2, [1.001, 0, 0])


def test_quaternion_canonical_sign():
    q = pt(Rotations3D(), [-0.5, 0.5, 0.5, 0.5])
    np.testing.assert_array_equal(q.coords, [0.5, -0.5, -0.5, -0.5])
    np.testing.assert_array_equal(canonical_quaternion([0.0, -1.0, 0.0, 0.0]), [0.0, 1.0, 0.0, 0.0])


def test_spd_rejects_asymmetric_and_indefinite():
    with pytest.raises(ValidationError, match="symmetric"):
        pt(P2, [[1.0, 0.1], [0.0, 1.0]])
    with pytest.raises(ValidationError, match="eigenvalues"):
        pt(P2, [[1.0, 2.0], [2.0, 1.0]])


def test_kind_mismatch():
    with pytest.raises(KindMismatchError):
        distance(pt(E2, [0, 0]), pt(Euclidean(3), [0, 0, 0]))


def test_polyline_rejects_antipodal_wrap_pair():
    pts = [[1, 0, 0], [0, 1, 0], [-1, 0, 0]]
    Polyline(S2, pts, OPEN)
    with pytest.raises(ValidationError, match="not admissible"):
        Polyline(S2, pts, PERIODIC)


def test_polyline_needs_two_points():
    with pytest.raises(ValidationError):
        Polyline(E2, [[0, 0]], OPEN)


def test_extrapolation_window_enforced():
    a, b = pt(E2, [0, 0]), pt(E2, [1, 0])
    geodesic_point(a, b, 2.0)
    with pytest.raises(GeodesicDomainError, match="window"):
        geodesic_point(a, b, 2.5)


def test_sphere_extrapolation_past_antipode():
    a = pt(S2, [1, 0, 0])
    b = pt(S2, [np.cos(2.0), np.sin(2.0), 0])
    with pytest.raises(GeodesicDomainError) as info:
        geodesic_point(a, b, -0.6)
    assert info.value.t == pytest.approx(-0.6)


def test_manifold_json_round_trip():
    for kind in ALL_KINDS:
        assert manifold_from_json(kind.to_json()) == kind
    with pytest.raises(ValidationError):
        manifold_from_json({"kind": "torus"})


# -- external oracles --------------------------------------------------------


def test_so3_matches_scipy_slerp(rng):
    kind = Rotations3D()
    for _ in range(20):
        a, b = random_loop(kind, 2, rng, radius=1.0)
        t = rng.uniform(0, 1)
        ours = kind.geodesic(a, b, t)
        key = Rotation.from_quat(np.stack([a, b])[:, [1, 2, 3, 0]])
        ref = Slerp([0, 1], key)([t]).as_quat()[0][[3, 0, 1, 2]]
        assert min(np.linalg.norm(ours - ref), np.linalg.norm(ours + ref)) < 1e-12
        angle = (key[0].inv() * key[1]).magnitude()
        assert kind.dist(a, b) == pytest.approx(angle, abs=1e-12)


def test_spd_matches_scipy_closed_form(rng):
    kind = SPD(3)
    for _ in range(10):
        a, b = random_point(kind, rng, (2,))
        t = rng.uniform(-0.5, 1.5)
        ra = np.real(sqrtm(a))
        ia = np.linalg.inv(ra)
        ref = ra @ np.real(fractional_matrix_power(ia @ b @ ia, t)) @ ra
        np.testing.assert_allclose(kind.geodesic(a, b, t), ref, atol=1e-10)
        dist = np.linalg.norm(np.real(logm(ia @ b @ ia)))
        assert kind.dist(a, b) == pytest.approx(dist, rel=1e-10)


# -- properties --------------------------------------------------------------

T_VALUES = [-0.3, 0.0, 0.25, 0.5, 1.0, 1.21]


@pytest.mark.parametrize("kind", ALL_KINDS, ids=KIND_IDS)
@given(seed=seeds)
def test_metric_axioms(kind, seed):
    rng = np.random.default_rng(seed)
    a, b, c = random_loop(kind, 3, rng, radius=0.8)
    dab, dba = kind.dist(a, b), kind.dist(b, a)
    assert dab == pytest.approx(dba, abs=1e-12)
    assert kind.dist(a, a) == pytest.approx(0.0, abs=1e-7)
    assert kind.dist(a, c) <= dab + kind.dist(b, c) + 1e-9


@pytest.mark.parametrize("kind", ALL_KINDS, ids=KIND_IDS)
@given(seed=seeds)
def test_metric_property(kind, seed):
    rng = np.random.default_rng(seed)
    a, b = random_loop(kind, 2, rng, radius=0.6)
    d = kind.dist(a, b)
    for t in T_VALUES:
        m = kind.geodesic(a, b, t)
        assert kind.dist(m, b) == pytest.approx(abs(1 - t) * d, rel=1e-9, abs=1e-9)
        assert kind.dist(a, m) == pytest.approx(abs(t) * d, rel=1e-9, abs=1e-9)


@pytest.mark.parametrize("kind", ALL_KINDS, ids=KIND_IDS)
@given(seed=seeds, t=st.floats(-1.0, 2.0))
def test_reversal_consistency(kind, seed, t):
    rng = np.random.default_rng(seed)
    a, b = random_loop(kind, 2, rng, radius=0.5)
    # extrapolation must stay short of the cut locus
    assume(max(abs(t), abs(1 - t)) * kind.dist(a, b) < 3.0)
    assert kind.dist(kind.geodesic(a, b, t), kind.geodesic(b, a, 1 - t)) < 1e-9


@pytest.mark.parametrize("kind", ALL_KINDS, ids=KIND_IDS)
@given(seed=seeds, u=st.floats(0, 1), v=st.floats(0, 1), s=st.floats(0, 1))
def test_geodesic_composition(kind, seed, u, v, s):
    rng = np.random.default_rng(seed)
    a, b = random_loop(kind, 2, rng, radius=0.6)
    lhs = kind.geodesic(kind.geodesic(a, b, u), kind.geodesic(a, b, v), s)
    rhs = kind.geodesic(a, b, (1 - s) * u + s * v)
    assert kind.dist(lhs, rhs) < 1e-9


@given(seed=seeds)
def test_spd_congruence_invariance(seed):
    rng = np.random.default_rng(seed)
    kind = SPD(3)
    a, b = random_point(kind, rng, (2,))
    g = rng.normal(size=(3, 3)) + 2 * np.eye(3)
    if abs(np.linalg.det(g)) < 0.1:
        return
    d0 = kind.dist(a, b)
    d1 = kind.dist(g.T @ a @ g, g.T @ b @ g)
    assert d1 == pytest.approx(d0, rel=1e-8, abs=1e-8)


@pytest.mark.parametrize("kind", CURVED, ids=[k.tag for k in CURVED])
def test_batched_matches_pointwise(kind, rng):
    pts = random_loop(kind, 4, rng, radius=0.5, batch=(3,))
    t = rng.uniform(0, 1, size=(4, 3))
    out = kind.geodesic(pts[:-1], pts[1:], t[:-1])
    for i in range(3):
        for j in range(3):
            ref = kind.geodesic(pts[i, j], pts[i + 1, j], t[i, j])
            assert kind.dist(out[i, j], ref) < 1e-12
