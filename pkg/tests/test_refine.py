"""Averaging rounds, global and local refinement, and the linear oracle."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import CURVED, CURVED_IDS, random_admissible_factorization, seeds
from georefine.analysis import contractivity, displacement_arrays
from georefine.errors import GeodesicDomainError, RefinementError, ValidationError
from georefine.geometry import OPEN, PERIODIC, SPD, Euclidean, Polyline, Sphere, mesh_size, mesh_sizes
from georefine.pyramid import optimal_params
from georefine.refine import (
    elementary_double,
    global_refine_step,
    linear_refine,
    linear_round,
    local_refine_step,
    make_plan,
    plan_from_mask,
    quadratic_round,
    step_arrays,
    subdivide,
)
from georefine.samples import geodesic_samples, random_loop
from georefine.symbol import Mask, SymbolFactorization, bspline_mask, reconstruct

E1 = Euclidean(1)
S2 = Sphere(3)


def line(values, topology=OPEN):
    return Polyline(E1, np.asarray(values, dtype=float)[:, None], topology)


def chaikin(boundary=PERIODIC):
    return make_plan(SymbolFactorization(0, (1.0, 1.0)), boundary)


def test_elementary_double():
    p = line([0.0, 3.0])
    q = elementary_double(p)
    np.testing.assert_array_equal(q.points[:, 0], [0, 0, 3, 3])
    assert mesh_size(q) == mesh_size(p)
    r = elementary_double(line([0, 1, 2], PERIODIC))
    assert len(r) == 6 and r.periodic


def test_linear_round_examples():
    np.testing.assert_allclose(linear_round(line([0, 2]), 1.0).points[:, 0], [1.0])
    np.testing.assert_allclose(linear_round(line([0, 1, 3]), 3.0).points[:, 0], [0.75, 2.5])
    out = linear_round(Polyline(S2, [[1, 0, 0], [0, 1, 0]], OPEN), 1.0)
    np.testing.assert_allclose(out.points[0], [2**-0.5, 2**-0.5, 0], atol=1e-15)


def test_linear_round_periodic_keeps_length():
    out = linear_round(line([0, 1, 3], PERIODIC), 1.0)
    np.testing.assert_allclose(out.points[:, 0], [0.5, 2.0, 1.5])


def test_quadratic_round_examples():
    out = quadratic_round(line([0, 1, 2]), optimal_params(1 + 0.5j))
    np.testing.assert_allclose(out.points[:, 0], [1.0588235294117647], atol=1e-14)
    const = quadratic_round(line([5, 5, 5, 5], PERIODIC), optimal_params(0.3 + 2j))
    np.testing.assert_allclose(const.points[:, 0], 5.0, atol=1e-14)


def test_quadratic_round_collapse_case(rng):
    pts = random_loop(S2, 5, rng, radius=0.5)
    out = quadratic_round(Polyline(S2, pts, OPEN), optimal_params(1j))
    for i in range(3):
        assert S2.dist(out.points[i], S2.geodesic(pts[i + 2], pts[i], 0.5)) < 1e-12


def test_chaikin_square():
    square = Polyline(Euclidean(2), [[0, 0], [1, 0], [1, 1], [0, 1]], PERIODIC)
    out, trace = global_refine_step(square, chaikin())
    ref = linear_refine(square.points, reconstruct(SymbolFactorization(0, (1.0, 1.0))))
    np.testing.assert_allclose(out.points, ref, atol=1e-15)
    # S_2 = a_0 p_1 + a_2 p_0 and S_3 = a_1 p_1 + a_3 p_0
    np.testing.assert_allclose(out.points[2], [0.25, 0.0])
    np.testing.assert_allclose(out.points[3], [0.75, 0.0])
    assert [r["kind"] for r in trace.rounds] == ["double", "linear", "linear"]


def test_linear_refine_examples():
    np.testing.assert_allclose(linear_refine([0.0, 1.0], Mask((0.5, 1.0, 0.5), -1)), [0, 0.5, 1, 0.5])
    out = linear_refine([0.0, 0.0, 1.0, 1.0], Mask((0.25, 0.75, 0.75, 0.25)))
    np.testing.assert_allclose(out, [0.75, 0.25, 0, 0, 0.25, 0.75, 1, 1])


@given(seed=seeds)
def test_linear_refine_doubles_sum(seed):
    rng = np.random.default_rng(seed)
    mask = reconstruct(random_admissible_factorization(rng))
    f = rng.normal(size=int(rng.integers(3, 12)))
    assert linear_refine(f, mask).sum() == pytest.approx(2 * f.sum(), abs=1e-9)


@given(seed=seeds)
def test_euclidean_equivalence(seed):
    rng = np.random.default_rng(seed)
    f = random_admissible_factorization(rng)
    plan = make_plan(f)
    data = rng.normal(size=(int(rng.integers(4, 17)), 2))
    out, _ = global_refine_step(Polyline(Euclidean(2), data, PERIODIC), plan)
    np.testing.assert_allclose(out.points, linear_refine(data, reconstruct(f)), atol=1e-10)


@given(seed=seeds)
def test_open_mode_matches_linear_window(seed):
    rng = np.random.default_rng(seed)
    f = random_admissible_factorization(rng, max_real=4, max_quad=1)
    plan = make_plan(f, OPEN)
    n = f.m + 3
    data = rng.normal(size=(n, 1))
    out, trace = global_refine_step(Polyline(E1, data, OPEN), plan)
    assert len(out) == 2 * n - f.m1 - 2 * f.m2
    # stored index i is the linear value S_{i + offset} of the infinite sequence
    padded = np.zeros((3 * n, 1))
    padded[n : 2 * n] = data
    full = linear_refine(padded, reconstruct(f))
    idx = 2 * n + np.arange(len(out)) + trace.offset
    np.testing.assert_allclose(out.points, full[idx % len(full)], atol=1e-10)


@pytest.mark.parametrize("kind", CURVED, ids=CURVED_IDS)
def test_constant_sequence_is_fixed(kind, rng):
    p = random_loop(kind, 1, rng)[0]
    pts = np.repeat(p[None], 5, axis=0)
    plan = make_plan(SymbolFactorization(1, (1.0, 2.0, -3.0), (0.5 + 0.5j,)))
    out, _ = step_arrays(kind, pts, plan)
    assert np.max(kind.dist(out, p)) < 1e-7


def test_step_on_sphere_geodesic_stays_on_it(rng):
    a = np.array([1.0, 0.0, 0.0])
    b = np.array([0.0, 0.6, 0.8])
    pts = geodesic_samples(S2, a, b, np.linspace(0, 1, 6))
    plan = plan_from_mask(reconstruct(SymbolFactorization(0, (1.0, 0.5, 3.0))), OPEN)
    out, _ = subdivide(Polyline(S2, pts, OPEN), plan, 3)
    normal = np.cross(a, b)
    assert np.max(np.abs(out.points @ normal)) < 1e-9


def test_subdivide_zero_steps_is_identity():
    p = line([0, 1, 4], PERIODIC)
    out, traces = subdivide(p, chaikin(), 0)
    assert out is p and traces == []


def test_chaikin_six_steps_contract(rng):
    square = Polyline(Euclidean(2), [[0, 0], [1, 0], [1, 1], [0, 1]], PERIODIC)
    out, traces = subdivide(square, chaikin(), 6)
    assert len(out) == 4 * 2**6
    assert mesh_size(out) <= 0.5**6 * mesh_size(square) + 1e-12
    assert len(traces) == 6 and all(len(t.rounds) == 3 for t in traces)


def test_spd_pair_stays_on_geodesic():
    kind = SPD(2)
    a, b = np.eye(2), np.array([[2.0, 0.5], [0.5, 1.0]])
    p = Polyline(kind, np.stack([a, b]), OPEN)
    out, _ = subdivide(p, plan_from_mask(bspline_mask(1), OPEN), 3)
    # every output equals M_t(a, b) for the t that matches its distance from a
    d = kind.dist(a, b)
    for x in out.points:
        t = kind.dist(a, x) / d
        assert kind.dist(x, kind.geodesic(a, b, t)) < 1e-9


def test_open_mode_shrinks_until_error():
    plan = plan_from_mask(bspline_mask(9), OPEN)
    with pytest.raises(RefinementError):
        global_refine_step(line([0, 1, 2, 3, 4]), plan)


def test_plan_rejects_weights_outside_window():
    with pytest.raises(ValidationError):
        make_plan(SymbolFactorization(0, (1.0, -0.7)))
    with pytest.raises(ValidationError):
        make_plan(SymbolFactorization(0, (1.0, -1.5)))


def test_plan_boundary_must_match():
    with pytest.raises(ValidationError):
        global_refine_step(line([0, 1, 2]), chaikin(PERIODIC))


def test_domain_error_carries_round_index():
    a = np.array([1.0, 0.0, 0.0])
    b = np.array([np.cos(2.8), np.sin(2.8), 0.0])
    p = Polyline(S2, np.stack([a, b]), PERIODIC)
    # alpha = 0.2 keeps gaps near 2.8, so the t = -1 round overshoots the antipode
    plan = make_plan(SymbolFactorization(0, (0.2, -0.5)))
    with pytest.raises(GeodesicDomainError) as info:
        global_refine_step(p, plan)
    assert info.value.round_index == 2
    assert "round 2" in str(info.value)


def test_trace_json():
    p = line([0, 1, 3], PERIODIC)
    plan = make_plan(SymbolFactorization(1, (1.0,), (0.5 + 1j,)))
    _, trace = global_refine_step(p, plan, keep_snapshots=True)
    obj = trace.to_json()
    assert obj["shift"] == 1
    assert [r["kind"] for r in obj["rounds"]] == ["double", "linear", "quadratic"]
    assert obj["rounds"][2]["alpha"] == {"re": 0.5, "im": 1.0}
    assert len(trace.snapshots) == 3
    assert all(np.isfinite(d) and d >= 0 for d in trace.deltas)


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_local_matches_global_on_sphere(m, rng):
    pts = random_loop(S2, 7, rng, radius=0.5)
    p = Polyline(S2, pts, PERIODIC)
    plan = plan_from_mask(bspline_mask(m))
    g, _ = global_refine_step(p, plan)
    loc = local_refine_step(p, plan)
    assert np.max(S2.dist(g.points, loc.points)) <= 1e-9


@given(seed=seeds)
def test_local_matches_global_mixed_real_factors(seed):
    rng = np.random.default_rng(seed)
    f = random_admissible_factorization(rng, max_quad=0)
    if f.m1 == 0:
        return
    kind = SPD(2)
    p = Polyline(kind, random_loop(kind, 6, rng, radius=0.2), PERIODIC)
    plan = make_plan(f)
    g, _ = global_refine_step(p, plan)
    assert np.max(kind.dist(g.points, local_refine_step(p, plan).points)) <= 1e-9


def test_local_rejects_quadratic_factors():
    plan = make_plan(SymbolFactorization(0, (1.0,), (1 + 1j,)))
    with pytest.raises(ValidationError):
        local_refine_step(line([0, 1, 2], PERIODIC), plan)


@pytest.mark.parametrize("kind", CURVED, ids=CURVED_IDS)
@given(seed=seeds, alphas=st.lists(st.floats(0.1, 5.0), min_size=1, max_size=4))
def test_positive_factors_contract(kind, seed, alphas):
    rng = np.random.default_rng(seed)
    plan = make_plan(SymbolFactorization(0, tuple(alphas)))
    pts = random_loop(kind, 6, rng, radius=0.5)
    out, trace = step_arrays(kind, pts, plan)
    rep = contractivity(plan.factorization)
    d0 = mesh_sizes(kind, pts, PERIODIC)
    assert mesh_sizes(kind, out, PERIODIC) <= rep.mu1 * d0 + 1e-9
    # after the first averaging round the mesh size never grows again
    deltas = trace.deltas[1:]
    assert all(b <= a + 1e-9 for a, b in zip(deltas, deltas[1:]))
    assert np.max(displacement_arrays(kind, pts, out, plan)) <= rep.displacement_K * d0 + 1e-9
