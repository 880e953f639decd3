import math

import numpy as np
import pytest

from csflow import oracles, warped
from csflow.exterior_algebra import ScalarField, trace
from csflow.jets import Jet
from csflow.warped import (
    BUILTIN_WARPS,
    CURVATURE_PATTERN,
    OMEGA_DOT_PATTERN,
    OMEGA_DOT_PATTERN_AS_PRINTED,
    WarpedSpec,
    grid_scan,
    parse_warp,
    pattern_violation,
)

SPECS = [WarpedSpec.from_warp(n, w) for n, ws in BUILTIN_WARPS.items() for w in ws]
IDS = [f"n{s.n}:{s.label}" for s in SPECS]


def points(spec, count=30, seed=0, margin=0.2):
    rng = np.random.default_rng(seed)
    p = rng.uniform(0.0, 2 * math.pi, size=(3, count))
    for ax in spec.polar_axes:
        p[ax] = rng.uniform(margin, math.pi - margin, size=count)
    return p


def round_s3(n):
    """The unit three-sphere written as a warped product over its first n coordinates."""
    if n == 1:
        return WarpedSpec(1, ScalarField.evaluable(lambda q: Jet.variable(0, q[0]).sin() ** 2), "round")
    return WarpedSpec(2, ScalarField.evaluable(
        lambda q: (Jet.variable(0, q[0]).sin() * Jet.variable(1, q[1]).sin()) ** 2), "round")


def round_points(spec, count=30, seed=1):
    rng = np.random.default_rng(seed)
    p = rng.uniform(0.3, math.pi - 0.3, size=(3, count))
    p[2] = rng.uniform(0, 2 * math.pi, size=count)
    return p


# -- warps and specs ------------------------------------------------------------------

def test_parse_warp():
    w = parse_warp("3+0.4cos(2*theta1)-0.2sin(theta2)")
    assert w.a == 3.0
    assert [(t.coeff, t.kind, t.axis, t.freq) for t in w.terms] == [(0.4, "cos", 0, 2.0), (-0.2, "sin", 1, 1.0)]
    assert parse_warp("2+sin").terms[0].coeff == 1.0
    with pytest.raises(ValueError):
        parse_warp("2+tan")
    with pytest.raises(ValueError):
        parse_warp("")


def test_warp_validation():
    with pytest.raises(ValueError, match="not positive"):
        WarpedSpec.from_warp(1, "1+2sin")
    with pytest.raises(ValueError, match="base coordinate"):
        WarpedSpec.from_warp(1, "2+sin(theta2)")
    with pytest.raises(ValueError):
        WarpedSpec(3, ScalarField.constant(1.0))
    assert WarpedSpec.from_warp(2, "2+0.5cos").m == 1


def test_warp_jet_values():
    w = parse_warp("2+0.5sin+0.4cos(3*theta1)")
    j = w.jet(np.array([0.7, 0.0, 0.0]))
    assert j.value == pytest.approx(2 + 0.5 * math.sin(0.7) + 0.4 * math.cos(2.1))
    assert j.derivative((3, 0, 0)) == pytest.approx(-0.5 * math.cos(0.7) + 0.4 * 27 * math.sin(2.1))


def test_domain_checks():
    spec = WarpedSpec.from_warp(1, "2+sin")
    with pytest.raises(ValueError, match="theta2"):
        warped.metric(spec, np.array([1.0, 0.005, 1.0]))
    with pytest.raises(ValueError, match="theta1"):
        warped.metric(WarpedSpec.from_warp(2, "2+0.5cos"), np.array([math.pi - 0.001, 1.0, 1.0]))
    with pytest.raises(ValueError):
        warped.grid(spec, 3)
    g = warped.grid(spec, 4)
    assert g.shape == (3, 64)
    assert g[1].min() > warped.DELTA and g[1].max() < math.pi - warped.DELTA


# -- metric and Christoffel symbols --------------------------------------------------------

def test_metric_examples():
    p = np.array([0.3, 1.1, 2.0])
    g = warped.metric_values(WarpedSpec.from_warp(1, "1"), p)
    np.testing.assert_allclose(np.diag(g), [1, 1, math.sin(1.1) ** 2])
    spec2 = WarpedSpec.from_warp(2, "2+0.5cos")
    g2 = warped.metric_values(spec2, np.array([math.pi / 2, 0.4, 1.0]))
    np.testing.assert_allclose(np.diag(g2), [1, 1, 2 + 0.5 * math.cos(math.pi / 2)], atol=1e-15)
    g3 = warped.metric_values(WarpedSpec.from_warp(1, "2+sin"), np.array([math.pi / 2, 1.0, 0.0]))
    assert g3[1, 1] == pytest.approx(3.0)
    assert g3[2, 2] == pytest.approx(3.0 * math.sin(1.0) ** 2)


def test_metric_jets_are_order_three():
    spec = WarpedSpec.from_warp(2, "2+0.5cos")
    assert all(j.order == 3 for j in warped.metric(spec, points(spec)))


def test_round_sphere_christoffel():
    spec = WarpedSpec.from_warp(2, "1")
    p = points(spec)
    gamma = warped.christoffel_values(spec, p)
    np.testing.assert_allclose(gamma[1, 0, 1], 1 / np.tan(p[0]), rtol=1e-14)


@pytest.mark.parametrize("spec", SPECS, ids=IDS)
def test_christoffel_symmetric_and_matches_finite_differences(spec):
    p = points(spec)
    gamma = warped.christoffel_values(spec, p)
    np.testing.assert_array_equal(gamma, np.swapaxes(gamma, 1, 2))
    g = warped.metric_values(spec, p)
    dg = oracles.central_gradient(lambda q: warped.metric_values(spec, q), p)
    want = oracles.christoffel_from_values(g, dg)
    assert np.max(np.abs(gamma - want) / np.maximum(1, np.abs(want))) < 1e-8


@pytest.mark.parametrize("n", [1, 2])
def test_constant_warp_decouples(n):
    spec = WarpedSpec.from_warp(n, "3")
    gamma = warped.christoffel_values(spec, points(spec))
    base, fiber = (range(n), range(n, 3))
    for b in base:
        for f in fiber:
            for f2 in fiber:
                assert not gamma[f, b, f2].any()
                assert not gamma[b, f, f2].any()


def test_user_jet_matches_builtin():
    def derivs(q):
        c, s = np.cos(q[0]), np.sin(q[0])
        z = np.zeros_like(c)
        grad = np.array([-0.5 * s, z, z])
        hess = np.zeros((3, 3) + c.shape)
        hess[0, 0] = -0.5 * c
        third = np.zeros((3, 3, 3) + c.shape)
        third[0, 0, 0] = 0.5 * s
        return 2 + 0.5 * c, grad, hess, third

    custom = WarpedSpec(2, ScalarField.from_derivatives(derivs))
    builtin = WarpedSpec.from_warp(2, "2+0.5cos")
    p = points(builtin)
    np.testing.assert_allclose(warped.christoffel_dot(custom, p), warped.christoffel_dot(builtin, p), atol=1e-12)


# -- curvature -----------------------------------------------------------------------

@pytest.mark.parametrize("spec", SPECS, ids=IDS)
def test_first_bianchi(spec):
    r = warped.riemann_values(spec, points(spec))
    cyc = r + np.transpose(r, (1, 2, 0, 3, 4)) + np.transpose(r, (2, 0, 1, 3, 4))
    assert np.max(np.abs(cyc)) < 1e-9


@pytest.mark.parametrize("spec", SPECS, ids=IDS)
def test_curvature_pattern_and_trace(spec):
    curv = warped.curvature_form(spec, points(spec))
    assert pattern_violation(curv, CURVATURE_PATTERN[spec.n]) < 1e-12
    assert np.max(np.abs(trace(curv).values())) < 1e-14


@pytest.mark.parametrize("warp", BUILTIN_WARPS[2])
def test_n2_base_curvature_independent_of_warp(warp):
    spec = WarpedSpec.from_warp(2, warp)
    p = points(spec)
    curv = warped.curvature_form(spec, p)
    np.testing.assert_allclose(curv[0, 1][(0, 1)], -1.0, atol=1e-12)
    np.testing.assert_allclose(curv[1, 0][(0, 1)], np.sin(p[0]) ** 2, atol=1e-12)


def test_product_metric_curvature():
    spec = WarpedSpec.from_warp(2, "1")
    arr = warped.curvature_form(spec, points(spec)).to_array()
    assert np.max(np.abs(arr[2])) < 1e-14 and np.max(np.abs(arr[:, 2])) < 1e-14


@pytest.mark.parametrize("n", [1, 2])
def test_round_sphere_in_warped_coordinates(n):
    spec = round_s3(n)
    p = round_points(spec)
    np.testing.assert_allclose(warped.ricci_values(spec, p), 2 * warped.metric_values(spec, p), atol=1e-12)
    assert np.max(np.abs(warped.christoffel_dot(spec, p))) < 1e-10
    r1, r2 = warped.exactness_residuals(spec, p)
    assert np.max(np.abs(r1)) < 1e-12 and np.max(np.abs(r2)) < 1e-12


# -- variation -------------------------------------------------------------------------

@pytest.mark.parametrize("spec", SPECS, ids=IDS)
def test_christoffel_dot_matches_euler_step(spec):
    p = points(spec)
    h = 1e-6
    g = warped.metric_values(spec, p)
    dg = oracles.central_gradient(lambda q: warped.metric_values(spec, q), p)
    ric = warped.ricci_values(spec, p)
    dric = oracles.central_gradient(lambda q: warped.ricci_values(spec, q), p)
    fd = (oracles.christoffel_from_values(g - 2 * h * ric, dg - 2 * h * dric) - oracles.christoffel_from_values(g, dg)) / h
    got = warped.christoffel_dot(spec, p)
    # the absolute floor covers the Einstein case where Gamma_dot vanishes
    assert np.max(np.abs(fd - got)) <= 1e-4 * np.max(np.abs(got)) + 1e-8


def test_alternative_variation_formula_differs():
    spec = WarpedSpec.from_warp(1, "2+sin")
    p = points(spec)
    alt = warped.christoffel_dot_as_printed(spec, p)
    assert not np.allclose(alt, warped.christoffel_dot(spec, p))
    # the variation of a torsion-free connection is symmetric in its lower indices; the alternative is not
    assert np.max(np.abs(alt - np.swapaxes(alt, 1, 2))) > 1e-3


def test_product_omega_dot_vanishes():
    # S^1 x S^2 is a product of Einstein factors, so Ric is parallel and omega_dot = 0
    spec = WarpedSpec.from_warp(1, "1")
    assert np.max(np.abs(warped.omega_dot(spec, points(spec)).to_array())) < 1e-12


@pytest.mark.parametrize("spec", SPECS, ids=IDS)
def test_omega_dot_pattern(spec):
    p = points(spec)
    od = warped.omega_dot(spec, p)
    assert pattern_violation(od, OMEGA_DOT_PATTERN[spec.n]) < 1e-12
    arr = od.to_array()
    if spec.n == 1:
        assert np.max(np.abs(arr[1, 2])) < 1e-12 and np.max(np.abs(arr[2, 1])) < 1e-12


def test_omega_dot_n1_third_row_supports():
    spec = WarpedSpec.from_warp(1, "2+sin")
    od = warped.omega_dot(spec, points(spec)).to_array()
    # (3,1) carries d theta^3, not d theta^1
    assert np.max(np.abs(od[2, 0, 2])) > 1e-3
    assert pattern_violation(warped.omega_dot(spec, points(spec)), OMEGA_DOT_PATTERN_AS_PRINTED[1]) > 1e-3


def test_exactness_examples():
    for n, warp in ((1, "2+sin"), (2, "2+0.5cos"), (1, "1"), (2, "1")):
        spec = WarpedSpec.from_warp(n, warp)
        r1, r2 = warped.exactness_residuals(spec, points(spec, 100))
        assert np.max(np.abs(r1)) < 1e-8 and np.max(np.abs(r2)) < 1e-8


# -- grid scans ---------------------------------------------------------------------------

@pytest.mark.parametrize("spec", SPECS, ids=IDS)
def test_grid_scan(spec):
    res = grid_scan(spec, 16)
    assert res.points == 16**3
    assert res.exact(1e-8)
    assert res.patterns_ok(1e-12)


def test_grid_scan_parallel_matches_serial():
    spec = WarpedSpec.from_warp(1, "2+0.9sin")
    a = grid_scan(spec, 12, jobs=1, chunk=256)
    b = grid_scan(spec, 12, jobs=4, chunk=256)
    assert a == b


def test_unweighted_omega_dot_roundoff_grows_toward_poles():
    spec = WarpedSpec.from_warp(1, "2+0.5sin+0.4cos(3*theta1)")
    res = grid_scan(spec, 16)
    assert res.omega_dot_pattern_raw >= res.omega_dot_pattern
    assert res.omega_dot_pattern_raw < 1e-9
