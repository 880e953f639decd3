import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from csflow import berger, oracles
from csflow.chern_simons import (
    P1_NORMALIZATION,
    bracket,
    cs_invariant_density,
    p1_eval,
    phi_t,
    tp_dot_integrand,
    tp_form,
)
from csflow.exterior_algebra import DegreeError, Form, MatrixForm, ScalarField, curvature_from_connection, matrix_wedge, trace
from csflow.jets import Jet

seeds = st.integers(0, 2**32 - 1)

#: TP_1 density of the round unit sphere against thetabar^123, recorded from the pipeline.
ROUND_DENSITY = -4.0 / math.pi**2


def test_normalization():
    assert P1_NORMALIZATION == pytest.approx(1 / (2 * math.pi**2))


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(0, 3), st.integers(0, 3))
def test_p1_graded_symmetry(seed, p, q):
    if p + q > 3:
        return
    rng = np.random.default_rng(seed)
    a, b = oracles.random_matrix_form(rng, p), oracles.random_matrix_form(rng, q)
    np.testing.assert_allclose(p1_eval(a, b).values(), p1_eval(b, a).values() * (-1) ** (p * q), atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_p1_on_skew_reduces_to_trace_term(seed):
    rng = np.random.default_rng(seed)
    a = oracles.random_skew_matrix_form(rng, 1)
    b = oracles.random_matrix_form(rng, 2)
    expect = -P1_NORMALIZATION * float(trace(matrix_wedge(a, b)).top())
    assert float(p1_eval(a, b).top()) == pytest.approx(expect, abs=1e-14)


def test_p1_zero_and_overflow():
    b = oracles.random_matrix_form(np.random.default_rng(0), 2)
    assert p1_eval(MatrixForm.zero(1), b).support() == set()
    with pytest.raises(DegreeError):
        p1_eval(MatrixForm.zero(2), MatrixForm.zero(2))


def test_p1_round_variation_vanishes():
    lam = (1.0, 1.0, 1.0)
    assert float(p1_eval(berger.omega_dot(lam), berger.curvature_form(lam)).top()) == 0.0
    assert berger.tp1_dot_numerator(lam) == 0.0


# -- phi_t and the bracket convention ------------------------------------------------

def _random_pair(seed=0):
    rng = np.random.default_rng(seed)
    return oracles.random_skew_matrix_form(rng, 1), oracles.random_skew_matrix_form(rng, 2)


def test_phi_t_endpoints():
    omega, curv = _random_pair()
    assert not phi_t(0.0, omega, curv).to_array().any()
    np.testing.assert_array_equal(phi_t(1.0, omega, curv).to_array(), curv.to_array())
    half = curv.to_array() * 0.5 - bracket(omega).to_array() / 8.0
    np.testing.assert_allclose(phi_t(0.5, omega, curv).to_array(), half)


def test_phi_t_is_curvature_of_scaled_connection():
    lam = (1.7, 0.6, 1.2)
    frame = berger.structure(lam)
    omega, curv = berger.connection_form(lam), berger.curvature_form(lam)
    for t in (0.0, 0.3, 0.5, 0.9, 1.0):
        expect = curvature_from_connection(omega * t, frame).to_array()
        np.testing.assert_allclose(phi_t(t, omega, curv).to_array(), expect, atol=1e-12)


def test_bracket_in_row_layout():
    omega, _ = _random_pair(1)
    np.testing.assert_allclose(bracket(omega).to_array(), -2.0 * matrix_wedge(omega, omega).to_array())


def test_phi_t_degree_checks():
    omega, curv = _random_pair()
    with pytest.raises(DegreeError):
        phi_t(0.5, curv, curv)
    with pytest.raises(DegreeError):
        tp_form(omega, omega)
    with pytest.raises(DegreeError):
        tp_dot_integrand(curv, curv)


# -- the transgression form ----------------------------------------------------------

def test_tp_form_of_zero_connection():
    _, curv = _random_pair()
    assert tp_form(MatrixForm.zero(1), curv).support() == set()


def test_tp_form_matches_quadrature():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        omega = oracles.random_skew_matrix_form(rng, 1)
        curv = oracles.random_skew_matrix_form(rng, 2)
        assert float(tp_form(omega, curv).top()) == pytest.approx(oracles.gauss_legendre_tp(omega, curv), abs=1e-12)


def test_round_density_regression():
    lam = (1.0, 1.0, 1.0)
    density = cs_invariant_density(berger.connection_form(lam), berger.curvature_form(lam))
    assert density == pytest.approx(ROUND_DENSITY, abs=1e-15)
    assert tp_form(berger.connection_form(lam), berger.curvature_form(lam)).degree == 3


def test_density_of_zero_connection():
    _, curv = _random_pair()
    assert cs_invariant_density(MatrixForm.zero(1), curv) == 0.0


def test_density_continuous():
    lam = np.array([1.3, 0.8, 1.1])
    d0 = berger.cs_density(lam)
    d1 = berger.cs_density(lam + 1e-6)
    assert abs(d1 - d0) < 1e-4


def test_density_rejects_position_dependent_input():
    rows = [[Form.zero(1) for _ in range(3)] for _ in range(3)]
    rows[0][1] = Form.basis(2, coeff=ScalarField.evaluable(lambda q: Jet.variable(0, q[0])))
    rows[1][0] = Form.basis(2, coeff=ScalarField.evaluable(lambda q: -Jet.variable(0, q[0])))
    omega = MatrixForm(rows)
    with pytest.raises(ValueError):
        cs_invariant_density(omega, MatrixForm.zero(2))


# -- the variation integrand -----------------------------------------------------------

def test_integrand_zero_for_zero_variation():
    _, curv = _random_pair()
    assert tp_dot_integrand(MatrixForm.zero(1), curv).support() == set()


@settings(max_examples=30, deadline=None)
@given(seeds, st.floats(-3, 3), st.floats(-3, 3))
def test_integrand_linear(seed, a, b):
    rng = np.random.default_rng(seed)
    w1, w2 = oracles.random_matrix_form(rng, 1), oracles.random_matrix_form(rng, 1)
    curv = oracles.random_skew_matrix_form(rng, 2)
    lhs = float(tp_dot_integrand(w1 * a + w2 * b, curv).top())
    rhs = a * float(tp_dot_integrand(w1, curv).top()) + b * float(tp_dot_integrand(w2, curv).top())
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_integrand_is_twice_p1():
    omega, curv = _random_pair(7)
    assert float(tp_dot_integrand(omega, curv).top()) == pytest.approx(2 * float(p1_eval(omega, curv).top()))


def test_berger_integrand_proportional_to_classical_profile():
    ratios = [berger.cs_dot_density((x, 1.0, 1.0)) / (x * (x * x - 1) ** 2) for x in (0.7, 1.2, 1.9, 3.0)]
    np.testing.assert_allclose(ratios, 64.0 / math.pi**2, rtol=1e-12)
    assert berger.cs_dot_density((1.0, 1.0, 1.0)) == 0.0
