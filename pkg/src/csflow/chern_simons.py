"""First Pontryagin polynomial and the Chern-Simons transgression form.

Connection and curvature matrices use the row-input layout of the rest of the
package: ``omega[i][j]`` is omega_i^j with nabla X_i = omega_i^p X_p. The
gl(3)-valued forms that the invariant polynomial and the Lie bracket act on
are the transposes. Traces do not see the difference, but the bracket does:
in row-input layout [omega, omega] equals -2 omega ^ omega, which is what
makes phi_t the curvature of t*omega.
"""

from __future__ import annotations

import math

import numpy as np

from .exterior_algebra import DegreeError, Form, MatrixForm, lie_bracket_form, matrix_wedge, trace, wedge
from .jets import Jet

P1_NORMALIZATION = 1.0 / (2.0 * math.pi**2)
DEGREE = 2


def p1_eval(a: MatrixForm, b: MatrixForm) -> Form:
    """P_1(A (x) B) = (tr A ^ tr B - tr(A ^ B)) / (2 pi^2)."""
    if a.degree + b.degree > 3:
        raise DegreeError(f"P_1 of degrees {a.degree} and {b.degree} exceeds 3")
    return (wedge(trace(a), trace(b)) - trace(matrix_wedge(a, b))) * P1_NORMALIZATION


def bracket(omega: MatrixForm) -> MatrixForm:
    """[omega, omega] of the gl(3)-valued form, returned in row-input layout."""
    return lie_bracket_form(omega.T).T


def _check(omega: MatrixForm, curvature: MatrixForm) -> None:
    if omega.degree != 1 or curvature.degree != 2:
        raise DegreeError(
            f"expected a 1-form connection and 2-form curvature, got degrees {omega.degree}, {curvature.degree}"
        )


def phi_t(t: float, omega: MatrixForm, curvature: MatrixForm) -> MatrixForm:
    """phi_t = t Omega + (t^2 - t)/2 [omega, omega]."""
    _check(omega, curvature)
    return curvature * float(t) + bracket(omega) * (0.5 * (t * t - t))


def tp_form(omega: MatrixForm, curvature: MatrixForm) -> Form:
    """TP_1(omega) = 2 * int_0^1 P_1(omega ^ phi_t) dt, integrated in closed form.

    P_1 is bilinear and phi_t is quadratic in t, so the integral splits into
    int t dt = 1/2 and int (t^2 - t)/2 dt = -1/12.
    """
    _check(omega, curvature)
    return (p1_eval(omega, curvature) * 0.5 + p1_eval(omega, bracket(omega)) * (-1.0 / 12.0)) * float(DEGREE)


def tp_dot_integrand(omega_dot: MatrixForm, curvature: MatrixForm) -> Form:
    """The non-exact part of d/ds TP_1(omega(s)), namely 2 P_1(omega_dot ^ Omega)."""
    _check(omega_dot, curvature)
    return p1_eval(omega_dot, curvature) * float(DEGREE)


def _constant_top(form: Form) -> float:
    c = form.top()
    if isinstance(c, Jet) or not np.ndim(c) == 0:
        raise ValueError("density needs constant coefficients; it is position-dependent otherwise")
    return float(c)


def cs_invariant_density(omega: MatrixForm, curvature: MatrixForm) -> float:
    """Coefficient of TP_1(omega) against theta^1 ^ theta^2 ^ theta^3."""
    for m in (omega, curvature):
        for row in m.entries:
            for e in row:
                for _, c in e.items():
                    if isinstance(c, Jet) or np.ndim(c) != 0 or not isinstance(c, (int, float, np.floating)):
                        raise ValueError("density needs constant coefficients; it is position-dependent otherwise")
    return _constant_top(tp_form(omega, curvature))
