"""Closed-form geometry of the generalized Berger sphere.

S^3 = SU(2) with left-invariant fields X_1, X_2, X_3, [X_i, X_{i+1}] = 2 X_{i+2},
carries the metric making Xbar_i = X_i / lambda_i orthonormal. Everything here is
expressed in that frame and its dual coframe thetabar.

Conventions:

* omega[i][j] = omega_i^j with nabla Xbar_i = omega_i^p Xbar_p.
* Omega = d omega - omega ^ omega, so R(X, Y) Xbar_i = Omega_i^q(X, Y) Xbar_q.
  The round unit sphere then has Omega_i^j = -thetabar^i ^ thetabar^j.
* Along the Ricci flow the frame is frozen at the initial parameters. Passing
  ``frame=`` to :func:`connection_form` or :func:`curvature_form` writes the
  Levi-Civita data of ``params`` against the frame of ``frame``.

The time derivative of the connection in the frozen frame is
``omega_dot_i^j = 2 eps_ijk (lambda_i^2 (R_jj - R_ii) + lambda_k^2 (R_kk - R_jj)) / (l1 l2 l3) thetabar^k``.
It is what differentiating :func:`connection_form` along the flow gives and it
vanishes on round spheres. :func:`omega_dot_as_printed` keeps the alternative
closed form with a common (R_11 + R_22 + R_33) factor for comparison only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from . import chern_simons
from .exterior_algebra import Form, FrameStructure, MatrixForm

PARAM_RANGE = (1e-3, 1e3)

#: 2 P_1(omega_dot ^ Omega) divided by :func:`tp1_dot_coefficient`; checked by the test suite.
PIPELINE_TO_DISPLAYED = 4.0


@dataclass(frozen=True)
class BergerParams:
    """Scalings (l1, l2, l3) making (X_1/l1, X_2/l2, X_3/l3) orthonormal."""

    l1: float
    l2: float
    l3: float

    def __post_init__(self):
        for name in ("l1", "l2", "l3"):
            v = float(getattr(self, name))
            if not math.isfinite(v) or v <= 0:
                raise ValueError(f"{name} must be a positive finite number, got {v}")
            object.__setattr__(self, name, v)

    @classmethod
    def of(cls, values) -> "BergerParams":
        if isinstance(values, BergerParams):
            return values
        l1, l2, l3 = values
        return cls(l1, l2, l3)

    @classmethod
    def parse(cls, text: str) -> "BergerParams":
        parts = [p for p in text.replace(" ", "").split(",") if p]
        if len(parts) != 3:
            raise ValueError(f"expected three comma-separated values, got {text!r}")
        return cls(*map(float, parts))

    def check_range(self) -> "BergerParams":
        lo, hi = PARAM_RANGE
        for name, v in zip(("lambda1", "lambda2", "lambda3"), self):
            if not lo < v < hi:
                raise ValueError(f"{name}={v} outside the supported range ({lo:g}, {hi:g})")
        return self

    def __iter__(self) -> Iterator[float]:
        return iter((self.l1, self.l2, self.l3))

    def as_array(self) -> np.ndarray:
        return np.array([self.l1, self.l2, self.l3])

    def permuted(self, perm) -> "BergerParams":
        a = self.as_array()
        return BergerParams.of(a[list(perm)])


def levi_civita(i: int, j: int, k: int) -> int:
    return (i - j) * (j - k) * (k - i) // 2


def _third(i: int, j: int) -> int:
    return 3 - i - j


def structure(params) -> FrameStructure:
    """[Xbar_i, Xbar_j] = 2 eps_ijk l_k / (l_i l_j) Xbar_k."""
    lam = BergerParams.of(params).as_array()
    c = np.zeros((3, 3, 3))
    for i in range(3):
        for j in range(3):
            if i != j:
                k = _third(i, j)
                c[k, i, j] = 2.0 * levi_civita(i, j, k) * lam[k] / (lam[i] * lam[j])
    return FrameStructure(c)


def connection_coeffs(params) -> np.ndarray:
    """G[i, j, k] = <nabla_{Xbar_i} Xbar_j, Xbar_k>."""
    lam = BergerParams.of(params).as_array()
    vol = lam.prod()
    g = np.zeros((3, 3, 3))
    for i in range(3):
        for j in range(3):
            if i != j:
                k = _third(i, j)
                g[i, j, k] = levi_civita(i, j, k) * (-lam[i] ** 2 + lam[j] ** 2 + lam[k] ** 2) / vol
    return g


def _frame_ratio(params, frame) -> tuple[np.ndarray, np.ndarray]:
    lam = BergerParams.of(params).as_array()
    mu = np.ones(3) if frame is None else lam / BergerParams.of(frame).as_array()
    return lam, mu


def connection_form(params, frame=None) -> MatrixForm:
    """omega_i^j = eps_ijk (l_i^2 + l_j^2 - l_k^2) / (l1 l2 l3) thetabar^k.

    With ``frame`` the coefficients pick up mu_i mu_k / mu_j, mu = params/frame.
    """
    lam, mu = _frame_ratio(params, frame)
    vol = lam.prod()
    rows = [[Form.zero(1) for _ in range(3)] for _ in range(3)]
    for i in range(3):
        for j in range(3):
            if i != j:
                k = _third(i, j)
                c = levi_civita(i, j, k) * (lam[i] ** 2 + lam[j] ** 2 - lam[k] ** 2) / vol
                rows[i][j] = Form.basis(k, coeff=c * mu[i] * mu[k] / mu[j])
    return MatrixForm(rows, skew=frame is None)


def curvature_numerator(params, i: int, j: int) -> float:
    """3 l_k^4 - l_i^4 - l_j^4 + 2 l_i^2 l_j^2 - 2 l_i^2 l_k^2 - 2 l_j^2 l_k^2."""
    lam = BergerParams.of(params).as_array()
    k = _third(i, j)
    a, b, c = lam[i] ** 2, lam[j] ** 2, lam[k] ** 2
    return 3 * c * c - a * a - b * b + 2 * a * b - 2 * a * c - 2 * b * c


def curvature_form(params, frame=None) -> MatrixForm:
    """Omega_i^j = mu_i^2 N_ij / (l1 l2 l3)^2 thetabar^i ^ thetabar^j, N from :func:`curvature_numerator`."""
    lam, mu = _frame_ratio(params, frame)
    vol2 = lam.prod() ** 2
    rows = [[Form.zero(2) for _ in range(3)] for _ in range(3)]
    for i in range(3):
        for j in range(3):
            if i != j:
                rows[i][j] = Form.basis(i, j, coeff=mu[i] ** 2 * curvature_numerator(lam, i, j) / vol2)
    return MatrixForm(rows, skew=frame is None)


def sectional_curvature(params, i: int, j: int) -> float:
    """K(Xbar_i, Xbar_j); equals 1 on the round unit sphere."""
    lam = BergerParams.of(params).as_array()
    return -curvature_numerator(lam, i, j) / lam.prod() ** 2


def ricci(params) -> np.ndarray:
    """(R_11, R_22, R_33) in the orthonormal frame; the off-diagonal part vanishes."""
    lam = BergerParams.of(params).as_array()
    sq = lam**2
    out = np.empty(3)
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        out[i] = 2.0 * (sq[i] ** 2 - sq[j] ** 2 - sq[k] ** 2 + 2 * sq[j] * sq[k]) / sq.prod()
    return out


def scalar_curvature(params) -> float:
    return float(ricci(params).sum())


def volume(params) -> float:
    """Riemannian volume 2 pi^2 l1 l2 l3 (the round unit S^3 has volume 2 pi^2)."""
    return 2.0 * math.pi**2 * float(BergerParams.of(params).as_array().prod())


def omega_dot(params) -> MatrixForm:
    """Time-0 derivative of the frozen-frame connection under d g / dt = -2 Ric."""
    lam = BergerParams.of(params).as_array()
    r = ricci(lam)
    vol = lam.prod()
    rows = [[Form.zero(1) for _ in range(3)] for _ in range(3)]
    for i in range(3):
        for j in range(3):
            if i != j:
                k = _third(i, j)
                c = 2.0 * levi_civita(i, j, k) * (lam[i] ** 2 * (r[j] - r[i]) + lam[k] ** 2 * (r[k] - r[j])) / vol
                rows[i][j] = Form.basis(k, coeff=c)
    return MatrixForm(rows)


def omega_dot_as_printed(params) -> MatrixForm:
    """-2 eps_kij (-l_k^2 + l_i^2 + l_j^2)/(l_k l_i l_j) (R_11 + R_22 + R_33) thetabar^k.

    Kept for comparison; it disagrees with the derivative of the connection
    (it is nonzero on round spheres, where the frozen-frame connection is constant).
    """
    s = scalar_curvature(params)
    return connection_form(params) * (-2.0 * s)


def cs_density(params) -> float:
    """thetabar^123 coefficient of TP_1(omega) in the orthonormal coframe of ``params``."""
    return chern_simons.cs_invariant_density(connection_form(params), curvature_form(params))


def cs_dot_density(params) -> float:
    """thetabar^123 coefficient of 2 P_1(omega_dot ^ Omega) at time 0."""
    form = chern_simons.tp_dot_integrand(omega_dot(params), curvature_form(params))
    return float(form.top())


def tp1_dot_coefficient(params) -> float:
    """16/(pi^2 l1^5 l2^5 l3^5) (sum l_p^10 - sum_{p!=q} l_p^8 l_q^2 + sum_p l_p^6 l_{p+1}^2 l_{p+2}^2).

    Proportional to :func:`cs_dot_density` with ratio :data:`PIPELINE_TO_DISPLAYED`.
    """
    lam = BergerParams.of(params).as_array()
    # The numerator is homogeneous of degree 10, so evaluate it as l3^10 F(l1/l3, l2/l3);
    # on round spheres this is exactly F(1, 1) = 0 instead of a cancellation of l^20 terms.
    alpha, beta = normalized_pair(lam)
    return 16.0 * (lam[2] ** 10 * big_F(alpha, beta)) / (math.pi**2 * lam.prod() ** 5)


def tp1_dot_numerator(params) -> float:
    """The degree-10 numerator summed term by term."""
    lam = BergerParams.of(params).as_array()
    s = lam**2
    total = float(np.sum(s**5))
    total -= sum(s[p] ** 4 * s[q] for p in range(3) for q in range(3) if p != q)
    total += sum(s[p] ** 3 * s[(p + 1) % 3] * s[(p + 2) % 3] for p in range(3))
    return total


def berger_dot_as_printed(lam: float) -> float:
    """-(2/pi^2) lam (lam^2 - 1)^2, the classical Berger (lam, 1, 1) coefficient as printed."""
    return -2.0 / math.pi**2 * lam * (lam * lam - 1.0) ** 2


def normalized_pair(params) -> tuple[float, float]:
    """(alpha, beta) = (l1/l3, l2/l3)."""
    l1, l2, l3 = BergerParams.of(params)
    return l1 / l3, l2 / l3


def big_F(alpha: float, beta: float) -> float:
    """Numerator of :func:`tp1_dot_coefficient` at (alpha, beta, 1)."""
    a, b = alpha * alpha, beta * beta
    return (a**5 + b**5 - a**4 * b - b**4 * a - a**4 - b**4
            + a**3 * b + b**3 * a + a * b - a - b + 1.0)


def big_F_factored(alpha: float, beta: float, variant: int = 1) -> float:
    """The two factorizations of :func:`big_F`; ``variant`` selects which."""
    a, b = alpha * alpha, beta * beta
    if variant == 1:
        inner = (a - 1.0) * (a * a + a * b + b * b) + b**3
    elif variant == 2:
        inner = (b - 1.0) * (b * b + b * a + a * a) + a**3
    else:
        raise ValueError(f"variant must be 1 or 2, got {variant!r}")
    return (a - b) ** 2 * inner + (a - 1.0) * (b - 1.0)
