"""Independent numeric routes used to cross-check the closed forms.

None of these functions call the closed-form code they are meant to check.
"""

from __future__ import annotations

import numpy as np

from .exterior_algebra import BASES, Form, FrameStructure, MatrixForm, matrix_wedge


def koszul_connection(frame: FrameStructure) -> np.ndarray:
    """<nabla_{X_i} X_j, X_k> for an orthonormal left-invariant frame.

    2<nabla_X Y, Z> = <[X,Y],Z> - <[Y,Z],X> + <[Z,X],Y> when all inner
    products are constant.
    """
    c = frame.constants
    g = np.zeros((3, 3, 3))
    for i in range(3):
        for j in range(3):
            for k in range(3):
                g[i, j, k] = 0.5 * (c[k, i, j] - c[i, j, k] + c[j, k, i])
    return g


def connection_form_from_coeffs(g: np.ndarray) -> MatrixForm:
    """omega_i^j(X_k) = <nabla_{X_k} X_i, X_j>."""
    return MatrixForm([[Form(1, {(k,): g[k, i, j] for k in range(3)}) for j in range(3)] for i in range(3)])


def riemann_from_connection(g: np.ndarray, frame: FrameStructure) -> np.ndarray:
    """r[a, b, i, q] = <R(X_a, X_b) X_i, X_q> with R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y]."""
    c = frame.constants
    r = np.einsum("bip,apq->abiq", g, g) - np.einsum("aip,bpq->abiq", g, g)
    r -= np.einsum("mab,miq->abiq", c, g)
    return r


def ricci_contraction(r: np.ndarray) -> np.ndarray:
    """Ric(X_i, X_i) = sum_p <R(X_p, X_i) X_i, X_p>."""
    return np.array([sum(r[p, i, i, p] for p in range(3)) for i in range(3)])


def gauss_legendre_tp(omega: MatrixForm, curvature: MatrixForm, nodes: int = 16) -> float:
    """2 int_0^1 P_1(omega ^ phi_t) dt by Gauss-Legendre quadrature; top coefficient.

    phi_t is rebuilt here as the curvature of the connection t*omega in
    row-input layout, t Omega - (t^2 - t) omega ^ omega.
    """
    from .chern_simons import p1_eval

    x, w = np.polynomial.legendre.leggauss(nodes)
    t = 0.5 * (x + 1.0)
    w = 0.5 * w
    ww = matrix_wedge(omega, omega)
    total = 0.0
    for ti, wi in zip(t, w):
        phi = curvature * float(ti) - ww * float(ti * ti - ti)
        total += wi * float(p1_eval(omega, phi).top())
    return 2.0 * total


def random_skew_matrix_form(rng: np.random.Generator, degree: int, scale: float = 1.0) -> MatrixForm:
    """A random skew-symmetric matrix of constant-coefficient forms."""
    nb = len(BASES[degree])
    a = rng.normal(scale=scale, size=(3, 3, nb))
    a = a - np.swapaxes(a, 0, 1)
    return MatrixForm.from_array(a, degree, skew=True)


def random_matrix_form(rng: np.random.Generator, degree: int, scale: float = 1.0) -> MatrixForm:
    return MatrixForm.from_array(rng.normal(scale=scale, size=(3, 3, len(BASES[degree]))), degree)


def christoffel_from_values(g: np.ndarray, dg: np.ndarray) -> np.ndarray:
    """Gamma^k_ij for a general metric; ``g[a, b, ...]`` and ``dg[l, a, b, ...] = d_l g_ab``."""
    g_t = np.moveaxis(g, (0, 1), (-2, -1))
    ginv = np.moveaxis(np.linalg.inv(g_t), (-2, -1), (0, 1))
    lower = 0.5 * (dg + np.swapaxes(dg, 0, 1) - np.moveaxis(dg, 0, 2))  # [i, j, l]: d_i g_jl + d_j g_il - d_l g_ij
    return np.einsum("kl...,ijl...->kij...", ginv, lower)


def central_gradient(fn, point: np.ndarray, step: float = 1e-5) -> np.ndarray:
    """Richardson-extrapolated central differences of ``fn`` along each coordinate.

    Returns an array of shape ``(3,) + fn(point).shape``.
    """
    point = np.asarray(point, dtype=float)

    def diff(h: float, axis: int):
        e = np.zeros_like(point)
        e[axis] = h
        return (np.asarray(fn(point + e)) - np.asarray(fn(point - e))) / (2 * h)

    return np.stack([(4 * diff(step / 2, a) - diff(step, a)) / 3 for a in range(3)])
