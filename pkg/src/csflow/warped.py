"""Warped products S^n x_f S^m (n + m = 3) in spherical coordinates.

Coordinates are (theta^1, theta^2, theta^3) with the base sphere first. For
n = 1 the metric is diag(1, f, f sin^2 theta^2) and for n = 2 it is
diag(1, sin^2 theta^1, f), with f a positive function of the base coordinates.

All geometry is computed pointwise from order-3 jets of the metric, for a
whole batch of chart points at once. Indices are zero-based in code.
"""

from __future__ import annotations

import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .exterior_algebra import BASES, Form, FrameStructure, MatrixForm, ScalarField, curvature_from_connection, matrix_wedge, trace, wedge
from .jets import Jet

DELTA = 1e-2
COORDINATE = FrameStructure.coordinate()

# Allowed supports per matrix entry, zero-based basis tuples.
_E1 = {(0,), (1,), (2,)}
CURVATURE_PATTERN = {
    1: {(0, 1): {(0, 1)}, (0, 2): {(0, 2)}, (1, 0): {(0, 1)}, (1, 2): {(1, 2)}, (2, 0): {(0, 2)}, (2, 1): {(1, 2)}},
    2: {(0, 1): {(0, 1)}, (1, 0): {(0, 1)}, (0, 2): {(0, 2), (1, 2)}, (1, 2): {(0, 2), (1, 2)},
        (2, 0): {(0, 2), (1, 2)}, (2, 1): {(0, 2), (1, 2)}},
}
OMEGA_DOT_PATTERN = {
    1: {(0, 0): {(0,)}, (0, 1): {(1,)}, (0, 2): {(2,)}, (1, 0): {(1,)}, (1, 1): {(0,)},
        (2, 0): {(2,)}, (2, 2): {(0,)}},
    2: {(0, 0): {(0,), (1,)}, (0, 1): {(0,), (1,)}, (1, 0): {(0,), (1,)}, (1, 1): {(0,), (1,)},
        (0, 2): {(2,)}, (1, 2): {(2,)}, (2, 0): {(2,)}, (2, 1): {(2,)}, (2, 2): {(0,), (1,)}},
}
#: The n = 1 pattern as originally displayed, with row 3 entries (3,1) and (3,3) carrying
#: d theta^1 and d theta^3 respectively; the computed derivative has them the other way round.
OMEGA_DOT_PATTERN_AS_PRINTED = {
    1: {**OMEGA_DOT_PATTERN[1], (2, 0): {(0,)}, (2, 2): {(2,)}},
    2: OMEGA_DOT_PATTERN[2],
}


# -- warping functions -------------------------------------------------------

@dataclass(frozen=True)
class WarpTerm:
    coeff: float
    kind: str  # "sin" | "cos"
    axis: int = 0
    freq: float = 1.0


@dataclass(frozen=True)
class Warp:
    """f = a + sum_m b_m trig_m(k_m theta^{axis_m}); positive whenever a > sum |b_m|."""

    a: float
    terms: tuple[WarpTerm, ...] = ()
    label: str = ""

    def validate(self, n: int) -> "Warp":
        bound = sum(abs(t.coeff) for t in self.terms)
        if not self.a > bound:
            raise ValueError(f"warp {self.label or self!r} is not positive: need a > sum|b| ({self.a} <= {bound})")
        for t in self.terms:
            if t.axis >= n:
                raise ValueError(f"warp term on theta{t.axis + 1} is not a base coordinate for n={n}")
        return self

    def jet(self, point) -> Jet:
        point = np.asarray(point, dtype=float)
        out = Jet.constant(np.full(point.shape[1:], self.a))
        for t in self.terms:
            arg = Jet.variable(t.axis, point[t.axis]) * t.freq
            out = out + (arg.sin() if t.kind == "sin" else arg.cos()) * t.coeff
        return out

    def field(self) -> ScalarField:
        if not self.terms:
            return ScalarField.constant(self.a)
        return ScalarField.evaluable(self.jet)

    def __str__(self) -> str:
        return self.label or repr(self)


_NUM = r"(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_TERM = re.compile(
    rf"(?P<sign>[+-])?\s*(?:(?P<coef>{_NUM})\s*\*?\s*)?(?P<fn>sin|cos)?"
    rf"(?:\(\s*(?:(?P<freq>{_NUM})\s*\*?\s*)?(?:theta|t)(?P<axis>[123])\s*\))?\s*"
)


def parse_warp(text: str) -> Warp:
    """Parse strings such as ``"2+sin"``, ``"2+0.5cos"`` or ``"3+0.4cos(2*theta1)-0.2sin(theta2)"``.

    A bare ``sin``/``cos`` acts on theta^1 with frequency 1.
    """
    s = text.replace(" ", "")
    if not s:
        raise ValueError("empty warp specification")
    a, terms, pos = 0.0, [], 0
    while pos < len(s):
        m = _TERM.match(s, pos)
        if not m or m.end() == pos or (pos > 0 and not m.group("sign")):
            raise ValueError(f"cannot parse warp {text!r} near {s[pos:]!r}")
        sign = -1.0 if m.group("sign") == "-" else 1.0
        coef = float(m.group("coef")) if m.group("coef") else None
        if m.group("fn"):
            terms.append(WarpTerm(sign * (1.0 if coef is None else coef), m.group("fn"),
                                  int(m.group("axis") or 1) - 1, float(m.group("freq") or 1.0)))
        elif coef is not None and not m.group("axis"):
            a += sign * coef
        else:
            raise ValueError(f"cannot parse warp {text!r} near {s[pos:]!r}")
        pos = m.end()
    return Warp(a, tuple(terms), label=text)


BUILTIN_WARPS = {
    1: ("1", "2+sin", "2+0.9sin", "3+cos(2*theta1)", "2+0.5sin+0.4cos(3*theta1)"),
    2: ("1", "2+0.5cos", "2+0.9cos", "3+sin(theta2)", "2+0.5cos+0.3sin(2*theta2)"),
}


@dataclass(frozen=True)
class WarpedSpec:
    """Base dimension n (fiber dimension 3 - n) and the warping function."""

    n: int
    warp: ScalarField
    label: str = ""
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.n not in (1, 2):
            raise ValueError(f"base dimension must be 1 or 2, got {self.n}")

    @property
    def m(self) -> int:
        return 3 - self.n

    @classmethod
    def from_warp(cls, n: int, warp: "Warp | str") -> "WarpedSpec":
        w = parse_warp(warp) if isinstance(warp, str) else warp
        w.validate(n)
        return cls(n, w.field(), label=str(w))

    @property
    def polar_axes(self) -> tuple[int, ...]:
        return (1,) if self.n == 1 else (0,)


def check_domain(spec: WarpedSpec, point) -> np.ndarray:
    p = np.asarray(point, dtype=float)
    if p.shape[:1] != (3,):
        raise ValueError("chart points have shape (3, ...)")
    for ax in spec.polar_axes:
        if np.any(p[ax] <= DELTA) or np.any(p[ax] >= math.pi - DELTA):
            raise ValueError(f"theta{ax + 1} must lie in ({DELTA}, pi - {DELTA})")
    return p


def grid(spec: WarpedSpec, resolution: int) -> np.ndarray:
    """Cell-centred grid: polar angles in (delta, pi - delta), azimuths in (0, 2 pi)."""
    if resolution < 4:
        raise ValueError("grid resolution must be at least 4")
    centers = (np.arange(resolution) + 0.5) / resolution
    axes = []
    for ax in range(3):
        if ax in spec.polar_axes:
            axes.append(DELTA + (math.pi - 2 * DELTA) * centers)
        else:
            axes.append(2 * math.pi * centers)
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh])


# -- geometry ------------------------------------------------------------------

def _zero(x) -> bool:
    return isinstance(x, (int, float)) and x == 0


def _d(x, axis):
    return 0.0 if _zero(x) else x.diff(axis)


def _sum(terms):
    out = 0.0
    for t in terms:
        if not _zero(t):
            out = t if _zero(out) else out + t
    return out


def _prod(a, b):
    return 0.0 if _zero(a) or _zero(b) else a * b


def metric(spec: WarpedSpec, point) -> list[Jet]:
    """Diagonal entries (g_11, g_22, g_33) as order-3 jets."""
    p = check_domain(spec, point)
    f = spec.warp.jet(p)
    if np.any(f.value <= 0):
        raise ValueError("warping function must be positive")
    one = Jet.constant(np.ones(p.shape[1:]))
    sin2 = lambda ax: Jet.variable(ax, p[ax]).sin() ** 2
    if spec.n == 1:
        return [one, f, f * sin2(1)]
    return [one, sin2(0), f]


def christoffel(spec: WarpedSpec, point) -> list:
    """gamma[k][i][j] = Gamma^k_ij as order-2 jets (0.0 where identically zero)."""
    g = metric(spec, point)
    if np.any([np.any(x.value <= 0) for x in g]):
        raise ValueError("metric is singular at the requested point")
    inv = [x.truncate(2).reciprocal() for x in g]
    dg = [[g[a].diff(i) for i in range(3)] for a in range(3)]  # dg[a][i] = d_i g_aa
    gamma = [[[0.0] * 3 for _ in range(3)] for _ in range(3)]
    for k in range(3):
        for i in range(3):
            for j in range(i, 3):
                terms = []
                if j == k:
                    terms.append(dg[k][i])
                if i == k:
                    terms.append(dg[k][j])
                if i == j:
                    terms.append(-dg[i][k])
                s = _sum(terms)
                if not _zero(s):
                    s = s * inv[k] * 0.5
                gamma[k][i][j] = gamma[k][j][i] = s
    return gamma


def _riemann_from_gamma(gamma) -> list:
    r = [[[[0.0] * 3 for _ in range(3)] for _ in range(3)] for _ in range(3)]
    g1 = [[[x if _zero(x) else x.truncate(1) for x in row] for row in mat] for mat in gamma]
    for p in range(3):
        for q in range(3):
            if p == q:
                continue
            for i in range(3):
                for j in range(3):
                    terms = [_d(gamma[j][q][i], p), -_d(gamma[j][p][i], q) if not _zero(gamma[j][p][i]) else 0.0]
                    for m in range(3):
                        terms.append(_prod(g1[m][q][i], g1[j][p][m]))
                        t = _prod(g1[m][p][i], g1[j][q][m])
                        terms.append(t if _zero(t) else -t)
                    r[p][q][i][j] = _sum(terms)
    return r


def riemann(spec: WarpedSpec, point) -> list:
    """r[p][q][i][j] = R_pqi^j, R(d_p, d_q) d_i = R_pqi^j d_j, as order-1 jets."""
    return _riemann_from_gamma(christoffel(spec, point))


def ricci_tensor(spec: WarpedSpec, point, _riem=None) -> list:
    """ric[q][i] = R_pqi^p as order-1 jets."""
    r = _riem if _riem is not None else riemann(spec, point)
    return [[_sum(r[p][q][i][p] for p in range(3)) for i in range(3)] for q in range(3)]


def _values(x, shape) -> np.ndarray:
    return np.zeros(shape) if _zero(x) else np.broadcast_to(x.value, shape)


def connection_form(spec: WarpedSpec, point, _gamma=None) -> MatrixForm:
    """omega_i^j = Gamma^j_{ki} d theta^k with jet coefficients."""
    gamma = _gamma if _gamma is not None else christoffel(spec, point)
    return MatrixForm([[Form(1, {(k,): gamma[j][k][i] for k in range(3)}) for j in range(3)] for i in range(3)])


def curvature_form(spec: WarpedSpec, point, _gamma=None) -> MatrixForm:
    """Omega = d omega - omega ^ omega, numeric coefficients at each point."""
    gamma = _gamma if _gamma is not None else christoffel(spec, point)
    g1 = [[[x if _zero(x) else x.truncate(1) for x in row] for row in mat] for mat in gamma]
    omega = connection_form(spec, point, _gamma=g1)
    return curvature_from_connection(omega, COORDINATE).evaluate()


def christoffel_dot(spec: WarpedSpec, point, _gamma=None) -> np.ndarray:
    """d/dt Gamma^k_ij at t = 0 under d g/dt = -2 Ric; array indexed [k, i, j, ...].

    Gamma_dot^k_ij = -g^{kl} (nabla_i R_jl + nabla_j R_il - nabla_l R_ij).
    """
    p = check_domain(spec, point)
    shape = p.shape[1:]
    gamma = _gamma if _gamma is not None else christoffel(spec, p)
    g = metric(spec, p)
    ric = ricci_tensor(spec, p, _riem=_riemann_from_gamma(gamma))
    gam = np.array([[[_values(gamma[k][i][j], shape) for j in range(3)] for i in range(3)] for k in range(3)])
    rv = np.array([[_values(ric[a][b], shape) for b in range(3)] for a in range(3)])
    drv = np.array([[[_values(_d(ric[a][b], i), shape) for b in range(3)] for a in range(3)] for i in range(3)])
    # nabla[i, j, k] = d_i R_jk - Gamma^m_ij R_mk - Gamma^m_ik R_jm
    nabla = drv - np.einsum("mij...,mk...->ijk...", gam, rv) - np.einsum("mik...,jm...->ijk...", gam, rv)
    ginv = np.array([1.0 / np.broadcast_to(x.value, shape) for x in g])
    out = np.empty((3, 3, 3) + shape)
    for k in range(3):
        for i in range(3):
            for j in range(3):
                out[k, i, j] = -ginv[k] * (nabla[i, j, k] + nabla[j, i, k] - nabla[k, i, j])
    return out


def christoffel_dot_as_printed(spec: WarpedSpec, point) -> np.ndarray:
    """The alternative variational expression, evaluated literally (summing over l).

    R_il/(g_ii g_ll) (d_i g_jl + d_j g_il - d_l g_ij) - g^{kl} (d_i R_jl + d_j R_il - d_l R_ii).
    Kept for comparison with :func:`christoffel_dot`; it is not used elsewhere.
    """
    p = check_domain(spec, point)
    shape = p.shape[1:]
    g = metric(spec, p)
    ric = ricci_tensor(spec, p)
    gval = np.array([np.broadcast_to(x.value, shape) for x in g])
    dg = np.array([[np.broadcast_to(g[a].diff(i).value, shape) for i in range(3)] for a in range(3)])
    full_dg = np.zeros((3, 3, 3) + shape)  # full_dg[i, a, b] = d_i g_ab
    for a in range(3):
        full_dg[:, a, a] = dg[a]
    rv = np.array([[_values(ric[a][b], shape) for b in range(3)] for a in range(3)])
    drv = np.array([[[_values(_d(ric[a][b], i), shape) for b in range(3)] for a in range(3)] for i in range(3)])
    out = np.zeros((3, 3, 3) + shape)
    for k in range(3):
        for i in range(3):
            for j in range(3):
                acc = np.zeros(shape)
                for l in range(3):
                    acc += rv[i, l] / (gval[i] * gval[l]) * (full_dg[i, j, l] + full_dg[j, i, l] - full_dg[l, i, j])
                acc -= (drv[i, j, k] + drv[j, i, k] - drv[k, i, i]) / gval[k]
                out[k, i, j] = acc
    return out


def metric_values(spec: WarpedSpec, point) -> np.ndarray:
    """g[a, b, ...] as plain numbers."""
    p = check_domain(spec, point)
    shape = p.shape[1:]
    out = np.zeros((3, 3) + shape)
    for a, ga in enumerate(metric(spec, p)):
        out[a, a] = np.broadcast_to(ga.value, shape)
    return out


def christoffel_values(spec: WarpedSpec, point) -> np.ndarray:
    """Gamma[k, i, j, ...] as plain numbers."""
    p = check_domain(spec, point)
    shape = p.shape[1:]
    gamma = christoffel(spec, p)
    return np.array([[[_values(gamma[k][i][j], shape) for j in range(3)] for i in range(3)] for k in range(3)])


def riemann_values(spec: WarpedSpec, point) -> np.ndarray:
    """r[p, q, i, j, ...] = R_pqi^j as plain numbers."""
    p = check_domain(spec, point)
    shape = p.shape[1:]
    r = riemann(spec, p)
    return np.array([[[[_values(r[a][b][i][j], shape) for j in range(3)] for i in range(3)]
                      for b in range(3)] for a in range(3)])


def ricci_values(spec: WarpedSpec, point) -> np.ndarray:
    p = check_domain(spec, point)
    shape = p.shape[1:]
    ric = ricci_tensor(spec, p)
    return np.array([[_values(ric[a][b], shape) for b in range(3)] for a in range(3)])


def _omega_dot_from(gdot: np.ndarray) -> MatrixForm:
    return MatrixForm([[Form(1, {(k,): gdot[j, k, i] for k in range(3)}) for j in range(3)] for i in range(3)])


def omega_dot(spec: WarpedSpec, point) -> MatrixForm:
    """omega_dot_i^j = Gamma_dot^j_{ki} d theta^k."""
    return _omega_dot_from(christoffel_dot(spec, point))


@dataclass
class PointData:
    """Everything the exactness check needs at a batch of points."""

    omega_dot: MatrixForm
    curvature: MatrixForm


def point_data(spec: WarpedSpec, point) -> PointData:
    gamma = christoffel(spec, point)
    return PointData(_omega_dot_from(christoffel_dot(spec, point, _gamma=gamma)),
                     curvature_form(spec, point, _gamma=gamma))


def exactness_residuals(spec: WarpedSpec, point, _data: PointData | None = None) -> tuple[np.ndarray, np.ndarray]:
    """(tr omega_dot ^ tr Omega, tr(omega_dot ^ Omega)) as d theta^123 coefficients."""
    d = _data or point_data(spec, point)
    r1 = wedge(trace(d.omega_dot), trace(d.curvature)).top()
    r2 = trace(matrix_wedge(d.omega_dot, d.curvature)).top()
    shape = np.asarray(point).shape[1:]
    return np.broadcast_to(r1, shape).copy(), np.broadcast_to(r2, shape).copy()


def chart_conditioning(spec: WarpedSpec, point) -> np.ndarray:
    """sin^3 of the polar angle; roundoff in coordinate-frame derivatives of the
    curvature grows like machine epsilon / sin^3 toward the poles."""
    p = np.asarray(point, dtype=float)
    return np.abs(np.sin(p[spec.polar_axes[0]])) ** 3


def pattern_violation(m: MatrixForm, pattern: dict, weight=1.0) -> float:
    """Largest weighted |coefficient| outside the allowed support (unlisted entries must vanish)."""
    arr = m.to_array() * weight
    basis = BASES[m.degree]
    worst = 0.0
    for i in range(3):
        for j in range(3):
            allowed = pattern.get((i, j), set())
            for b, idx in enumerate(basis):
                if idx not in allowed:
                    worst = max(worst, float(np.max(np.abs(arr[i, j, b]), initial=0.0)))
    return worst


@dataclass
class ScanResult:
    max_r1: float
    max_r2: float
    curvature_pattern: float
    omega_dot_pattern: float
    points: int
    omega_dot_pattern_raw: float = 0.0

    def exact(self, tol: float = 1e-8) -> bool:
        return self.max_r1 < tol and self.max_r2 < tol

    def patterns_ok(self, tol: float = 1e-12) -> bool:
        return self.curvature_pattern < tol and self.omega_dot_pattern < tol


def _scan_chunk(spec: WarpedSpec, pts: np.ndarray) -> ScanResult:
    d = point_data(spec, pts)
    r1, r2 = exactness_residuals(spec, pts, _data=d)
    return ScanResult(float(np.max(np.abs(r1))), float(np.max(np.abs(r2))),
                      pattern_violation(d.curvature, CURVATURE_PATTERN[spec.n]),
                      pattern_violation(d.omega_dot, OMEGA_DOT_PATTERN[spec.n], chart_conditioning(spec, pts)),
                      pts.shape[1], pattern_violation(d.omega_dot, OMEGA_DOT_PATTERN[spec.n]))


def grid_scan(spec: WarpedSpec, resolution: int, jobs: int = 1, chunk: int = 8192) -> ScanResult:
    """Max residuals and pattern violations over a ``resolution``^3 chart grid."""
    pts = grid(spec, resolution)
    chunks = [pts[:, s:s + chunk] for s in range(0, pts.shape[1], chunk)]
    if jobs > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(lambda c: _scan_chunk(spec, c), chunks))
    else:
        parts = [_scan_chunk(spec, c) for c in chunks]
    return ScanResult(max(p.max_r1 for p in parts), max(p.max_r2 for p in parts),
                      max(p.curvature_pattern for p in parts), max(p.omega_dot_pattern for p in parts),
                      pts.shape[1], max(p.omega_dot_pattern_raw for p in parts))
