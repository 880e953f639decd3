"""Registry of cross-checks between closed forms and independent oracles.

Each check draws its samples from a seeded generator and returns the largest
error it saw; :func:`run_all` compares that against a tolerance.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from . import berger, chern_simons, oracles, ricci_flow, warped
from .exterior_algebra import curvature_from_connection

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Check:
    name: str
    fn: Callable[[np.random.Generator], float]
    tolerance: float
    paper_anchor: str


@dataclass
class CheckResult:
    name: str
    status: str
    max_error: float
    tolerance: float
    paper_anchor: str

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def as_dict(self) -> dict:
        return asdict(self)


def scaled_error(a, b) -> float:
    """max |a - b| / max(1, |b|): absolute for small values, relative for large ones."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(b)), initial=0.0))


def relative_error(a, b) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b)) / np.max(np.abs(b)))


def _lambdas(rng, count=100, lo=0.25, hi=4.0):
    return rng.uniform(lo, hi, size=(count, 3))


# -- Berger closed forms -------------------------------------------------------

def check_koszul(rng) -> float:
    return max(scaled_error(berger.connection_coeffs(lam), oracles.koszul_connection(berger.structure(lam)))
               for lam in _lambdas(rng))


def check_connection_form(rng) -> float:
    worst = 0.0
    for lam in _lambdas(rng):
        g = oracles.koszul_connection(berger.structure(lam))
        oracle = oracles.connection_form_from_coeffs(g)
        worst = max(worst, scaled_error(berger.connection_form(lam).to_array(), oracle.to_array()))
    return worst


def check_curvature_form(rng) -> float:
    worst = 0.0
    for lam in _lambdas(rng):
        frame = berger.structure(lam)
        omega = oracles.connection_form_from_coeffs(oracles.koszul_connection(frame))
        oracle = curvature_from_connection(omega, frame)
        worst = max(worst, scaled_error(berger.curvature_form(lam).to_array(), oracle.to_array()))
    return worst


def check_ricci(rng) -> float:
    worst = 0.0
    for lam in _lambdas(rng):
        frame = berger.structure(lam)
        r = oracles.riemann_from_connection(oracles.koszul_connection(frame), frame)
        worst = max(worst, scaled_error(berger.ricci(lam), oracles.ricci_contraction(r)))
    return worst


def check_sectional_contraction(rng) -> float:
    """Ricci from the closed-form sectional curvatures, R_ii = sum_{p != i} K(i, p)."""
    worst = 0.0
    for lam in _lambdas(rng):
        k = [[berger.sectional_curvature(lam, i, j) if i != j else 0.0 for j in range(3)] for i in range(3)]
        worst = max(worst, scaled_error(np.sum(k, axis=1), berger.ricci(lam)))
    return worst


def check_omega_dot(rng) -> float:
    """Frozen-frame connection differentiated along the flow by central differences."""
    worst = 0.0

    def central(lam, h):
        fwd = berger.connection_form(ricci_flow.rk4_step(lam, h), frame=lam).to_array()
        bwd = berger.connection_form(ricci_flow.rk4_step(lam, -h), frame=lam).to_array()
        return (fwd - bwd) / (2 * h)

    for lam in rng.uniform(0.5, 2.0, size=(20, 3)):
        fd = (4 * central(lam, 5e-5) - central(lam, 1e-4)) / 3
        worst = max(worst, scaled_error(fd, berger.omega_dot(lam).to_array()))
    return worst


def check_pipeline_ratio(rng) -> float:
    """2 P_1(omega_dot ^ Omega) over the closed-form coefficient is one global constant."""
    worst = 0.0
    for lam in rng.uniform(0.5, 2.0, size=(100, 3)):
        coef = berger.tp1_dot_coefficient(lam)
        if abs(coef) < 1e-6:
            continue
        ratio = berger.cs_dot_density(lam) / coef
        worst = max(worst, abs(ratio / berger.PIPELINE_TO_DISPLAYED - 1.0))
    return worst


def check_round_invariance(rng) -> float:
    lam = rng.uniform(0.1, 10.0, size=50)
    return max(abs(berger.tp1_dot_coefficient((x, x, x))) for x in lam)


def check_f_factorization(rng) -> float:
    worst = 0.0
    for a, b in rng.uniform(0.5, 3.0, size=(1000, 2)):
        f = berger.big_F(a, b)
        for variant in (1, 2):
            worst = max(worst, abs(berger.big_F_factored(a, b, variant) - f) / max(abs(f), 1e-300))
    return worst


def check_f_positivity(rng) -> float:
    """Largest negative part of F over alpha, beta > 1 (zero when F is positive everywhere)."""
    worst = 0.0
    for a, b in rng.uniform(1.0 + 1e-9, 3.0, size=(1000, 2)):
        values = (berger.big_F(a, b), berger.big_F_factored(a, b, 1), berger.big_F_factored(a, b, 2))
        worst = max(worst, max(0.0 if v > 0 else 1.0 - v for v in values))
    return worst


def check_f_matches_numerator(rng) -> float:
    worst = 0.0
    for a, b in rng.uniform(0.5, 3.0, size=(200, 2)):
        f = berger.big_F(a, b)
        worst = max(worst, abs(berger.tp1_dot_numerator((a, b, 1.0)) - f) / max(1.0, abs(f)))
    return worst


# -- Chern-Simons ------------------------------------------------------------------

def check_tp_quadrature(rng) -> float:
    worst = 0.0
    for _ in range(100):
        omega = oracles.random_skew_matrix_form(rng, 1)
        curv = oracles.random_skew_matrix_form(rng, 2)
        closed = float(chern_simons.tp_form(omega, curv).top())
        worst = max(worst, abs(closed - oracles.gauss_legendre_tp(omega, curv)))
    return worst


def check_round_cs_integral_value(rng) -> float:
    """Round spheres of any radius have TP_1 integral -8 (density -4/(pi^2 r^3) times volume 2 pi^2 r^3)."""
    return max(abs(berger.cs_density((x, x, x)) * berger.volume((x, x, x)) + 8.0) for x in rng.uniform(0.25, 4.0, size=20))


# -- Ricci flow ----------------------------------------------------------------------

def check_round_flow(rng) -> float:
    traj = ricci_flow.integrate((1.0, 1.0, 1.0), 0.2, 1e-3)
    lam = traj.lambdas()
    exact = np.sqrt(1.0 - 4.0 * traj.t())
    return float(np.max(np.abs(lam - exact[:, None])))


def check_round_cs_integral(rng) -> float:
    traj = ricci_flow.integrate((1.0, 1.0, 1.0), 0.2, 1e-3)
    integral = np.array([row[2] for row in ricci_flow.cs_along_flow(traj)])
    return float(np.max(np.abs(integral / integral[0] - 1.0)))


def check_cs_density_rate(rng) -> float:
    worst = 0.0
    for lam in rng.uniform(0.5, 2.0, size=(20, 3)):
        analytic = berger.cs_dot_density(lam)
        fd = ricci_flow.cs_density_rate(lam)
        worst = max(worst, abs(fd - analytic) / max(abs(analytic), 1e-12))
    return worst


def check_normalized_volume(rng) -> float:
    traj = ricci_flow.integrate(rng.uniform(0.8, 1.6, size=3), 1.0, 1e-3, normalized=True)
    vol = traj.lambdas().prod(axis=1)
    return float(np.max(np.abs(vol / vol[0] - 1.0)))


# -- warped products -----------------------------------------------------------------

def _warped_specs():
    return [warped.WarpedSpec.from_warp(n, w) for n, ws in warped.BUILTIN_WARPS.items() for w in ws[1:3]]


def _chart_points(rng, spec, count=40):
    p = rng.uniform(0.0, 2 * math.pi, size=(3, count))
    for ax in spec.polar_axes:
        p[ax] = rng.uniform(0.2, math.pi - 0.2, size=count)
    return p


def check_warped_christoffel(rng) -> float:
    worst = 0.0
    for spec in _warped_specs():
        p = _chart_points(rng, spec)
        g = warped.metric_values(spec, p)
        dg = oracles.central_gradient(lambda q: warped.metric_values(spec, q), p)
        worst = max(worst, scaled_error(warped.christoffel_values(spec, p), oracles.christoffel_from_values(g, dg)))
    return worst


def check_warped_christoffel_dot(rng) -> float:
    """Forward Euler step g - 2 h Ric of the metric and its first derivatives."""
    h = 1e-6
    worst = 0.0
    for spec in _warped_specs():
        p = _chart_points(rng, spec)
        g = warped.metric_values(spec, p)
        dg = oracles.central_gradient(lambda q: warped.metric_values(spec, q), p)
        ric = warped.ricci_values(spec, p)
        dric = oracles.central_gradient(lambda q: warped.ricci_values(spec, q), p)
        fd = (oracles.christoffel_from_values(g - 2 * h * ric, dg - 2 * h * dric)
              - oracles.christoffel_from_values(g, dg)) / h
        worst = max(worst, relative_error(fd, warped.christoffel_dot(spec, p)))
    return worst


def check_warped_bianchi(rng) -> float:
    worst = 0.0
    for spec in _warped_specs():
        r = warped.riemann_values(spec, _chart_points(rng, spec))
        cyc = r + np.transpose(r, (1, 2, 0, 3, 4)) + np.transpose(r, (2, 0, 1, 3, 4))
        worst = max(worst, float(np.max(np.abs(cyc))))
    return worst


def check_warped_exactness(rng) -> float:
    worst = 0.0
    for spec in _warped_specs():
        r1, r2 = warped.exactness_residuals(spec, _chart_points(rng, spec, 200))
        worst = max(worst, float(np.max(np.abs(r1))), float(np.max(np.abs(r2))))
    return worst


CHECKS = [
    Check("berger.koszul_connection", check_koszul, 1e-12, "Koszul formula for the rescaled frame"),
    Check("berger.connection_form", check_connection_form, 1e-12, "closed-form connection matrix omega_i^j"),
    Check("berger.curvature_form", check_curvature_form, 1e-12, "structure equation Omega = d omega - omega ^ omega"),
    Check("berger.ricci", check_ricci, 1e-12, "closed-form Ricci components R_ii"),
    Check("berger.sectional_to_ricci", check_sectional_contraction, 1e-12, "curvature operator R(X_i, X_j) X_i"),
    Check("berger.omega_dot_finite_difference", check_omega_dot, 1e-6, "frozen-frame connection derivative"),
    Check("berger.pipeline_ratio", check_pipeline_ratio, 1e-9, "three-parameter derivative coefficient"),
    Check("berger.round_invariance", check_round_invariance, 0.0, "round sphere invariance under the flow"),
    Check("berger.F_factorization", check_f_factorization, 1e-9, "two factorizations of F(alpha, beta)"),
    Check("berger.F_positivity", check_f_positivity, 0.0, "positivity of F for alpha, beta > 1"),
    Check("berger.F_numerator", check_f_matches_numerator, 1e-9, "F as the normalized numerator"),
    Check("chern_simons.tp_quadrature", check_tp_quadrature, 1e-12, "transgression form t-integral"),
    Check("chern_simons.round_integral", check_round_cs_integral_value, 1e-12, "TP_1 of the round sphere"),
    Check("ricci_flow.round_closed_form", check_round_flow, 1e-8, "Ricci flow d g/dt = -2 Ric"),
    Check("ricci_flow.round_cs_integral", check_round_cs_integral, 1e-9, "round sphere invariance under the flow"),
    Check("ricci_flow.cs_density_rate", check_cs_density_rate, 1e-4, "variation formula 2 P_1(omega_dot ^ Omega)"),
    Check("ricci_flow.normalized_volume", check_normalized_volume, 1e-9, "volume-normalized flow"),
    Check("warped.christoffel", check_warped_christoffel, 1e-8, "Christoffel symbols of the warped metric"),
    Check("warped.christoffel_dot", check_warped_christoffel_dot, 1e-4, "Christoffel variation under the flow"),
    Check("warped.first_bianchi", check_warped_bianchi, 1e-9, "first Bianchi identity"),
    Check("warped.exactness", check_warped_exactness, 1e-8, "exactness of the warped-product derivative"),
]


def run_check(check: Check, seed: int = 0, tolerance: float | None = None) -> CheckResult:
    tol = check.tolerance if tolerance is None else tolerance
    rng = np.random.default_rng(seed)
    try:
        err = float(check.fn(rng))
    except Exception as exc:  # a crashing check is a failed check
        return CheckResult(check.name, f"error: {exc}", float("nan"), tol, check.paper_anchor)
    ok = math.isfinite(err) and err <= tol
    return CheckResult(check.name, "pass" if ok else "fail", err, tol, check.paper_anchor)


def run_all(seed: int = 0, tolerances: dict | None = None, names=None) -> list[CheckResult]:
    """Run the registry; failures come first, otherwise registry order is kept."""
    tolerances = tolerances or {}
    unknown = set(tolerances) - {c.name for c in CHECKS}
    if unknown:
        raise KeyError(f"unknown check name(s): {', '.join(sorted(unknown))}")
    selected = [c for c in CHECKS if names is None or c.name in names]
    results = [run_check(c, seed, tolerances.get(c.name)) for c in selected]
    return sorted(results, key=lambda r: r.passed)


def report(results: list[CheckResult]) -> dict:
    return {"schema_version": SCHEMA_VERSION, "checks": [r.as_dict() for r in results]}
