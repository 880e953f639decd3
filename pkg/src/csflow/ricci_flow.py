"""Ricci flow restricted to diagonal left-invariant metrics on SU(2).

With g(X_i, X_i) = lambda_i^2 and Ric(X_i, X_i) = lambda_i^2 R_ii, the flow
d g/dt = -2 Ric becomes d lambda_i/dt = -lambda_i R_ii. The normalized flow
adds (S/3) lambda_i, S the scalar curvature, which is the homogeneous form of
d g/dt = -2 Ric + (2/3) S g and keeps l1 l2 l3 fixed.

Chern-Simons quantities along a trajectory are written in the frame of the
starting parameters, which does not move with the flow.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import berger, chern_simons
from .berger import BergerParams

log = logging.getLogger(__name__)

EXTINCTION_THRESHOLD = 1e-6


def ode_rhs(params, normalized: bool = False) -> np.ndarray:
    lam = BergerParams.of(params).as_array()
    r = berger.ricci(lam)
    rhs = -lam * r
    if normalized:
        rhs += r.sum() / 3.0 * lam
    return rhs


def _rhs(lam: np.ndarray, normalized: bool) -> np.ndarray:
    if np.any(~np.isfinite(lam)) or np.any(lam <= 0):
        raise FloatingPointError("flow left the positive orthant")
    return ode_rhs(lam, normalized)


def rk4_step(lam, h: float, normalized: bool = False) -> np.ndarray:
    """One classical Runge-Kutta step; negative ``h`` integrates backwards."""
    y = np.asarray(BergerParams.of(lam).as_array() if not isinstance(lam, np.ndarray) else lam, dtype=float)
    k1 = _rhs(y, normalized)
    k2 = _rhs(y + 0.5 * h * k1, normalized)
    k3 = _rhs(y + 0.5 * h * k2, normalized)
    k4 = _rhs(y + h * k3, normalized)
    return y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


@dataclass(frozen=True)
class FlowState:
    params: BergerParams
    t: float
    ricci: tuple[float, float, float]
    scalar: float
    cs_density: float
    cs_integral: float


@dataclass
class FlowTrajectory:
    states: list[FlowState]
    h: float
    normalized: bool
    method: str = "rk4"
    extinct: bool = False
    frame: BergerParams | None = None
    times: list[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.states)

    def lambdas(self) -> np.ndarray:
        return np.array([s.params.as_array() for s in self.states])

    def t(self) -> np.ndarray:
        return np.array([s.t for s in self.states])


def cs_density_in_frame(params, frame) -> float:
    """thetabar(frame)^123 coefficient of TP_1 for the metric ``params``."""
    omega = berger.connection_form(params, frame=frame)
    curv = berger.curvature_form(params, frame=frame)
    return float(chern_simons.tp_form(omega, curv).top())


def make_state(params, t: float, frame) -> FlowState:
    p = BergerParams.of(params)
    r = berger.ricci(p)
    density = cs_density_in_frame(p, frame)
    integral = density * berger.volume(frame)
    return FlowState(p, float(t), tuple(float(x) for x in r), float(r.sum()), density, integral)


def integrate(start, t_end: float, h: float, normalized: bool = False) -> FlowTrajectory:
    """Fixed-step RK4 from ``start`` to ``t_end``; the last step is shortened to land on ``t_end``.

    Halts early, with ``extinct`` set, once any lambda drops to the extinction threshold.
    """
    if not h > 0:
        raise ValueError(f"step size must be positive, got {h}")
    if not t_end > 0:
        raise ValueError(f"t_end must be positive, got {t_end}")
    frame = BergerParams.of(start)
    y = frame.as_array()
    t = 0.0
    states = [make_state(frame, 0.0, frame)]
    n_steps = math.ceil(t_end / h - 1e-9)
    extinct = False
    for n in range(1, n_steps + 1):
        t_next = min(n * h, t_end)
        try:
            y_next = rk4_step(y, t_next - t, normalized)
        except FloatingPointError:
            extinct = True
            break
        if np.any(~np.isfinite(y_next)) or np.any(y_next <= EXTINCTION_THRESHOLD):
            extinct = True
            break
        y, t = y_next, t_next
        states.append(make_state(y, t, frame))
    if extinct:
        log.warning("flow reached the extinction threshold at t=%.6g before t_end=%.6g", t, t_end)
    return FlowTrajectory(states, h, normalized, extinct=extinct, frame=frame)


def cs_along_flow(traj: FlowTrajectory) -> list[tuple[float, float, float]]:
    """(t, cs_density, cs_integral) per state; density is against the frozen starting coframe."""
    return [(s.t, s.cs_density, s.cs_integral) for s in traj.states]


def cs_density_rate(params, h: float = 1e-5, normalized: bool = False) -> float:
    """Central finite difference of the frozen-frame density at t = 0, using one RK4 step each way."""
    p = BergerParams.of(params)
    fwd = rk4_step(p.as_array(), h, normalized)
    bwd = rk4_step(p.as_array(), -h, normalized)
    return (cs_density_in_frame(fwd, p) - cs_density_in_frame(bwd, p)) / (2 * h)
