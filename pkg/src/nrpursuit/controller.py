"""Newton-flow tracking controllers with constant-input prediction.

Three flavors are provided:

* ``memoryless_udot``: the base flow ``du/dt = alpha * J^-1 (r - g(u))`` for a
  square output map, which steers g(u) toward the reference r.
* ``predict_with_sensitivity``: propagates a Dubins vehicle over a look-ahead
  horizon with the input held constant, together with the trajectory's
  sensitivity to that held input (the variational system), on one RK4 grid.
* ``scalar_objective_udot``: the underactuated form for a scalar objective g,
  ``du/dt = -alpha * g / reg(dg/du)``, with a sign-preserving floor on the
  derivative so the flow stays finite at interior critical points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .dynamics import DubinsState, PursuerParams, rk4_step
from .errors import ConfigError, IntegrationError, SingularJacobianError

# Jacobians with singular values below ||J|| / COND_LIMIT are treated as singular.
COND_LIMIT = 1e12


@dataclass
class ControllerConfig:
    alpha: float = 20.0  # flow gain, shrinks asymptotic tracking error ~ 1/alpha
    horizon: float = 0.5  # look-ahead T [s]
    jac_epsilon: float = 1e-4  # |dg/du| floor for the scalar flow
    prediction_substeps: int = 50  # RK4 intervals over the horizon
    u_max: Optional[float] = None  # saturation [rad/s]; None defers to the plant limit

    def __post_init__(self):
        if not self.alpha > 0:
            raise ConfigError(f"alpha must be positive, got {self.alpha}")
        if not self.horizon > 0:
            raise ConfigError(f"horizon must be positive, got {self.horizon}")
        if not self.jac_epsilon > 0:
            raise ConfigError(f"jac_epsilon must be positive, got {self.jac_epsilon}")
        if self.prediction_substeps < 2:
            raise ConfigError(
                f"prediction_substeps must be >= 2, got {self.prediction_substeps}"
            )


@dataclass
class ControllerState:
    """Continuously integrated turn-rate commands, one per controlled pursuer."""

    u: np.ndarray  # [rad/s]

    def __post_init__(self):
        self.u = np.atleast_1d(np.asarray(self.u, dtype=float))


@dataclass
class PredictionBundle:
    """A predicted trajectory and its sensitivity to the held input.

    ``times`` are offsets from the prediction start, spanning [0, T]. The
    sensitivity at offset 0 is exactly zero by construction.
    """

    times: np.ndarray  # (K+1,)
    xi: np.ndarray  # (K+1, 3): predicted x, y, heading
    dxi_du: np.ndarray  # (K+1, 3): d(xi)/d(u_held)


@dataclass
class ReferenceSignal:
    """A reference trajectory r(t) with an optional rate bound limsup ||dr/dt||."""

    r: Callable[[float], np.ndarray]
    eta: Optional[float] = None


def memoryless_udot(g, g_jac, u, r, alpha: float = 1.0):
    """Newton-Raphson flow for a square, memoryless output map.

    Solves r - g(u) = 0 in continuous time:
    du/dt = alpha * (dg/du)^-1 (r - g(u)).

    Args:
        g: output map, u -> y (scalar or vector).
        g_jac: Jacobian of g, u -> (m, m) matrix (or scalar for m=1).
        u: current input.
        r: reference output value.
        alpha: flow gain.

    Returns:
        du/dt with the same shape as u.

    Raises:
        SingularJacobianError: if the Jacobian is singular at u (by a
            condition estimate), including the offending u.
    """
    y = g(u)
    jac = g_jac(u)
    if np.isscalar(jac) or np.shape(jac) in ((), (1,), (1, 1)):
        j = float(np.asarray(jac).reshape(()))
        if j == 0.0 or not math.isfinite(j):
            raise SingularJacobianError(f"singular 1x1 Jacobian at u={u!r}", u=u)
        err = float(np.asarray(r).reshape(())) - float(np.asarray(y).reshape(()))
        de = alpha * err / j
        return de if np.isscalar(u) else np.array([de])
    jmat = np.asarray(jac, dtype=float)
    sigma = np.linalg.svd(jmat, compute_uv=False)
    if sigma[-1] <= 0 or sigma[0] / sigma[-1] > COND_LIMIT:
        raise SingularJacobianError(
            f"ill-conditioned Jacobian (cond ~ {sigma[0] / max(sigma[-1], 1e-300):.3g}) at u={u!r}",
            u=u,
        )
    err = np.asarray(r, dtype=float) - np.asarray(y, dtype=float)
    return alpha * np.linalg.solve(jmat, err)


def predict_with_sensitivity(
    state: DubinsState,
    u_held: float,
    horizon: float,
    params: PursuerParams,
    substeps: int = 50,
) -> PredictionBundle:
    """Propagate a Dubins vehicle with constant input, plus input sensitivity.

    Jointly integrates the vehicle state xi and the variational system
    d/dtau (dxi/du) = (df/dxi) (dxi/du) + df/du with RK4 on a shared grid,
    starting from dxi/du = 0. For this model df/dxi only couples heading into
    position, and df/du = (0, 0, 1).

    Args:
        state: vehicle state at the prediction start.
        u_held: turn rate held constant over the horizon [rad/s].
        horizon: look-ahead T [s], > 0.
        params: vehicle parameters.
        substeps: number of RK4 intervals over the horizon, >= 2.

    Returns:
        PredictionBundle sampled at substeps + 1 points.
    """
    if not horizon > 0:
        raise ConfigError(f"horizon must be positive, got {horizon}")
    if substeps < 2:
        raise ConfigError(f"substeps must be >= 2, got {substeps}")
    v = params.speed
    h = horizon / substeps
    x = float(state.pos[0])
    y = float(state.pos[1])
    th = float(state.heading)
    u = float(u_held)
    # Sensitivities of (x, y, heading) w.r.t. the held input.
    sx = 0.0
    sy = 0.0
    sth = 0.0

    times = np.linspace(0.0, horizon, substeps + 1)
    xi = np.empty((substeps + 1, 3))
    dxi = np.empty((substeps + 1, 3))
    xi[0] = (x, y, th)
    dxi[0] = (0.0, 0.0, 0.0)

    h6 = h / 6.0
    for i in range(1, substeps + 1):
        # Heading dynamics do not depend on position, so RK4 stages 2 and 3
        # coincide and the position update collapses to a Simpson form.
        th_mid = th + 0.5 * h * u
        th_end = th + h * u
        s_mid = sth + 0.5 * h
        s_end = sth + h
        c0 = math.cos(th)
        s0 = math.sin(th)
        cm = math.cos(th_mid)
        sm = math.sin(th_mid)
        ce = math.cos(th_end)
        se = math.sin(th_end)
        x += h6 * v * (c0 + 4.0 * cm + ce)
        y += h6 * v * (s0 + 4.0 * sm + se)
        sx -= h6 * v * (s0 * sth + 4.0 * sm * s_mid + se * s_end)
        sy += h6 * v * (c0 * sth + 4.0 * cm * s_mid + ce * s_end)
        th = th_end
        sth = s_end
        xi[i] = (x, y, th)
        dxi[i] = (sx, sy, sth)

    if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(th)):
        raise IntegrationError("non-finite prediction state", t=float(times[-1]))
    return PredictionBundle(times=times, xi=xi, dxi_du=dxi)


def scalar_objective_udot(
    gval: float, dg_du: float, alpha: float, jac_epsilon: float = 1e-4
) -> float:
    """Underactuated Newton flow for a scalar objective driven toward zero.

    du/dt = -alpha * g / reg(dg/du), where reg(z) = sign(z) * max(|z|, eps)
    and sign(0) is taken as +1, so the flow stays finite when the derivative
    vanishes at interior critical points of g.
    """
    if not math.isfinite(gval):
        raise ConfigError(f"objective value must be finite, got {gval}")
    mag = max(abs(dg_du), jac_epsilon)
    reg = mag if dg_du >= 0.0 else -mag
    return -alpha * gval / reg


def saturate(u: float, u_max: float) -> float:
    """Clamp a turn rate to [-u_max, u_max]."""
    if u > u_max:
        return u_max
    if u < -u_max:
        return -u_max
    return u


def simulate_memoryless_tracking(
    g,
    g_jac,
    ref: ReferenceSignal,
    duration: float,
    dt: float,
    alpha: float = 1.0,
    u0=0.0,
):
    """Integrate the memoryless closed loop and return (times, u, error) arrays.

    The reference is sampled continuously: RK4 stages see r at their own stage
    times, so ramps are tracked without hold-induced bias.
    """
    steps = int(round(duration / dt))
    u = np.atleast_1d(np.asarray(u0, dtype=float)).copy()
    m = u.shape[0]
    times = np.empty(steps + 1)
    us = np.empty((steps + 1, m))
    errs = np.empty(steps + 1)
    aug = np.concatenate([u, [0.0]])  # trailing component carries time

    def f(z):
        du = memoryless_udot(g, g_jac, z[:m], ref.r(z[m]), alpha)
        return np.concatenate([np.atleast_1d(du), [1.0]])

    for k in range(steps + 1):
        t = k * dt
        times[k] = t
        us[k] = aug[:m]
        errs[k] = np.linalg.norm(np.asarray(ref.r(t)) - np.asarray(g(aug[:m])))
        if k < steps:
            aug = rk4_step(f, aug, dt, t=t)
    return times, us, errs
