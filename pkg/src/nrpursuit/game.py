"""Evader strategy, game costs, and the pursuit objectives fed to the Newton flow.

The evader seeks its goal while no pursuer is near, flees radially from the
closest pursuer at intermediate range, and cuts across the closest pursuer's
heading once inside that pursuer's turning-radius disc, where the vehicle
cannot follow. The same switching law, minus the goal-seeking branch, serves
as the pursuers' internal model of the evader.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .controller import PredictionBundle
from .dynamics import DubinsState, EvaderParams, as_vec2
from .errors import ConfigError

GOAL_SEEK = "goal_seek"
RADIAL_FLEE = "radial_flee"
TANGENTIAL_ESCAPE = "tangential_escape"


@dataclass
class ObjectiveWeights:
    beta1: float = 1.0  # weight on summed squared distances
    beta2: float = 1.0  # weight on the cooperation term d1^2 d2^2 / (d1^2 + d2^2)
    beta3: float = 0.0  # weight on the pursuer-separation repulsion
    gamma: float = 0.1  # [1/s]; discount and repulsion decay unless overridden
    gamma_cost: Optional[float] = None  # discount rate for the running cost
    gamma_repel: Optional[float] = None  # decay rate of the repulsion term

    def __post_init__(self):
        for name in ("beta1", "beta2", "beta3"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ConfigError(f"{name} must be finite and >= 0, got {v}")
        if not (math.isfinite(self.gamma) and self.gamma > 0):
            raise ConfigError(f"gamma must be positive, got {self.gamma}")
        if self.gamma_cost is None:
            self.gamma_cost = self.gamma
        if self.gamma_repel is None:
            self.gamma_repel = self.gamma


@dataclass
class EvasionDecision:
    heading: float  # [rad]
    branch: str  # one of GOAL_SEEK, RADIAL_FLEE, TANGENTIAL_ESCAPE


def evasion_heading(
    evader_pos: np.ndarray,
    pursuers: Sequence[DubinsState],
    turning_radii: Sequence[float],
    evader: EvaderParams,
    goal_seek: bool = True,
) -> EvasionDecision:
    """Switching evasion law against the closest pursuer.

    Let P be the closest pursuer, d the distance to it, R_P its turning
    radius, and rho_e = evade_radius_scale * R_P the goal-activation radius.

    * d > rho_e (and goal seeking enabled): head for the goal.
    * R_P < d <= rho_e: flee along the ray from P to the evader.
    * d <= R_P: radial direction +/- pi/2, crossing into P's non-holonomic
      region; the sign follows the cross product of P's heading direction
      with the P-to-evader ray (+pi/2 on ties).

    With ``goal_seek=False`` the first branch is dropped; this is the
    pursuers' internal model, which does not know the evader's goal.
    """
    if len(pursuers) < 1:
        raise ConfigError("at least one pursuer required")
    if len(turning_radii) != len(pursuers):
        raise ConfigError("turning_radii must align with pursuers")
    evader_pos = as_vec2(evader_pos)
    dists = [float(np.hypot(*(evader_pos - p.pos))) for p in pursuers]
    idx = int(np.argmin(dists))
    closest = pursuers[idx]
    d = dists[idx]
    radius = float(turning_radii[idx])
    delta = evader_pos - closest.pos

    goal_heading = math.atan2(
        evader.goal[1] - evader_pos[1], evader.goal[0] - evader_pos[0]
    )
    if goal_seek:
        rho_e = evader.evade_radius_scale * radius
        if d == 0.0:
            # Degenerate geometry: the radial direction is undefined.
            return EvasionDecision(goal_heading, GOAL_SEEK)
        if d > rho_e:
            return EvasionDecision(goal_heading, GOAL_SEEK)

    radial = math.atan2(delta[1], delta[0])
    if d > radius:
        return EvasionDecision(radial, RADIAL_FLEE)
    cross = math.cos(closest.heading) * delta[1] - math.sin(closest.heading) * delta[0]
    sign = 1.0 if cross >= 0.0 else -1.0
    return EvasionDecision(radial + sign * 0.5 * math.pi, TANGENTIAL_ESCAPE)


def stage_cost(d1: float, d2: float, w: ObjectiveWeights) -> float:
    """Instantaneous game cost beta1 (d1^2 + d2^2) + beta2 d1^2 d2^2 / (d1^2 + d2^2).

    The ratio term is defined as 0 when both distances vanish.
    """
    d1s = d1 * d1
    d2s = d2 * d2
    total = d1s + d2s
    ratio = d1s * d2s / total if total > 0.0 else 0.0
    return w.beta1 * total + w.beta2 * ratio


def accumulate_cost(prev_cost: float, stage: float, t: float, dt: float, gamma: float) -> float:
    """Advance the discounted cost integral by one left-endpoint rectangle."""
    if not dt > 0:
        raise ConfigError(f"dt must be positive, got {dt}")
    return prev_cost + math.exp(-gamma * t) * stage * dt


def predict_evader_path(
    evader_pos: np.ndarray, heading: float, speed: float, times: np.ndarray
) -> np.ndarray:
    """Straight-line extrapolation of the evader at a constant estimated heading.

    ``times`` are offsets from the prediction start, matching the controller's
    prediction grid. Returns positions of shape (len(times), 2).
    """
    evader_pos = as_vec2(evader_pos)
    direction = np.array([math.cos(heading), math.sin(heading)])
    return evader_pos[None, :] + speed * np.asarray(times)[:, None] * direction[None, :]


def single_pursuer_objective(
    bundle: PredictionBundle, evader_path: np.ndarray
) -> tuple[float, float]:
    """Terminal squared distance between predicted pursuer and evader positions.

    Returns (g, dg/du) with the derivative taken through the terminal
    sensitivity of the pursuer prediction.
    """
    evader_path = np.asarray(evader_path, dtype=float)
    if evader_path.shape[0] != bundle.times.shape[0]:
        raise ConfigError(
            f"evader path has {evader_path.shape[0]} samples, "
            f"prediction has {bundle.times.shape[0]}"
        )
    diff = bundle.xi[-1, :2] - evader_path[-1]
    gval = float(diff @ diff)
    dg = float(2.0 * diff @ bundle.dxi_du[-1, :2])
    return gval, dg


def cooperative_objective(
    bundle_p1: PredictionBundle,
    bundle_p2: PredictionBundle,
    evader_path: np.ndarray,
    w: ObjectiveWeights,
) -> tuple[float, float, float]:
    """Two-pursuer objective integrated over the shared prediction horizon.

    g = integral of beta1 (d1^2 + d2^2) + beta2 d1^2 d2^2 / (d1^2 + d2^2)
        + beta3 exp(-gamma_repel * d_p) dtau

    evaluated by trapezoidal quadrature on the bundles' common grid, where d_i
    is the distance of predicted pursuer i to the predicted evader and d_p the
    predicted pursuer separation. Returns (g, dg/du1, dg/du2); each gradient
    is chained through that pursuer's own sensitivity only (the evader path is
    treated as independent of the inputs).
    """
    times = bundle_p1.times
    if bundle_p2.times.shape != times.shape or not np.array_equal(bundle_p2.times, times):
        raise ConfigError("prediction bundles use different time grids")
    evader_path = np.asarray(evader_path, dtype=float)
    if evader_path.shape != (times.shape[0], 2):
        raise ConfigError(
            f"evader path shape {evader_path.shape} does not match grid of "
            f"{times.shape[0]} samples"
        )

    p1 = bundle_p1.xi[:, :2]
    p2 = bundle_p2.xi[:, :2]
    r1 = p1 - evader_path
    r2 = p2 - evader_path
    d1s = np.einsum("ij,ij->i", r1, r1)
    d2s = np.einsum("ij,ij->i", r2, r2)
    total = d1s + d2s
    safe_total = np.where(total > 0.0, total, 1.0)
    ratio = np.where(total > 0.0, d1s * d2s / safe_total, 0.0)
    sep = p1 - p2
    dp = np.sqrt(np.einsum("ij,ij->i", sep, sep))
    repulsion = w.beta3 * np.exp(-w.gamma_repel * dp)

    integrand = w.beta1 * total + w.beta2 * ratio + repulsion
    gval = float(np.trapezoid(integrand, times))

    # d(ratio)/d(d1^2) = d2^4 / total^2 and symmetrically for d2^2.
    q1 = np.where(total > 0.0, d1s / safe_total, 0.0)
    q2 = np.where(total > 0.0, d2s / safe_total, 0.0)
    coef1 = 2.0 * w.beta1 + 2.0 * w.beta2 * q2 * q2
    coef2 = 2.0 * w.beta1 + 2.0 * w.beta2 * q1 * q1
    safe_dp = np.where(dp > 0.0, dp, 1.0)
    rep_grad = np.where(dp > 0.0, w.gamma_repel * repulsion / safe_dp, 0.0)

    dF_dp1 = coef1[:, None] * r1 - rep_grad[:, None] * sep
    dF_dp2 = coef2[:, None] * r2 + rep_grad[:, None] * sep
    dF_du1 = np.einsum("ij,ij->i", dF_dp1, bundle_p1.dxi_du[:, :2])
    dF_du2 = np.einsum("ij,ij->i", dF_dp2, bundle_p2.dxi_du[:, :2])
    dg_du1 = float(np.trapezoid(dF_du1, times))
    dg_du2 = float(np.trapezoid(dF_du2, times))
    return gval, dg_du1, dg_du2
