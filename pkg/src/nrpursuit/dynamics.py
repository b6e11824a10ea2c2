"""Planar pursuit-evasion dynamics and a fixed-step RK4 integrator.

Pursuers are constant-speed Dubins vehicles (planar position plus heading,
turn rate as the single input). The evader is a single integrator that can
point its velocity in any direction instantly. Headings are kept unwrapped
(no mod-2pi) so that sensitivity propagation sees a smooth state; wrap only
when reporting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError, DomainError, IntegrationError


def as_vec2(value) -> np.ndarray:
    """Coerce to a finite (2,) float array."""
    v = np.asarray(value, dtype=float).reshape(2)
    if not np.all(np.isfinite(v)):
        raise DomainError(f"expected finite planar vector, got {value!r}")
    return v


@dataclass
class PursuerParams:
    speed: float  # forward speed V [m/s], > 0
    u_max: float  # turn-rate saturation [rad/s], > 0

    def __post_init__(self):
        if not (math.isfinite(self.speed) and self.speed > 0):
            raise ConfigError(f"pursuer speed must be positive, got {self.speed}")
        if not (math.isfinite(self.u_max) and self.u_max > 0):
            raise ConfigError(f"pursuer u_max must be positive, got {self.u_max}")

    @property
    def turning_radius(self) -> float:
        """Minimum turning radius implied by the saturation, speed / u_max [m]."""
        return self.speed / self.u_max


@dataclass
class EvaderParams:
    speed: float  # [m/s], > 0
    goal: np.ndarray  # goal position [m]
    evade_radius_scale: float = 3.0  # goal seeking shuts off within scale * R_P

    def __post_init__(self):
        if not (math.isfinite(self.speed) and self.speed > 0):
            raise ConfigError(f"evader speed must be positive, got {self.speed}")
        self.goal = as_vec2(self.goal)
        if not (math.isfinite(self.evade_radius_scale) and self.evade_radius_scale > 0):
            raise ConfigError(
                f"evade_radius_scale must be positive, got {self.evade_radius_scale}"
            )


@dataclass
class DubinsState:
    pos: np.ndarray  # [m]
    heading: float  # [rad], unwrapped

    def __post_init__(self):
        self.pos = as_vec2(self.pos)
        if not math.isfinite(self.heading):
            raise DomainError(f"heading must be finite, got {self.heading}")

    def copy(self) -> "DubinsState":
        return DubinsState(self.pos.copy(), self.heading)


@dataclass
class GlobalState:
    """Stacked system state: pursuers first (in order), then the evader."""

    pursuers: list[DubinsState]
    evader_pos: np.ndarray

    def __post_init__(self):
        if len(self.pursuers) < 1:
            raise ConfigError("at least one pursuer required")
        self.evader_pos = as_vec2(self.evader_pos)

    @property
    def n_pursuers(self) -> int:
        return len(self.pursuers)

    def as_vector(self) -> np.ndarray:
        """Flatten to (x1, y1, th1, ..., xN, yN, thN, xe, ye)."""
        out = np.empty(3 * len(self.pursuers) + 2)
        for i, p in enumerate(self.pursuers):
            out[3 * i : 3 * i + 2] = p.pos
            out[3 * i + 2] = p.heading
        out[-2:] = self.evader_pos
        return out

    @classmethod
    def from_vector(cls, vec: np.ndarray, n_pursuers: int) -> "GlobalState":
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (3 * n_pursuers + 2,):
            raise ConfigError(
                f"state vector length {vec.shape} does not match {n_pursuers} pursuers"
            )
        pursuers = [
            DubinsState(vec[3 * i : 3 * i + 2].copy(), float(vec[3 * i + 2]))
            for i in range(n_pursuers)
        ]
        return cls(pursuers, vec[-2:].copy())


def dubins_derivative(state: DubinsState, u: float, params: PursuerParams) -> np.ndarray:
    """Time derivative (dx, dy, dheading) of a Dubins vehicle at turn rate u.

    The caller is responsible for saturating u to [-u_max, u_max].
    """
    if not (np.all(np.isfinite(state.pos)) and math.isfinite(state.heading)):
        raise DomainError(f"non-finite Dubins state {state!r}")
    if not math.isfinite(u):
        raise DomainError(f"non-finite turn rate {u!r}")
    return np.array(
        [
            params.speed * math.cos(state.heading),
            params.speed * math.sin(state.heading),
            u,
        ]
    )


def evader_derivative(heading: float, params: EvaderParams) -> np.ndarray:
    """Planar velocity of the single-integrator evader pointed along `heading`."""
    if not math.isfinite(heading):
        raise DomainError(f"non-finite evader heading {heading!r}")
    return np.array(
        [params.speed * math.cos(heading), params.speed * math.sin(heading)]
    )


def global_derivative(
    state: GlobalState,
    u: Sequence[float],
    evader_heading: float,
    pursuer_params: Sequence[PursuerParams],
    evader_params: EvaderParams,
) -> np.ndarray:
    """Stacked derivative of the full game state, pursuers first, evader last.

    Args:
        state: current global state.
        u: one turn rate per pursuer, already saturated.
        evader_heading: the evader's current velocity direction [rad].
        pursuer_params: per-pursuer parameters, aligned with state.pursuers.
        evader_params: evader parameters.

    Returns:
        Derivative vector of shape (3N + 2,).
    """
    n = state.n_pursuers
    if len(u) != n:
        raise ConfigError(f"expected {n} inputs, got {len(u)}")
    if len(pursuer_params) != n:
        raise ConfigError(f"expected {n} pursuer parameter sets, got {len(pursuer_params)}")
    out = np.empty(3 * n + 2)
    for i in range(n):
        out[3 * i : 3 * i + 3] = dubins_derivative(state.pursuers[i], u[i], pursuer_params[i])
    out[-2:] = evader_derivative(evader_heading, evader_params)
    return out


def rk4_step(
    f: Callable[[np.ndarray], np.ndarray],
    x: np.ndarray,
    dt: float,
    t: float = 0.0,
) -> np.ndarray:
    """One classical 4th-order Runge-Kutta step for an autonomous system.

    Args:
        f: derivative function, x -> dx/dt.
        x: current state vector.
        dt: step size [s], > 0.
        t: current time, used only to time-stamp integration failures.

    Returns:
        The state advanced by dt.
    """
    if not dt > 0:
        raise ConfigError(f"dt must be positive, got {dt}")
    x = np.asarray(x, dtype=float)
    k1 = np.asarray(f(x), dtype=float)
    k2 = np.asarray(f(x + 0.5 * dt * k1), dtype=float)
    k3 = np.asarray(f(x + 0.5 * dt * k2), dtype=float)
    k4 = np.asarray(f(x + dt * k3), dtype=float)
    out = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(out)):
        raise IntegrationError(f"non-finite state after RK4 step at t={t}", t=t)
    return out


def wrap_angle(a: float) -> float:
    """Wrap to (-pi, pi], for reporting only."""
    return math.atan2(math.sin(a), math.cos(a))
