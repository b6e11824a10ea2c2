"""Closed-loop scenario execution: control, learning, integration, tracing.

Four scenario modes are supported:

* ``agnostic_tracking``: one pursuer chases a known reference path (piecewise
  semicircular arcs); the target does not react.
* ``single_pursuer_adversarial``: one pursuer against the game-theoretic
  evader; the pursuer predicts the evader with the no-goal evasion model.
* ``multi_pursuer_model_based``: two pursuers sharing the cooperative
  objective, again predicting the evader with the no-goal evasion model.
* ``multi_pursuer_learning``: as above, but the evasion direction estimate
  comes from a network trained online on windowed observations.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .controller import (
    ControllerConfig,
    ControllerState,
    predict_with_sensitivity,
    saturate,
    scalar_objective_udot,
)
from .dynamics import DubinsState, EvaderParams, as_vec2, rk4_step
from .errors import ConfigError, IntegrationError, TrainingError
from .game import (
    ObjectiveWeights,
    cooperative_objective,
    evasion_heading,
    predict_evader_path,
    single_pursuer_objective,
    stage_cost,
)
from .learning import (
    TrainingBuffer,
    TrainingConfig,
    backprop_update,
    ingest_observation,
    init_network,
    predict_evader_heading,
)

MODE_AGNOSTIC = "agnostic_tracking"
MODE_SINGLE = "single_pursuer_adversarial"
MODE_MULTI = "multi_pursuer_model_based"
MODE_LEARNING = "multi_pursuer_learning"
MODES = (MODE_AGNOSTIC, MODE_SINGLE, MODE_MULTI, MODE_LEARNING)

ADVERSARIAL_MODES = (MODE_SINGLE, MODE_MULTI, MODE_LEARNING)


@dataclass
class ReferencePath:
    """Constant-speed path made of semicircular arcs, then a straight run-out."""

    start: np.ndarray  # [m]
    heading: float  # initial tangent direction [rad]
    radii: tuple  # arc radii [m], one semicircle each
    turns: tuple  # +1 counterclockwise, -1 clockwise, per arc
    speed: float  # traversal speed [m/s]

    def __post_init__(self):
        self.start = as_vec2(self.start)
        self.radii = tuple(float(r) for r in self.radii)
        self.turns = tuple(int(s) for s in self.turns)
        if len(self.radii) != len(self.turns):
            raise ConfigError("radii and turns must have the same length")
        if any(r <= 0 for r in self.radii):
            raise ConfigError("arc radii must be positive")
        if any(s not in (-1, 1) for s in self.turns):
            raise ConfigError("turns must be +1 or -1")
        if not self.speed > 0:
            raise ConfigError(f"reference speed must be positive, got {self.speed}")


def _arc_state(p0, h, radius, turn, phi):
    """Point and tangent after sweeping angle phi along one arc."""
    cx = p0[0] - radius * turn * math.sin(h)
    cy = p0[1] + radius * turn * math.cos(h)
    a0 = math.atan2(p0[1] - cy, p0[0] - cx)
    a = a0 + turn * phi
    return (
        np.array([cx + radius * math.cos(a), cy + radius * math.sin(a)]),
        h + turn * phi,
    )


def _reference_state(path: ReferencePath, t: float) -> tuple[np.ndarray, float]:
    s = path.speed * t
    p = path.start
    h = path.heading
    for radius, turn in zip(path.radii, path.turns):
        length = math.pi * radius
        if s <= length:
            return _arc_state(p, h, radius, turn, s / radius)
        p, h = _arc_state(p, h, radius, turn, math.pi)
        s -= length
    return p + s * np.array([math.cos(h), math.sin(h)]), h


def reference_trajectory(path: ReferencePath, t: float) -> np.ndarray:
    """Target position at time t; continues straight past the last arc."""
    return _reference_state(path, t)[0]


def reference_heading(path: ReferencePath, t: float) -> float:
    """Tangent direction of the reference at time t [rad]."""
    return _reference_state(path, t)[1]


@dataclass
class ScenarioConfig:
    mode: str
    pursuers: list  # PursuerParams per pursuer
    initial_pursuers: list  # DubinsState per pursuer
    duration: float  # [s], >= 0
    dt: float = 0.01  # [s]
    evader: Optional[EvaderParams] = None
    initial_evader: Optional[np.ndarray] = None
    controller: ControllerConfig = field(default_factory=ControllerConfig)
    weights: ObjectiveWeights = field(default_factory=ObjectiveWeights)
    training: Optional[TrainingConfig] = None
    reference: Optional[ReferencePath] = None
    seed: int = 0
    name: str = "scenario"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(
                f"unknown mode {self.mode!r}; valid modes: {', '.join(MODES)}"
            )
        if not self.duration >= 0:
            raise ConfigError(f"duration must be >= 0, got {self.duration}")
        if not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        n = len(self.pursuers)
        if n != len(self.initial_pursuers):
            raise ConfigError("pursuers and initial_pursuers must align")
        if self.mode == MODE_AGNOSTIC:
            if n != 1:
                raise ConfigError("agnostic_tracking runs exactly one pursuer")
            if self.reference is None:
                raise ConfigError("agnostic_tracking requires a reference path")
            if self.reference.speed >= min(p.speed for p in self.pursuers):
                raise ConfigError("reference speed must be below the pursuer speed")
        else:
            if self.evader is None or self.initial_evader is None:
                raise ConfigError(f"{self.mode} requires evader parameters and start")
            self.initial_evader = as_vec2(self.initial_evader)
            if self.mode == MODE_SINGLE and n != 1:
                raise ConfigError("single_pursuer_adversarial runs exactly one pursuer")
            if self.mode in (MODE_MULTI, MODE_LEARNING) and n != 2:
                raise ConfigError(
                    f"{self.mode} runs exactly two pursuers (got {n}); the "
                    "cooperative objective is defined pairwise"
                )
        if self.mode == MODE_LEARNING and self.training is None:
            self.training = TrainingConfig()
        if self.seed < 0:
            raise ConfigError(f"seed must be non-negative, got {self.seed}")

    @property
    def n_pursuers(self) -> int:
        return len(self.pursuers)

    @property
    def capture_threshold(self) -> float:
        """Capture distance: twice the largest (slowest) turning radius [m]."""
        return 2.0 * max(p.turning_radius for p in self.pursuers)


@dataclass
class SimTrace:
    """Per-step record of a scenario run. All arrays share the time axis."""

    t: np.ndarray  # (K+1,)
    pursuer_x: np.ndarray  # (K+1, N)
    pursuer_y: np.ndarray
    pursuer_heading: np.ndarray
    pursuer_u: np.ndarray
    evader: np.ndarray  # (K+1, 2)
    distances: np.ndarray  # (K+1, N)
    separation: np.ndarray  # (K+1,), nan for N=1
    objective: np.ndarray  # (K+1,)
    cost: np.ndarray  # (K+1,)
    evader_heading: np.ndarray  # (K+1,)
    predicted_heading: np.ndarray  # (K+1,), nan when no estimate exists
    nn_loss: np.ndarray  # (K+1,), nan outside learning mode / before training
    mode: str = MODE_SINGLE
    capture_threshold: float = 0.0

    @property
    def n_pursuers(self) -> int:
        return self.pursuer_x.shape[1]

    def column_names(self) -> list[str]:
        names = ["t"]
        for i in range(self.n_pursuers):
            names += [f"p{i+1}_x", f"p{i+1}_y", f"p{i+1}_heading", f"p{i+1}_u"]
        names += ["e_x", "e_y"]
        names += [f"d{i+1}" for i in range(self.n_pursuers)]
        names += ["d_p", "objective", "cost", "evader_heading", "predicted_heading", "nn_loss"]
        return names

    def columns(self) -> list[np.ndarray]:
        cols = [self.t]
        for i in range(self.n_pursuers):
            cols += [
                self.pursuer_x[:, i],
                self.pursuer_y[:, i],
                self.pursuer_heading[:, i],
                self.pursuer_u[:, i],
            ]
        cols += [self.evader[:, 0], self.evader[:, 1]]
        cols += [self.distances[:, i] for i in range(self.n_pursuers)]
        cols += [
            self.separation,
            self.objective,
            self.cost,
            self.evader_heading,
            self.predicted_heading,
            self.nn_loss,
        ]
        return cols

    def tracking_error(self) -> np.ndarray:
        """Distance to the nearest pursuer at each step."""
        return self.distances.min(axis=1)


@dataclass
class SummaryMetrics:
    capture_time: float  # first local minimum of the tracking error below threshold [s]
    post_capture_peak_error: float  # [m]
    post_capture_mean_error: float  # [m]
    post_capture_mean_distances: tuple  # per-pursuer mean d_i after capture [m]
    final_cost: float  # discounted cost at the end of the run
    heading_rms: float  # angular RMS of the evasion estimate [rad], nan if unavailable

    def as_dict(self) -> dict:
        return {
            "capture_time": self.capture_time,
            "post_capture_peak_error": self.post_capture_peak_error,
            "post_capture_mean_error": self.post_capture_mean_error,
            **{
                f"post_capture_mean_d{i+1}": v
                for i, v in enumerate(self.post_capture_mean_distances)
            },
            "final_cost": self.final_cost,
            "heading_rms": self.heading_rms,
        }


def _global_derivative_flat(vec, u, evader_heading, speeds, evader_speed):
    """Stacked derivative on a flat state vector; mirrors dynamics.global_derivative."""
    out = np.empty_like(vec)
    for i, v in enumerate(speeds):
        th = vec[3 * i + 2]
        out[3 * i] = v * math.cos(th)
        out[3 * i + 1] = v * math.sin(th)
        out[3 * i + 2] = u[i]
    out[-2] = evader_speed * math.cos(evader_heading)
    out[-1] = evader_speed * math.sin(evader_heading)
    return out


def compute_summary(trace: SimTrace, capture_threshold: Optional[float] = None) -> SummaryMetrics:
    """Distill a trace into capture-segmented metrics.

    Capture is the first local minimum of the tracking error that lies below
    the threshold (endpoints count as local minima). Post-capture metrics are
    nan if capture never happens.
    """
    if trace.t.shape[0] == 0:
        raise ConfigError("empty trace")
    threshold = trace.capture_threshold if capture_threshold is None else capture_threshold
    err = trace.tracking_error()
    n = err.shape[0]
    capture_idx = None
    for i in range(n):
        if err[i] >= threshold:
            continue
        left_ok = i == 0 or err[i] <= err[i - 1]
        right_ok = i == n - 1 or err[i] <= err[i + 1]
        if left_ok and right_ok:
            capture_idx = i
            break
    nan = float("nan")
    if capture_idx is None:
        capture_time = nan
        peak = nan
        mean = nan
        per_pursuer = tuple(nan for _ in range(trace.n_pursuers))
    else:
        capture_time = float(trace.t[capture_idx])
        post = err[capture_idx:]
        peak = float(post.max())
        mean = float(post.mean())
        per_pursuer = tuple(
            float(trace.distances[capture_idx:, i].mean()) for i in range(trace.n_pursuers)
        )

    valid = np.isfinite(trace.predicted_heading) & np.isfinite(trace.evader_heading)
    if valid.any():
        diff = trace.predicted_heading[valid] - trace.evader_heading[valid]
        wrapped = np.arctan2(np.sin(diff), np.cos(diff))
        heading_rms = float(np.sqrt(np.mean(wrapped * wrapped)))
    else:
        heading_rms = nan

    return SummaryMetrics(
        capture_time=capture_time,
        post_capture_peak_error=peak,
        post_capture_mean_error=mean,
        post_capture_mean_distances=per_pursuer,
        final_cost=float(trace.cost[-1]),
        heading_rms=heading_rms,
    )


def run_scenario(cfg: ScenarioConfig) -> tuple[SimTrace, SummaryMetrics]:
    """Execute one closed-loop scenario.

    Per step: (1) measure relative positions; (2) evaluate the evader's true
    heading and the pursuers' estimate of it (switching model or network);
    (3) extrapolate the evader over the look-ahead horizon; (4) propagate each
    pursuer's prediction with its input held, including input sensitivity;
    (5) evaluate the pursuit objective and its per-input derivatives;
    (6) advance each turn-rate command along the Newton flow and saturate;
    (7) integrate the true dynamics; (8) in learning mode, buffer the observed
    evasion direction and retrain on schedule; (9) record the trace row.
    Deterministic for a fixed config and seed.

    Raises:
        IntegrationError: on non-finite states; carries the step index and a
            partial trace in its ``trace`` attribute.
    """
    n = cfg.n_pursuers
    steps = int(round(cfg.duration / cfg.dt))
    dt = cfg.dt
    ctrl = cfg.controller
    horizon = ctrl.horizon
    substeps = ctrl.prediction_substeps
    agnostic = cfg.mode == MODE_AGNOSTIC
    learning = cfg.mode == MODE_LEARNING

    pursuers = [s.copy() for s in cfg.initial_pursuers]
    if agnostic:
        evader_pos = reference_trajectory(cfg.reference, 0.0)
        evader_speed = cfg.reference.speed
    else:
        evader_pos = cfg.initial_evader.copy()
        evader_speed = cfg.evader.speed
    radii = [p.turning_radius for p in cfg.pursuers]
    control = ControllerState(np.zeros(n))

    net = None
    buffer = None
    sample_every = retrain_every = 0
    prev_estimate = 0.0
    latest_loss = float("nan")
    if learning:
        tc = cfg.training
        net = init_network([2 * n, *tc.hidden_sizes, 2], seed=cfg.seed)
        buffer = TrainingBuffer(capacity=tc.buffer_capacity)
        sample_every = max(1, int(round(tc.sample_interval / dt)))
        retrain_every = max(1, int(round(tc.retrain_interval / dt)))

    size = steps + 1
    nanv = float("nan")
    tr = SimTrace(
        t=np.empty(size),
        pursuer_x=np.empty((size, n)),
        pursuer_y=np.empty((size, n)),
        pursuer_heading=np.empty((size, n)),
        pursuer_u=np.empty((size, n)),
        evader=np.empty((size, 2)),
        distances=np.empty((size, n)),
        separation=np.full(size, nanv),
        objective=np.empty(size),
        cost=np.empty(size),
        evader_heading=np.empty(size),
        predicted_heading=np.full(size, nanv),
        nn_loss=np.full(size, nanv),
        mode=cfg.mode,
        capture_threshold=cfg.capture_threshold,
    )

    cost = 0.0
    speeds = [p.speed for p in cfg.pursuers]

    for k in range(size):
        t = k * dt

        # (1) geometry
        deltas = [evader_pos - p.pos for p in pursuers]
        dists = [float(np.hypot(dx[0], dx[1])) for dx in deltas]
        chi = np.concatenate(deltas) if learning else None

        # (2) true and estimated evasion headings
        if agnostic:
            true_heading = reference_heading(cfg.reference, t)
            est_heading = None
        else:
            true_heading = evasion_heading(
                evader_pos, pursuers, radii, cfg.evader, goal_seek=True
            ).heading
            if learning:
                est_heading = predict_evader_heading(net, chi, prev_estimate)
                prev_estimate = est_heading
            else:
                est_heading = evasion_heading(
                    evader_pos, pursuers, radii, cfg.evader, goal_seek=False
                ).heading

        # (3) + (4) predictions
        bundles = [
            predict_with_sensitivity(
                pursuers[i], float(control.u[i]), horizon, cfg.pursuers[i], substeps
            )
            for i in range(n)
        ]
        if agnostic:
            grid = bundles[0].times
            target_path = np.array(
                [reference_trajectory(cfg.reference, t + float(tau)) for tau in grid]
            )
        else:
            target_path = predict_evader_path(
                evader_pos, est_heading, evader_speed, bundles[0].times
            )

        # (5) objective and derivatives
        if n == 1:
            gval, dg = single_pursuer_objective(bundles[0], target_path)
            dgs = [dg]
        else:
            gval, dg1, dg2 = cooperative_objective(
                bundles[0], bundles[1], target_path, cfg.weights
            )
            dgs = [dg1, dg2]

        # (9) record the row for time t
        tr.t[k] = t
        for i in range(n):
            tr.pursuer_x[k, i] = pursuers[i].pos[0]
            tr.pursuer_y[k, i] = pursuers[i].pos[1]
            tr.pursuer_heading[k, i] = pursuers[i].heading
            tr.pursuer_u[k, i] = control.u[i]
            tr.distances[k, i] = dists[i]
        tr.evader[k] = evader_pos
        if n == 2:
            sep = pursuers[0].pos - pursuers[1].pos
            tr.separation[k] = float(np.hypot(sep[0], sep[1]))
        tr.objective[k] = gval
        tr.cost[k] = cost
        tr.evader_heading[k] = true_heading
        if est_heading is not None:
            tr.predicted_heading[k] = est_heading
        tr.nn_loss[k] = latest_loss

        if k == steps:
            break

        # (6) Newton flow on the turn-rate commands
        for i in range(n):
            udot = scalar_objective_udot(gval, dgs[i], ctrl.alpha, ctrl.jac_epsilon)
            control.u[i] = saturate(
                float(control.u[i]) + dt * udot, cfg.pursuers[i].u_max
            )

        # (7) true dynamics, with the updated commands held over the step
        prev_evader = evader_pos
        try:
            if agnostic:
                for i in range(n):
                    v = cfg.pursuers[i].speed
                    ui = float(control.u[i])

                    def f(z, v=v, ui=ui):
                        return np.array(
                            [v * math.cos(z[2]), v * math.sin(z[2]), ui]
                        )

                    z = rk4_step(
                        f,
                        np.array([*pursuers[i].pos, pursuers[i].heading]),
                        dt,
                        t=t,
                    )
                    pursuers[i] = DubinsState(z[:2], float(z[2]))
                evader_pos = reference_trajectory(cfg.reference, t + dt)
            else:
                vec = np.empty(3 * n + 2)
                for i in range(n):
                    vec[3 * i : 3 * i + 2] = pursuers[i].pos
                    vec[3 * i + 2] = pursuers[i].heading
                vec[-2:] = evader_pos

                def f(z):
                    return _global_derivative_flat(
                        z, control.u, true_heading, speeds, evader_speed
                    )

                vec = rk4_step(f, vec, dt, t=t)
                pursuers = [
                    DubinsState(vec[3 * i : 3 * i + 2].copy(), float(vec[3 * i + 2]))
                    for i in range(n)
                ]
                evader_pos = vec[-2:].copy()
        except IntegrationError as exc:
            exc.step = k
            exc.trace = _partial(tr, k + 1)
            raise

        # (8) cost and learning bookkeeping
        if n == 2:
            stage = stage_cost(dists[0], dists[1], cfg.weights)
        else:
            stage = cfg.weights.beta1 * dists[0] * dists[0]
        cost = cost + math.exp(-cfg.weights.gamma_cost * t) * stage * dt

        if learning:
            if k % sample_every == 0:
                ingest_observation(buffer, chi, (evader_pos - prev_evader) / dt)
            if (k + 1) % retrain_every == 0 and len(buffer) > 0:
                try:
                    latest_loss = backprop_update(net, buffer, cfg.training)
                except TrainingError as exc:
                    warnings.warn(f"step {k}: {exc}; keeping previous weights")

    return tr, compute_summary(tr)


def _partial(tr: SimTrace, rows: int) -> SimTrace:
    return SimTrace(
        t=tr.t[:rows],
        pursuer_x=tr.pursuer_x[:rows],
        pursuer_y=tr.pursuer_y[:rows],
        pursuer_heading=tr.pursuer_heading[:rows],
        pursuer_u=tr.pursuer_u[:rows],
        evader=tr.evader[:rows],
        distances=tr.distances[:rows],
        separation=tr.separation[:rows],
        objective=tr.objective[:rows],
        cost=tr.cost[:rows],
        evader_heading=tr.evader_heading[:rows],
        predicted_heading=tr.predicted_heading[:rows],
        nn_loss=tr.nn_loss[:rows],
        mode=tr.mode,
        capture_threshold=tr.capture_threshold,
    )
