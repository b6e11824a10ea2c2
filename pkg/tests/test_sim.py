import math

import numpy as np
import pytest

import nrpursuit.sim as sim_mod
from nrpursuit.dynamics import DubinsState, EvaderParams, PursuerParams, global_derivative, GlobalState
from nrpursuit.errors import ConfigError, IntegrationError
from nrpursuit.scenarios import single_adversarial_scenario, two_pursuer_scenario
from nrpursuit.sim import (
    MODE_AGNOSTIC,
    MODE_SINGLE,
    ReferencePath,
    ScenarioConfig,
    SimTrace,
    compute_summary,
    reference_heading,
    reference_trajectory,
    run_scenario,
)
from nrpursuit.sim import _global_derivative_flat


def synthetic_trace(t, min_distance, threshold):
    k = len(t)
    return SimTrace(
        t=np.asarray(t, dtype=float),
        pursuer_x=np.zeros((k, 1)),
        pursuer_y=np.zeros((k, 1)),
        pursuer_heading=np.zeros((k, 1)),
        pursuer_u=np.zeros((k, 1)),
        evader=np.zeros((k, 2)),
        distances=np.asarray(min_distance, dtype=float).reshape(k, 1),
        separation=np.full(k, np.nan),
        objective=np.zeros(k),
        cost=np.zeros(k),
        evader_heading=np.zeros(k),
        predicted_heading=np.full(k, np.nan),
        nn_loss=np.full(k, np.nan),
        mode=MODE_SINGLE,
        capture_threshold=threshold,
    )


def short_scenario(duration=1.0):
    cfg = single_adversarial_scenario(duration=duration)
    return cfg


class TestReferencePath:
    def setup_method(self):
        self.path = ReferencePath(
            start=np.array([10.0, 0.0]),
            heading=0.5 * math.pi,
            radii=(12.0, 12.0),
            turns=(1, -1),
            speed=1.0,
        )

    def test_starts_at_start(self):
        assert np.allclose(reference_trajectory(self.path, 0.0), [10.0, 0.0])

    def test_traversal_rate_matches_speed(self):
        rng = np.random.default_rng(0)
        total = sum(math.pi * r for r in self.path.radii) / self.path.speed
        junctions = [math.pi * self.path.radii[0] / self.path.speed, total]
        h = 1e-6
        for _ in range(200):
            t = float(rng.uniform(h, total + 10.0))
            if any(abs(t - j) < 10 * h for j in junctions):
                continue
            fd = (
                reference_trajectory(self.path, t + h)
                - reference_trajectory(self.path, t - h)
            ) / (2 * h)
            assert np.hypot(fd[0], fd[1]) == pytest.approx(self.path.speed, abs=1e-5)

    def test_junction_continuity(self):
        t_j = math.pi * self.path.radii[0] / self.path.speed
        eps = 1e-9
        before = reference_trajectory(self.path, t_j - eps)
        after = reference_trajectory(self.path, t_j + eps)
        assert np.linalg.norm(after - before) <= 3 * self.path.speed * eps

    def test_straight_runout_after_arcs(self):
        total = sum(math.pi * r for r in self.path.radii) / self.path.speed
        p0 = reference_trajectory(self.path, total)
        p1 = reference_trajectory(self.path, total + 2.0)
        h = reference_heading(self.path, total + 1.0)
        assert np.allclose(p1 - p0, 2.0 * np.array([math.cos(h), math.sin(h)]), atol=1e-12)

    def test_heading_continuous_at_junction(self):
        t_j = math.pi * self.path.radii[0] / self.path.speed
        a = reference_heading(self.path, t_j - 1e-9)
        b = reference_heading(self.path, t_j + 1e-9)
        assert abs(math.sin(a - b)) <= 1e-8

    def test_bad_path_rejected(self):
        with pytest.raises(ConfigError):
            ReferencePath(np.zeros(2), 0.0, (1.0,), (2,), 1.0)
        with pytest.raises(ConfigError):
            ReferencePath(np.zeros(2), 0.0, (-1.0,), (1,), 1.0)
        with pytest.raises(ConfigError):
            ReferencePath(np.zeros(2), 0.0, (1.0, 2.0), (1,), 1.0)


class TestComputeSummary:
    def test_capture_at_start_for_stationary_target(self):
        t = np.arange(0, 1.0, 0.1)
        tr = synthetic_trace(t, np.zeros_like(t), threshold=1.0)
        s = compute_summary(tr)
        assert s.capture_time == 0.0
        assert s.post_capture_peak_error == 0.0

    def test_constant_distance(self):
        t = np.arange(0, 1.0, 0.1)
        tr = synthetic_trace(t, np.full_like(t, 5.0), threshold=6.0)
        s = compute_summary(tr)
        assert s.capture_time == 0.0
        assert s.post_capture_peak_error == 5.0
        assert s.post_capture_mean_error == 5.0

    def test_sinusoidal_distance_analytic_peak(self):
        t = np.arange(0.0, 4 * math.pi, 0.01)
        d = 3.0 + 2.0 * np.sin(t)
        tr = synthetic_trace(t, d, threshold=2.0)
        s = compute_summary(tr)
        # first dip below threshold bottoms out at t = 3*pi/2
        assert s.capture_time == pytest.approx(1.5 * math.pi, abs=0.01)
        assert s.post_capture_peak_error == pytest.approx(5.0, abs=1e-3)

    def test_no_capture_yields_nan(self):
        t = np.arange(0, 1.0, 0.1)
        tr = synthetic_trace(t, np.full_like(t, 5.0), threshold=1.0)
        s = compute_summary(tr)
        assert math.isnan(s.capture_time)
        assert math.isnan(s.post_capture_peak_error)

    def test_capture_threshold_override(self):
        t = np.arange(0, 1.0, 0.1)
        tr = synthetic_trace(t, np.full_like(t, 5.0), threshold=1.0)
        s = compute_summary(tr, capture_threshold=6.0)
        assert s.capture_time == 0.0


class TestRunScenario:
    def test_zero_duration_single_row(self):
        cfg = short_scenario(duration=0.0)
        tr, s = run_scenario(cfg)
        assert tr.t.shape == (1,)
        assert tr.cost[0] == 0.0
        assert tr.distances[0, 0] == pytest.approx(20.0)

    def test_row_count_and_monotone_time(self):
        cfg = short_scenario(duration=2.0)
        tr, _ = run_scenario(cfg)
        assert tr.t.shape[0] == int(round(cfg.duration / cfg.dt)) + 1
        assert np.all(np.diff(tr.t) > 0)

    def test_determinism_bit_identical(self):
        cfg_a = two_pursuer_scenario(learning=True, duration=3.0)
        cfg_b = two_pursuer_scenario(learning=True, duration=3.0)
        tr_a, _ = run_scenario(cfg_a)
        tr_b, _ = run_scenario(cfg_b)
        for col_a, col_b in zip(tr_a.columns(), tr_b.columns()):
            assert np.array_equal(col_a, col_b, equal_nan=True)

    def test_integration_error_carries_partial_trace(self, monkeypatch):
        cfg = short_scenario(duration=1.0)
        real = sim_mod.rk4_step
        calls = {"n": 0}

        def failing(f, x, dt, t=0.0):
            calls["n"] += 1
            if calls["n"] > 30:
                raise IntegrationError("injected failure", t=t)
            return real(f, x, dt, t=t)

        monkeypatch.setattr(sim_mod, "rk4_step", failing)
        with pytest.raises(IntegrationError) as info:
            run_scenario(cfg)
        assert info.value.step == 30
        assert info.value.trace.t.shape[0] == 31

    def test_more_than_two_pursuers_rejected(self):
        with pytest.raises(ConfigError):
            ScenarioConfig(
                mode="multi_pursuer_model_based",
                pursuers=[PursuerParams(2.0, 1.0)] * 3,
                initial_pursuers=[DubinsState(np.zeros(2), 0.0)] * 3,
                duration=1.0,
                evader=EvaderParams(1.0, np.zeros(2)),
                initial_evader=np.array([5.0, 0.0]),
            )

    def test_agnostic_requires_reference(self):
        with pytest.raises(ConfigError):
            ScenarioConfig(
                mode=MODE_AGNOSTIC,
                pursuers=[PursuerParams(2.0, 1.0)],
                initial_pursuers=[DubinsState(np.zeros(2), 0.0)],
                duration=1.0,
            )

    def test_unknown_mode_lists_valid_modes(self):
        with pytest.raises(ConfigError, match="agnostic_tracking"):
            ScenarioConfig(
                mode="warp_drive",
                pursuers=[PursuerParams(2.0, 1.0)],
                initial_pursuers=[DubinsState(np.zeros(2), 0.0)],
                duration=1.0,
            )


class TestTraceInvariants:
    def test_saturation_respected(self, adversarial_run, cooperative_run):
        for run in (adversarial_run, cooperative_run):
            tr, cfg = run["trace"], run["cfg"]
            for i, p in enumerate(cfg.pursuers):
                assert np.all(np.abs(tr.pursuer_u[:, i]) <= p.u_max + 1e-12)

    def test_pursuer_speed_constant(self, adversarial_run):
        tr, cfg = adversarial_run["trace"], adversarial_run["cfg"]
        dx = np.diff(tr.pursuer_x[:, 0])
        dy = np.diff(tr.pursuer_y[:, 0])
        step = np.hypot(dx, dy)
        assert np.all(np.abs(step - cfg.pursuers[0].speed * cfg.dt) <= 1e-6)

    def test_evader_speed_bounded(self, adversarial_run):
        tr, cfg = adversarial_run["trace"], adversarial_run["cfg"]
        step = np.hypot(*np.diff(tr.evader, axis=0).T)
        assert np.all(step <= cfg.evader.speed * cfg.dt + 1e-9)

    def test_learning_trace_has_loss(self, learning_run):
        tr = learning_run["trace"]
        assert np.isfinite(tr.nn_loss[-1])
        assert np.isfinite(tr.predicted_heading[-1])


class TestFlatDerivativeOracle:
    def test_matches_public_global_derivative(self):
        rng = np.random.default_rng(17)
        evader = EvaderParams(speed=1.3, goal=np.array([1.0, 1.0]))
        for _ in range(50):
            n = int(rng.integers(1, 3))
            pursuers = [
                DubinsState(rng.uniform(-5, 5, 2), rng.uniform(-3, 3)) for _ in range(n)
            ]
            params = [PursuerParams(rng.uniform(1, 3), rng.uniform(0.5, 2)) for _ in range(n)]
            u = rng.uniform(-1, 1, n)
            heading = rng.uniform(-3, 3)
            state = GlobalState(pursuers, rng.uniform(-5, 5, 2))
            vec = state.as_vector()
            flat = _global_derivative_flat(
                vec, u, heading, [p.speed for p in params], evader.speed
            )
            ref = global_derivative(state, u, heading, params, evader)
            assert np.array_equal(flat, ref)
