import math

import numpy as np
import pytest

from nrpursuit.controller import PredictionBundle, predict_with_sensitivity
from nrpursuit.dynamics import DubinsState, EvaderParams, PursuerParams
from nrpursuit.errors import ConfigError
from nrpursuit.game import (
    GOAL_SEEK,
    RADIAL_FLEE,
    TANGENTIAL_ESCAPE,
    ObjectiveWeights,
    accumulate_cost,
    cooperative_objective,
    evasion_heading,
    predict_evader_path,
    single_pursuer_objective,
    stage_cost,
)


def static_bundle(pos, times):
    """A bundle for an agent that does not move and ignores its input."""
    k = len(times)
    xi = np.tile([pos[0], pos[1], 0.0], (k, 1))
    return PredictionBundle(times=np.asarray(times, dtype=float), xi=xi, dxi_du=np.zeros((k, 3)))


class TestEvasionHeading:
    def setup_method(self):
        self.evader = EvaderParams(speed=1.0, goal=np.array([150.0, 60.0]), evade_radius_scale=3.0)

    def test_radial_flee_diagonal(self):
        pursuers = [DubinsState(np.array([0.0, 0.0]), 2.2)]
        d = evasion_heading(np.array([1.0, 1.0]), pursuers, [1.0], self.evader)
        assert d.branch == RADIAL_FLEE
        assert d.heading == pytest.approx(math.pi / 4)

    def test_tangential_escape_tie_break(self):
        pursuers = [DubinsState(np.array([0.0, 0.0]), 0.0)]
        d = evasion_heading(np.array([0.5, 0.0]), pursuers, [1.0], self.evader)
        assert d.branch == TANGENTIAL_ESCAPE
        # radial angle 0; pursuer heading is collinear, tie resolves to +pi/2
        assert d.heading == pytest.approx(math.pi / 2)

    def test_tangential_sign_follows_cross_product(self):
        pursuers = [DubinsState(np.array([0.0, 0.0]), math.pi / 2)]
        d = evasion_heading(np.array([0.5, 0.0]), pursuers, [1.0], self.evader)
        # pursuer heading +y, evader on +x: cross < 0 picks the -pi/2 side
        assert d.branch == TANGENTIAL_ESCAPE
        assert d.heading == pytest.approx(-math.pi / 2)

    def test_goal_seek_when_far(self):
        pursuers = [DubinsState(np.array([0.0, 0.0]), 0.0)]
        pos = np.array([10.0, 5.0])
        d = evasion_heading(pos, pursuers, [1.0], self.evader)
        assert d.branch == GOAL_SEEK
        assert d.heading == pytest.approx(math.atan2(60.0 - 5.0, 150.0 - 10.0))

    def test_degenerate_coincident_positions(self):
        pursuers = [DubinsState(np.array([2.0, 3.0]), 1.0)]
        d = evasion_heading(np.array([2.0, 3.0]), pursuers, [1.0], self.evader)
        assert d.branch == GOAL_SEEK

    def test_closest_pursuer_rule(self):
        pursuers = [
            DubinsState(np.array([10.0, 0.0]), 0.0),
            DubinsState(np.array([-1.5, 0.0]), 0.0),
        ]
        d = evasion_heading(np.array([0.0, 0.0]), pursuers, [1.0, 1.0], self.evader)
        # closest is the second pursuer, radial direction points +x
        assert d.branch == RADIAL_FLEE
        assert d.heading == pytest.approx(0.0)

    def test_no_goal_variant_never_goal_seeks(self):
        pursuers = [DubinsState(np.array([0.0, 0.0]), 0.0)]
        d = evasion_heading(
            np.array([50.0, 0.0]), pursuers, [1.0], self.evader, goal_seek=False
        )
        assert d.branch == RADIAL_FLEE

    def test_branch_boundaries_by_bisection(self):
        radius = 1.3
        rho = self.evader.evade_radius_scale * radius
        direction = np.array([math.cos(0.7), math.sin(0.7)])
        pursuers = [DubinsState(np.array([0.0, 0.0]), 0.0)]

        def branch_at(d):
            return evasion_heading(d * direction, pursuers, [radius], self.evader).branch

        def locate_switch(lo, hi):
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                if branch_at(mid) == branch_at(lo):
                    lo = mid
                else:
                    hi = mid
            return 0.5 * (lo + hi)

        assert abs(locate_switch(0.5, 2.0) - radius) <= 1e-9
        assert abs(locate_switch(2.0, 5.0) - rho) <= 1e-9


class TestStageCost:
    def test_zero_distances(self):
        w = ObjectiveWeights(beta1=1.0, beta2=1.0, beta3=0.0, gamma=0.1)
        assert stage_cost(0.0, 0.0, w) == 0.0

    def test_pythagorean(self):
        w = ObjectiveWeights(beta1=1.0, beta2=0.0, beta3=0.0, gamma=0.1)
        assert stage_cost(3.0, 4.0, w) == 25.0

    def test_with_cooperation_term(self):
        w = ObjectiveWeights(beta1=1.0, beta2=2.0, beta3=0.0, gamma=0.1)
        assert stage_cost(1.0, 1.0, w) == pytest.approx(3.0)

    def test_symmetry(self):
        w = ObjectiveWeights(beta1=0.7, beta2=1.3, beta3=0.0, gamma=0.1)
        rng = np.random.default_rng(0)
        for _ in range(100):
            d1, d2 = rng.uniform(0, 30, 2)
            assert stage_cost(d1, d2, w) == pytest.approx(stage_cost(d2, d1, w), rel=1e-14)

    def test_positive_when_apart(self):
        w = ObjectiveWeights(beta1=0.5, beta2=0.0, beta3=0.0, gamma=0.1)
        rng = np.random.default_rng(1)
        for _ in range(100):
            d1, d2 = rng.uniform(0, 10, 2)
            if d1 + d2 > 0:
                assert stage_cost(d1, d2, w) > 0.0


class TestAccumulateCost:
    def test_zero_stage_keeps_cost(self):
        assert accumulate_cost(4.2, 0.0, 3.0, 0.01, 0.1) == 4.2

    def test_undiscounted_rectangle_rule(self):
        cost = 0.0
        dt = 0.01
        for k in range(1000):
            cost = accumulate_cost(cost, 1.0, k * dt, dt, 0.0)
        assert abs(cost - 10.0) <= dt

    def test_discounted_analytic_integral(self):
        gamma, dt = 0.1, 0.01
        cost = 0.0
        for k in range(10000):
            cost = accumulate_cost(cost, 1.0, k * dt, dt, gamma)
        exact = (1.0 - math.exp(-10.0)) / gamma
        assert abs(cost - exact) <= 0.01

    def test_monotone_for_nonnegative_stage(self):
        rng = np.random.default_rng(2)
        cost = 0.0
        for k in range(500):
            new = accumulate_cost(cost, float(rng.uniform(0, 5)), k * 0.01, 0.01, 0.3)
            assert new >= cost
            cost = new


class TestPredictEvaderPath:
    def test_eastbound_displacement(self):
        times = np.linspace(0, 2.0, 21)
        path = predict_evader_path(np.array([1.0, 1.0]), 0.0, 1.0, times)
        assert np.allclose(path[-1], [3.0, 1.0])

    def test_northbound_displacement(self):
        times = np.linspace(0, 1.0, 11)
        path = predict_evader_path(np.array([0.0, 0.0]), math.pi / 2, 1.5, times)
        assert np.allclose(path[-1], [0.0, 1.5], atol=1e-12)

    def test_zero_speed_constant(self):
        times = np.linspace(0, 1.0, 11)
        path = predict_evader_path(np.array([2.0, -1.0]), 0.9, 0.0, times)
        assert np.all(path == path[0])


class TestSinglePursuerObjective:
    def test_coincident_endpoints(self):
        times = np.linspace(0, 1, 11)
        bundle = static_bundle([1.0, 2.0], times)
        path = np.tile([1.0, 2.0], (11, 1))
        gval, dg = single_pursuer_objective(bundle, path)
        assert gval == 0.0
        assert dg == 0.0

    def test_three_four_five(self):
        times = np.linspace(0, 1, 11)
        bundle = static_bundle([0.0, 0.0], times)
        path = np.tile([3.0, 4.0], (11, 1))
        gval, _ = single_pursuer_objective(bundle, path)
        assert gval == 25.0

    def test_gradient_vs_finite_difference(self):
        rng = np.random.default_rng(4)
        params = PursuerParams(speed=2.0, u_max=3.0)
        du = 1e-5
        for _ in range(50):
            state = DubinsState(rng.uniform(-10, 10, 2), rng.uniform(-3, 3))
            u = rng.uniform(-2, 2)
            horizon = rng.uniform(0.3, 1.5)
            b = predict_with_sensitivity(state, u, horizon, params, 40)
            path = predict_evader_path(
                rng.uniform(-10, 10, 2), rng.uniform(-3, 3), 1.0, b.times
            )
            _, dg = single_pursuer_objective(b, path)
            gp, _ = single_pursuer_objective(
                predict_with_sensitivity(state, u + du, horizon, params, 40), path
            )
            gm, _ = single_pursuer_objective(
                predict_with_sensitivity(state, u - du, horizon, params, 40), path
            )
            fd = (gp - gm) / (2 * du)
            assert abs(dg - fd) <= 1e-4 * max(1.0, abs(fd))

    def test_grid_mismatch_rejected(self):
        bundle = static_bundle([0.0, 0.0], np.linspace(0, 1, 11))
        with pytest.raises(ConfigError):
            single_pursuer_objective(bundle, np.zeros((5, 2)))


class TestCooperativeObjective:
    def test_zero_weights(self):
        w = ObjectiveWeights(beta1=0.0, beta2=0.0, beta3=0.0, gamma=0.1)
        times = np.linspace(0, 1, 11)
        g, dg1, dg2 = cooperative_objective(
            static_bundle([0, 0], times),
            static_bundle([5, 0], times),
            np.tile([2.0, 0.0], (11, 1)),
            w,
        )
        assert g == 0.0 and dg1 == 0.0 and dg2 == 0.0

    def test_static_agents_constant_integrand(self):
        # d1 = 1 and d2 = 2 held over a unit horizon integrates to 5.
        w = ObjectiveWeights(beta1=1.0, beta2=0.0, beta3=0.0, gamma=0.1)
        times = np.linspace(0, 1, 51)
        g, _, _ = cooperative_objective(
            static_bundle([1, 0], times),
            static_bundle([0, 2], times),
            np.tile([0.0, 0.0], (51, 1)),
            w,
        )
        assert g == pytest.approx(5.0, rel=1e-12)

    def test_gradients_vs_finite_difference_randomized(self):
        rng = np.random.default_rng(9)
        du = 1e-5
        for _ in range(100):
            w = ObjectiveWeights(
                beta1=rng.uniform(0, 2),
                beta2=rng.uniform(0, 2),
                beta3=rng.uniform(0, 20),
                gamma=rng.uniform(0.05, 0.5),
                gamma_repel=rng.uniform(0.1, 1.0),
            )
            params = [
                PursuerParams(speed=rng.uniform(0.5, 3), u_max=4.0) for _ in range(2)
            ]
            states = [
                DubinsState(rng.uniform(-10, 10, 2), rng.uniform(-3, 3)) for _ in range(2)
            ]
            us = rng.uniform(-2, 2, 2)
            horizon = rng.uniform(0.3, 1.5)
            bundles = [
                predict_with_sensitivity(states[i], us[i], horizon, params[i], 30)
                for i in range(2)
            ]
            path = predict_evader_path(
                rng.uniform(-10, 10, 2), rng.uniform(-3, 3), 1.0, bundles[0].times
            )
            _, dg1, dg2 = cooperative_objective(bundles[0], bundles[1], path, w)
            for i, dg in enumerate((dg1, dg2)):
                bp = predict_with_sensitivity(states[i], us[i] + du, horizon, params[i], 30)
                bm = predict_with_sensitivity(states[i], us[i] - du, horizon, params[i], 30)
                pair_p = [bp if j == i else bundles[j] for j in range(2)]
                pair_m = [bm if j == i else bundles[j] for j in range(2)]
                gp, _, _ = cooperative_objective(pair_p[0], pair_p[1], path, w)
                gm, _, _ = cooperative_objective(pair_m[0], pair_m[1], path, w)
                fd = (gp - gm) / (2 * du)
                assert abs(dg - fd) <= 1e-4 * max(1.0, abs(fd), abs(dg))

    def test_repulsion_decreases_with_separation(self):
        w = ObjectiveWeights(beta1=0.0, beta2=0.0, beta3=5.0, gamma=0.1, gamma_repel=0.4)
        times = np.linspace(0, 1, 21)
        path = np.tile([0.0, 0.0], (21, 1))

        def g_at(phi):
            # d1 and d2 stay fixed while the pursuer separation varies with phi
            p1 = [math.cos(phi), math.sin(phi)]
            p2 = [2 * math.cos(phi), -2 * math.sin(phi)]
            g, _, _ = cooperative_objective(
                static_bundle(p1, times), static_bundle(p2, times), path, w
            )
            return g

        values = [g_at(phi) for phi in np.linspace(0.1, math.pi / 2, 8)]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_grid_mismatch_rejected(self):
        w = ObjectiveWeights()
        a = static_bundle([0, 0], np.linspace(0, 1, 11))
        b = static_bundle([1, 0], np.linspace(0, 2, 11))
        with pytest.raises(ConfigError):
            cooperative_objective(a, b, np.zeros((11, 2)), w)


class TestObjectiveWeights:
    def test_gamma_split_defaults(self):
        w = ObjectiveWeights(beta1=1, beta2=1, beta3=1, gamma=0.2)
        assert w.gamma_cost == 0.2
        assert w.gamma_repel == 0.2

    def test_gamma_overrides(self):
        w = ObjectiveWeights(beta1=1, beta2=1, beta3=1, gamma=0.2, gamma_repel=0.5)
        assert w.gamma_cost == 0.2
        assert w.gamma_repel == 0.5

    def test_negative_weight_rejected(self):
        with pytest.raises(ConfigError):
            ObjectiveWeights(beta1=-1.0)
