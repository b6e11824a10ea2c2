"""Ready-made scenario configurations for the four standard studies.

The controller gains, horizons, objective weights, and initial geometry below
were tuned empirically: the agnostic pair reproduces the 4:1 post-capture
error ratio between loose and tight turning, the adversarial runs keep the
peak error between two and three turning radii, and the two-pursuer weights
produce the alternating (anti-phase) harassment pattern.
"""

from __future__ import annotations

import math

import numpy as np

from .controller import ControllerConfig
from .dynamics import DubinsState, EvaderParams, PursuerParams
from .game import ObjectiveWeights
from .learning import TrainingConfig
from .sim import (
    MODE_AGNOSTIC,
    MODE_LEARNING,
    MODE_MULTI,
    MODE_SINGLE,
    ReferencePath,
    ScenarioConfig,
)


def agnostic_scenario(
    u_max: float = math.pi / 2, duration: float = 80.0, seed: int = 0
) -> ScenarioConfig:
    """One pursuer tracking an S-shaped reference of two semicircles.

    The pursuer runs at 2 m/s, the target at 1 m/s, so the pursuer overshoots
    after catching up and loops back on its turning radius. Run once with
    u_max = pi/2 and once with 2*pi to compare loose against tight turning;
    the post-capture peak errors scale with the turning radius.

    The short 0.3 s horizon matters for the tight vehicle: with a longer
    horizon the held-input prediction wraps past half a turn and the Newton
    flow flips the turn direction every step instead of committing to the
    turn-around loop.
    """
    return ScenarioConfig(
        name=f"agnostic_umax_{u_max:.3f}",
        mode=MODE_AGNOSTIC,
        pursuers=[PursuerParams(speed=2.0, u_max=u_max)],
        initial_pursuers=[DubinsState(np.array([0.0, 0.0]), 0.0)],
        duration=duration,
        dt=0.01,
        controller=ControllerConfig(alpha=20.0, horizon=0.3),
        weights=ObjectiveWeights(beta1=1.0, beta2=0.0, beta3=0.0, gamma=0.1),
        reference=ReferencePath(
            start=np.array([10.0, 0.0]),
            heading=0.5 * math.pi,
            radii=(12.0, 12.0),
            turns=(1, -1),
            speed=1.0,
        ),
        seed=seed,
    )


def single_adversarial_scenario(duration: float = 120.0, seed: int = 0) -> ScenarioConfig:
    """One pursuer against the game-theoretic evader heading for (150, 60).

    The evader runs for its goal until the pursuer gets close, then dodges
    into the pursuer's non-holonomic disc, forcing a turn-around loop; the
    tracking error oscillates with a peak a bit above twice the turning
    radius.
    """
    return ScenarioConfig(
        name="single_adversarial",
        mode=MODE_SINGLE,
        pursuers=[PursuerParams(speed=2.0, u_max=1.0)],
        initial_pursuers=[DubinsState(np.array([0.0, 0.0]), 0.0)],
        duration=duration,
        dt=0.01,
        evader=EvaderParams(
            speed=0.8, goal=np.array([150.0, 60.0]), evade_radius_scale=3.0
        ),
        initial_evader=np.array([20.0, 0.0]),
        controller=ControllerConfig(alpha=10.0, horizon=1.0),
        weights=ObjectiveWeights(beta1=1.0, beta2=0.0, beta3=0.0, gamma=0.1),
        seed=seed,
    )


def two_pursuer_scenario(
    learning: bool = False, duration: float = 120.0, seed: int = 0
) -> ScenarioConfig:
    """Two cooperating pursuers trapping the evader away from its goal (15, -1).

    The strong, slowly decaying repulsion keeps the pursuers on opposite
    sides of the evader, which then shuttles between them: one distance peaks
    while the other bottoms out, giving the negative d1/d2 correlation. The
    evader starts more than 20 m from its goal and never gets near it.
    """
    return ScenarioConfig(
        name="two_pursuer_learning" if learning else "two_pursuer_model_based",
        mode=MODE_LEARNING if learning else MODE_MULTI,
        pursuers=[
            PursuerParams(speed=2.0, u_max=1.0),
            PursuerParams(speed=2.0, u_max=1.0),
        ],
        initial_pursuers=[
            DubinsState(np.array([0.0, 6.0]), 0.0),
            DubinsState(np.array([-8.0, -4.0]), 0.3),
        ],
        duration=duration,
        dt=0.01,
        evader=EvaderParams(
            speed=0.8, goal=np.array([15.0, -1.0]), evade_radius_scale=3.0
        ),
        initial_evader=np.array([35.0, 10.0]),
        controller=ControllerConfig(alpha=10.0, horizon=1.0),
        weights=ObjectiveWeights(
            beta1=1.0, beta2=1.0, beta3=100.0, gamma=0.1, gamma_repel=0.2
        ),
        training=TrainingConfig() if learning else None,
        seed=seed,
    )
