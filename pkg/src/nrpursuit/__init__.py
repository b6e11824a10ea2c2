"""Predictive Newton-flow pursuit of evading targets with Dubins vehicles.

The package provides the continuous dynamics, the predictive Newton-flow
controllers, the game-theoretic evasion law and pursuit objectives, an online
evader-policy learner, and a deterministic scenario runner with CSV tracing.
"""

from .controller import (
    ControllerConfig,
    ControllerState,
    PredictionBundle,
    ReferenceSignal,
    memoryless_udot,
    predict_with_sensitivity,
    saturate,
    scalar_objective_udot,
    simulate_memoryless_tracking,
)
from .dynamics import (
    DubinsState,
    EvaderParams,
    GlobalState,
    PursuerParams,
    dubins_derivative,
    evader_derivative,
    global_derivative,
    rk4_step,
    wrap_angle,
)
from .errors import (
    ConfigError,
    DomainError,
    IntegrationError,
    SingularJacobianError,
    TrainingError,
)
from .game import (
    GOAL_SEEK,
    RADIAL_FLEE,
    TANGENTIAL_ESCAPE,
    EvasionDecision,
    ObjectiveWeights,
    accumulate_cost,
    cooperative_objective,
    evasion_heading,
    predict_evader_path,
    single_pursuer_objective,
    stage_cost,
)
from .learning import (
    MlpNetwork,
    TrainingBuffer,
    TrainingConfig,
    backprop_update,
    ingest_observation,
    init_network,
    load_weights,
    loss_and_gradients,
    mlp_forward,
    predict_evader_heading,
    save_weights,
    window_loss,
)
from .sim import (
    MODE_AGNOSTIC,
    MODE_LEARNING,
    MODE_MULTI,
    MODE_SINGLE,
    MODES,
    ReferencePath,
    ScenarioConfig,
    SimTrace,
    SummaryMetrics,
    compute_summary,
    reference_heading,
    reference_trajectory,
    run_scenario,
)

__version__ = "0.1.0"
