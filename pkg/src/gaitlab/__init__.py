"""Linear walking models, event-based and time-projection control."""

from .errors import (
    ConfigError,
    DareConvergenceError,
    GaitlabError,
    InfeasibleGaitError,
    ModelConstructionError,
    NumericalError,
    ProjectionSingularError,
)
from .lti import PhaseLTI, TransitionSet, expm, propagate, transition
from .models import (
    BodyParams,
    ErrorSystem,
    SymmetryOps,
    build_3lp,
    build_lip,
    build_model,
    error_system,
    symmetry_ops,
)
from .gait import PeriodicGait, periodicity_residual, scale_gait, solve_periodic_gait
from .control import (
    DlqrDesign,
    ScalarDesign,
    design_dlqr,
    gain_to_continuous,
    project_input,
    project_input_unconstrained,
    scalar_design,
    scalar_gain_bounds,
    scalar_projection_feedback,
    solve_dare,
)
from .sim import PushEvent, Scenario, TrajectoryLog, run_walk, speed_track

__version__ = "0.1.0"
