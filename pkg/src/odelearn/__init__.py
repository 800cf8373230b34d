"""Continuous-time supervised learning with neural ODEs.

Direct-shooting training of stacked sample flows, exact horizon rescaling,
depth-growing schedules, long-horizon structure diagnostics, constructive
simultaneous steering, and variable-width space-time discretizations.
"""

from .activations import IDENTITY, RELU, SIGMOID, TANH, Activation, leaky_relu
from .controllability import (
    LowerBound,
    RankDeficiencyError,
    SteeringResult,
    least_norm_solve,
    steer_linear_arc,
    weight_lower_bound,
)
from .dynamics import (
    BOTTLENECK,
    SIGMA_INSIDE,
    SIGMA_OUTSIDE,
    ControlPath,
    DivergenceError,
    GronwallViolation,
    StackedTrajectory,
    gronwall_bound,
    integrate_forward,
    random_control,
    vector_field,
)
from .greedy import (
    GreedyResult,
    WindowedResult,
    greedy_pretrain,
    grow_depth,
    resample_uniform,
    windowed_turnpike_train,
)
from .scaling import is_homogeneous, rescale_control, scaled_cost_identity
from .spacetime import (
    KernelPath,
    SpaceGrid,
    build_projection,
    dirac_fixed_grid_equivalence,
    integrate_nonlocal,
    nonlocal_step,
    quadrature_weights,
    uniform_grid,
)
from .training import (
    ConstraintViolation,
    CostGradient,
    FunctionalSpec,
    Projector,
    TrainReport,
    adam_train,
    cost,
    cost_parts,
    grad,
    l1_norm,
    project_ball,
    reg_norm,
    training_error,
)
from .turnpike import (
    TurnpikeReport,
    bangbang_profile,
    compress_control,
    final_time_gap,
    turnpike_fit,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
