"""Regularized online learning in vector-valued RKHS with exact-expectation oracles."""

from .engine import (
    IterateState,
    Sample,
    Schedule,
    finite_horizon_mu,
    finite_horizon_schedule,
    geometric_checkpoints,
    online_step,
    online_step_dual,
    run,
    run_dual,
    run_trials,
    schedule_params,
    theorem1_schedule,
)
from .errors import (
    ConfigError,
    ConsistencyError,
    DomainError,
    FitError,
    HorizonExceededError,
    ParameterError,
    RepresentationError,
)
from .harness import (
    NoiseModel,
    ProblemInstance,
    draw_sample,
    finite_horizon_bound,
    fit_rate,
    make_bridge_problem,
    make_cons_problem,
    monte_carlo_error,
    noise_variance,
    refined_bound,
    refined_bound_s1,
    theorem1_bound,
    theorem1_constant,
    theorem1_constant_from_norms,
)
from .hilbert import (
    BrownianBridge,
    ConsMap,
    DualVector,
    Eigensystem,
    MultiplicativeKernel,
    SpectralVector,
    apply_feature,
    covariance_apply,
    eval_feature_adjoint,
    kernel_eval,
    smoothness_norm,
    smoothness_norm_sq,
    to_spectral,
    uniform_bound,
)
from .oracle import (
    ConsProblemSpec,
    MomentState,
    cons_moment_step,
    cons_oracle_curve,
    expected_trajectory_closed_form,
    expected_trajectory,
    pi_product,
    s_sum,
    theorem2_rate,
    theorem2_t,
    theorem3_probe,
    weighted_error,
)

__version__ = "0.1.0"
