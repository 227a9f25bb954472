"""Learn ODE right-hand sides from sampled trajectories.

A feedforward network is trained so that one forward-Euler step with its
output reproduces each consecutive pair of samples; the learned field is then
validated by numerical rollout against held-out truth.
"""

from .dynamics import (
    ConvergenceError,
    Equilibrium,
    FhnParams,
    State,
    equilibrium,
    fhn_field,
    fhn_rhs,
    nullclines,
)
from .integrate import (
    IntegrationError,
    NoiseSpec,
    Trajectory,
    add_noise,
    read_trajectory_csv,
    simulate,
    step_euler,
    step_rk4,
    write_trajectory_csv,
)
from .learner import (
    DivergenceError,
    EvalReport,
    TrainConfig,
    TrainReport,
    euler_residual_loss,
    eval_mse,
    rollout,
    train,
)
from .neural import (
    AdamState,
    Gradients,
    Mlp,
    adam_init,
    adam_step,
    load_model,
    mlp_backward,
    mlp_forward,
    mlp_init,
    parameter_count,
    save_model,
)

__version__ = "0.1.0"
