"""One-step Euler-residual training of a network vector field, plus rollout
and evaluation of the learned dynamics against held-out truth."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .integrate import Trajectory, simulate, step_rk4
from .neural import (
    Gradients,
    Mlp,
    adam_init,
    adam_step,
    mlp_backward_cached,
    mlp_forward,
    mlp_forward_cached,
    mlp_init,
)

STOP_LOSS = 1e-10
DEFAULT_EPOCHS = 20000
DEFAULT_LR = 1e-3


class DivergenceError(RuntimeError):
    """Training produced a non-finite loss or parameters."""


@dataclass(frozen=True)
class TrainConfig:
    """One run's axes: sampling grid, architecture, optimizer, noise, seed.

    t_final must be an integer number K >= 1 of dt steps; noise_level is an
    echo of how the training data was produced, not applied here.
    """

    dt: float = 0.01
    width: int = 64
    depth: int = 1
    epochs: int = DEFAULT_EPOCHS
    lr: float = DEFAULT_LR
    noise_level: float = 0.0
    seed: int = 0
    t_final: float = 20.0
    time_input: bool = False

    def __post_init__(self) -> None:
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.width < 1 or self.depth < 1 or self.epochs < 1:
            raise ValueError("width, depth and epochs must all be >= 1")
        if not (math.isfinite(self.lr) and self.lr > 0):
            raise ValueError(f"learning rate must be positive, got {self.lr}")
        if not (math.isfinite(self.noise_level) and self.noise_level >= 0):
            raise ValueError(f"noise level must be >= 0, got {self.noise_level}")
        k = round(self.t_final / self.dt)
        if k < 1 or abs(k * self.dt - self.t_final) > 1e-9 * max(1.0, abs(self.t_final)):
            raise ValueError(
                f"t_final={self.t_final} must be an integer number of dt={self.dt} steps"
            )

    @property
    def num_steps(self) -> int:
        return round(self.t_final / self.dt)

    def layer_sizes(self, dim: int) -> tuple[int, ...]:
        d_in = dim + (1 if self.time_input else 0)
        return (d_in,) + (self.width,) * self.depth + (dim,)


@dataclass(frozen=True)
class TrainReport:
    """loss_history[0] is the untrained loss, loss_history[k] the loss after
    k optimizer updates; net is the network those updates produced."""

    loss_history: list[float]
    net: Mlp
    seconds: float = 0.0

    def __post_init__(self) -> None:
        if not self.loss_history:
            raise ValueError("loss_history must be nonempty")
        if self.loss_history[-1] > self.loss_history[0]:
            raise ValueError("training ended worse than it started")

    @property
    def final_loss(self) -> float:
        return self.loss_history[-1]


@dataclass(frozen=True)
class EvalReport:
    """Per-component rollout MSE, plus the config that produced the run."""

    mse_per_component: np.ndarray
    config: TrainConfig | None = None

    def __post_init__(self) -> None:
        arr = np.asarray(self.mse_per_component, dtype=float)
        if arr.ndim != 1 or not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise ValueError("per-component MSE must be finite and >= 0")
        object.__setattr__(self, "mse_per_component", arr)

    @property
    def mse_u(self) -> float:
        return float(self.mse_per_component[0])

    @property
    def mse_v(self) -> float:
        return float(self.mse_per_component[1])


def _loss_inputs(traj: Trajectory, time_input: bool) -> np.ndarray:
    X = traj.states[:-1]
    if time_input:
        X = np.hstack([X, traj.times[:-1, None]])
    return X


def euler_residual_loss(net: Mlp, traj: Trajectory,
                        time_input: bool = False) -> tuple[float, Gradients]:
    """Mean squared one-step Euler residual with exact parameter gradients.

        loss = (1/K) * sum_{i=0..K-1} || s_i + dt*N(x_i) - s_{i+1} ||^2

    where x_i is the sample s_i (with its time appended when time_input is
    set).  The gradient flows through every residual term in one batched
    backward pass: d loss / d N(x_i) = (2*dt/K) * r_i.
    """
    states = traj.states
    K = states.shape[0] - 1
    X = _loss_inputs(traj, time_input)
    if X.shape[1] != net.d_in or net.d_out != states.shape[1]:
        raise ValueError(
            f"network ({net.d_in}->{net.d_out}) does not match "
            f"{states.shape[1]}-dimensional data (time_input={time_input})"
        )
    # overflow here is handled, not a bug: it surfaces as DivergenceError
    with np.errstate(over="ignore", invalid="ignore"):
        out, acts = mlp_forward_cached(net, X)
        residuals = states[:-1] + traj.dt * out - states[1:]
        loss = float(np.sum(residuals * residuals)) / K
    if not math.isfinite(loss):
        raise DivergenceError("residual loss is non-finite")
    upstream = (2.0 * traj.dt / K) * residuals
    grads, _ = mlp_backward_cached(net, acts, upstream)
    return loss, grads


def train(data: Trajectory, cfg: TrainConfig) -> TrainReport:
    """Full-batch Adam on the Euler-residual loss; deterministic per cfg.

    Runs cfg.epochs updates, stopping early once the loss falls below
    STOP_LOSS.  Raises DivergenceError (naming the epoch) if the loss or the
    parameters ever leave the finite range.
    """
    if not math.isclose(cfg.dt, data.dt, rel_tol=1e-12, abs_tol=0.0):
        raise ValueError(f"config dt={cfg.dt} does not match data dt={data.dt}")
    net = mlp_init(cfg.layer_sizes(data.dim), cfg.seed)
    state = adam_init(net, lr=cfg.lr)
    start = time.perf_counter()
    loss, grads = euler_residual_loss(net, data, cfg.time_input)
    history = [loss]
    for epoch in range(1, cfg.epochs + 1):
        if loss <= STOP_LOSS:
            break
        try:
            net, state = adam_step(net, grads, state)
            loss, grads = euler_residual_loss(net, data, cfg.time_input)
        except (DivergenceError, ValueError) as err:
            raise DivergenceError(f"diverged at epoch {epoch}: {err}") from None
        history.append(loss)
    return TrainReport(history, net, time.perf_counter() - start)


def learned_field(net: Mlp, time_input: bool = False):
    """rhs(y, t) closure evaluating the network as a vector field."""
    if time_input:
        def rhs(y, t):
            return mlp_forward(net, np.append(y, t))
    else:
        def rhs(y, t):
            return mlp_forward(net, y)
    return rhs


def rollout(net: Mlp, s0, dt: float, steps: int, t0: float = 0.0,
            time_input: bool = False) -> Trajectory:
    """Integrate the learned field with RK4 at the sampling step (substeps=1).

    Raises IntegrationError if the learned dynamics blow up mid-rollout.
    """
    s0 = np.asarray(s0, dtype=float)
    expected_in = s0.size + (1 if time_input else 0)
    if net.d_in != expected_in or net.d_out != s0.size:
        raise ValueError(
            f"network ({net.d_in}->{net.d_out}) cannot roll out a "
            f"{s0.size}-dimensional state (time_input={time_input})"
        )
    return simulate(learned_field(net, time_input), s0, t0, dt, steps,
                    substeps=1, step=step_rk4)


def eval_mse(pred: Trajectory, truth: Trajectory,
             config: TrainConfig | None = None) -> EvalReport:
    """Per-component mean squared error over all samples of aligned trajectories."""
    if pred.states.shape != truth.states.shape:
        raise ValueError(
            f"shape mismatch: {pred.states.shape} vs {truth.states.shape}"
        )
    if not (math.isclose(pred.t0, truth.t0, rel_tol=1e-12, abs_tol=1e-12)
            and math.isclose(pred.dt, truth.dt, rel_tol=1e-12, abs_tol=0.0)):
        raise ValueError("time grids differ")
    diff = pred.states - truth.states
    return EvalReport(np.mean(diff * diff, axis=0), config)
