"""Fixed-step integration, trajectory containers, seeded measurement noise.

Also home of the package-wide text conventions: floats are serialized with 17
significant digits (enough for float64 to round-trip bit-exactly) and CSVs use
LF line endings with no trailing blank line.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .rng import Rng

TRAJECTORY_CSV_HEADER = "t,u,v"


class IntegrationError(RuntimeError):
    """A state left the finite range during integration."""


def format_float(x: float) -> str:
    """17-significant-digit text form; float(format_float(x)) == x for float64."""
    return format(float(x), ".17g")


@dataclass(frozen=True)
class Trajectory:
    """Uniform samples of a d-dimensional state; row i holds the state at t0 + i*dt.

    The state matrix has K+1 rows for K integration steps, so one-step
    residuals over i = 1..K are always well-defined.  Instances are
    immutable: the array is copied in and marked read-only.
    """

    t0: float
    dt: float
    states: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.states, dtype=float)
        if arr.ndim != 2 or arr.shape[0] < 2:
            raise ValueError("states must be a (K+1) x d matrix with K >= 1")
        if not (np.isfinite(self.t0) and np.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"need finite t0 and dt > 0, got t0={self.t0}, dt={self.dt}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("states must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "states", arr)
        object.__setattr__(self, "t0", float(self.t0))
        object.__setattr__(self, "dt", float(self.dt))

    @property
    def num_steps(self) -> int:
        return self.states.shape[0] - 1

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.states.shape[0])


@dataclass(frozen=True)
class NoiseSpec:
    """Noise magnitude as a fraction of each component's spread, plus the seed."""

    level: float
    seed: int

    def __post_init__(self) -> None:
        if not (np.isfinite(self.level) and self.level >= 0.0):
            raise ValueError(f"noise level must be >= 0, got {self.level}")


def step_euler(rhs, y, t: float, dt: float):
    """One forward-Euler update: y + dt * rhs(y, t)."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    # overflow is handled, not a bug: it surfaces as IntegrationError
    with np.errstate(over="ignore", invalid="ignore"):
        y1 = np.asarray(y, dtype=float) + dt * np.asarray(rhs(y, t), dtype=float)
    if not np.all(np.isfinite(y1)):
        raise IntegrationError(f"non-finite state after Euler step at t={t}")
    return y1


def step_rk4(rhs, y, t: float, dt: float):
    """One classical fourth-order Runge-Kutta update."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    y = np.asarray(y, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        k1 = np.asarray(rhs(y, t), dtype=float)
        k2 = np.asarray(rhs(y + 0.5 * dt * k1, t + 0.5 * dt), dtype=float)
        k3 = np.asarray(rhs(y + 0.5 * dt * k2, t + 0.5 * dt), dtype=float)
        k4 = np.asarray(rhs(y + dt * k3, t + dt), dtype=float)
        y1 = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(y1)):
        raise IntegrationError(f"non-finite state after RK4 step at t={t}")
    return y1


def simulate(rhs, s0, t0: float, dt: float, steps: int, substeps: int = 1,
             step=step_rk4) -> Trajectory:
    """Integrate rhs from s0, recording steps+1 states at spacing dt.

    The stepper advances at the finer internal step dt/substeps and every
    substeps-th state is recorded, so ground truth can be generated well below
    the sampling resolution while the returned grid stays uniform.  With
    substeps=1 and step=step_euler the recorded rows are exactly the sequence
    s_{i+1} = s_i + dt*rhs(s_i, t_i), bit for bit.
    """
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    if substeps < 1:
        raise ValueError(f"substeps must be >= 1, got {substeps}")
    y = np.atleast_1d(np.asarray(s0, dtype=float))
    if y.ndim != 1:
        raise ValueError("s0 must be a flat state vector")
    h = dt / substeps
    out = np.empty((steps + 1, y.size), dtype=float)
    out[0] = y
    for i in range(steps):
        t_i = t0 + i * dt
        for j in range(substeps):
            y = step(rhs, y, t_i + j * h, h)
        out[i + 1] = y
    return Trajectory(t0, dt, out)


def add_noise(traj: Trajectory, spec: NoiseSpec) -> Trajectory:
    """Additive Gaussian measurement noise, column-scaled and seeded.

    Component j of every sample gets level * sigma_j * xi with xi ~ N(0, 1)
    and sigma_j the sample standard deviation of column j, so "2% noise"
    perturbs u and v each at 2% of that component's own spread.  Normal draws
    are consumed column by column in row order; the input is not modified.
    """
    rng = Rng(spec.seed)
    states = np.array(traj.states)
    n, d = states.shape
    for j in range(d):
        sigma = float(np.std(states[:, j], ddof=1))
        xi = np.array(rng.normals(n))
        states[:, j] += spec.level * sigma * xi
    return Trajectory(traj.t0, traj.dt, states)


def write_trajectory_csv(traj: Trajectory, path) -> None:
    """Serialize as `t,u,v` rows; LF endings, no trailing blank line."""
    if traj.dim != 2:
        raise ValueError("the trajectory CSV format holds two-component states")
    times = traj.times
    lines = [TRAJECTORY_CSV_HEADER]
    for i in range(traj.states.shape[0]):
        u, v = traj.states[i]
        lines.append(f"{format_float(times[i])},{format_float(u)},{format_float(v)}")
    Path(path).write_bytes(("\n".join(lines) + "\n").encode("ascii"))


def read_trajectory_csv(path) -> Trajectory:
    """Parse a `t,u,v` file back into a Trajectory, checking the grid is uniform."""
    lines = Path(path).read_text(encoding="ascii").splitlines()
    if not lines or lines[0] != TRAJECTORY_CSV_HEADER:
        raise ValueError(f"{path}: expected header '{TRAJECTORY_CSV_HEADER}'")
    rows = [ln.split(",") for ln in lines[1:] if ln]
    if len(rows) < 2:
        raise ValueError(f"{path}: need at least two samples")
    if any(len(r) != 3 for r in rows):
        raise ValueError(f"{path}: every row must have three columns")
    data = np.array([[float(x) for x in r] for r in rows])
    t, states = data[:, 0], data[:, 1:]
    t0, dt = t[0], t[1] - t[0]
    if not dt > 0:
        raise ValueError(f"{path}: time column must be strictly increasing")
    expected = t0 + dt * np.arange(len(t))
    if np.max(np.abs(t - expected)) > 1e-9 * max(1.0, float(np.max(np.abs(t)))):
        raise ValueError(f"{path}: time grid is not uniform")
    return Trajectory(t0, dt, states)
