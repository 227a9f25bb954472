"""FitzHugh-Nagumo ground truth: vector field, parameter checks, rest point."""

from __future__ import annotations

import math
from dataclasses import InitVar, dataclass

import numpy as np

DEFAULT_A = 0.8
DEFAULT_B = 0.7
DEFAULT_C = 3.0

EQUILIBRIUM_RESIDUAL_TOL = 1e-10


class ConvergenceError(RuntimeError):
    """Root-finding for the rest point did not converge (degenerate parameters)."""


@dataclass(frozen=True)
class FhnParams:
    """Model constants; the admissible region is 0 < a < 1, b > 0, c > 0.

    Pass validate=False only to probe symmetry properties outside the
    admissible region (e.g. b <= 0); everything downstream assumes a in (0, 1).
    """

    a: float = DEFAULT_A
    b: float = DEFAULT_B
    c: float = DEFAULT_C
    validate: InitVar[bool] = True

    def __post_init__(self, validate: bool) -> None:
        if not validate:
            return
        if not (math.isfinite(self.a) and 0.0 < self.a < 1.0):
            raise ValueError(f"parameter a must satisfy 0 < a < 1, got {self.a}")
        if not (math.isfinite(self.b) and self.b > 0.0):
            raise ValueError(f"parameter b must satisfy b > 0, got {self.b}")
        if not (math.isfinite(self.c) and self.c > 0.0):
            raise ValueError(f"parameter c must satisfy c > 0, got {self.c}")


@dataclass(frozen=True)
class State:
    """A phase-plane point (u, v); also used for the time-derivative pair."""

    u: float
    v: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.u) and math.isfinite(self.v)):
            raise ValueError(f"state components must be finite, got ({self.u}, {self.v})")

    def as_array(self) -> np.ndarray:
        return np.array([self.u, self.v], dtype=float)


@dataclass(frozen=True)
class Equilibrium:
    """The single rest point, with the max-norm of the vector field there."""

    u_e: float
    v_e: float
    residual_norm: float

    def __post_init__(self) -> None:
        if not self.residual_norm <= EQUILIBRIUM_RESIDUAL_TOL:
            raise ValueError(
                f"equilibrium residual {self.residual_norm:.3e} exceeds "
                f"{EQUILIBRIUM_RESIDUAL_TOL:.0e}"
            )


def fhn_rhs(s: State, p: FhnParams) -> State:
    """Time derivatives at s: du/dt = (u - u^3/3 - v)/c, dv/dt = c(u - a*v + b)."""
    du = (s.u - s.u ** 3 / 3.0 - s.v) / p.c
    dv = p.c * (s.u - p.a * s.v + p.b)
    return State(du, dv)


def fhn_field(p: FhnParams):
    """rhs(y, t) closure over p for the integrators, with y = [u, v]."""
    a, b, c = p.a, p.b, p.c

    def rhs(y, t):
        u, v = y[0], y[1]
        return np.array([(u - u ** 3 / 3.0 - v) / c, c * (u - a * v + b)])

    return rhs


def _nullcline_gap(u: float, p: FhnParams) -> float:
    # (a/3)u^3 + (1-a)u + b, the cubic whose root is the rest point; it scales
    # the gap between the two nullclines by -a and is strictly increasing for
    # a in (0, 1), so it has exactly one real root.
    return (p.a / 3.0) * u ** 3 + (1.0 - p.a) * u + p.b


def equilibrium(p: FhnParams, max_newton: int = 16) -> Equilibrium:
    """Rest point where the cubic and linear nullclines cross.

    Substituting the line v = (u + b)/a into u - u^3/3 - v = 0 leaves one
    strictly increasing cubic in u.  Bisection on a bracket (grown from
    [-10, 10] when b is extreme) guarantees convergence; Newton iterations
    polish the root to ~1e-14 so the vector-field residual passes the
    Equilibrium tolerance.
    """
    lo, hi = -10.0, 10.0
    flo, fhi = _nullcline_gap(lo, p), _nullcline_gap(hi, p)
    for _ in range(60):
        if flo <= 0.0 <= fhi:
            break
        lo, hi = 2.0 * lo, 2.0 * hi
        flo, fhi = _nullcline_gap(lo, p), _nullcline_gap(hi, p)
    else:
        raise ConvergenceError("could not bracket the rest point; degenerate parameters")

    u = 0.5 * (lo + hi)
    for _ in range(80):
        u = 0.5 * (lo + hi)
        fu = _nullcline_gap(u, p)
        if fu == 0.0:
            break
        if (fu < 0.0) == (flo < 0.0):
            lo, flo = u, fu
        else:
            hi, fhi = u, fu

    for _ in range(max_newton):
        slope = p.a * u * u + (1.0 - p.a)
        if slope == 0.0:
            break
        step = _nullcline_gap(u, p) / slope
        u -= step
        if abs(step) <= 1e-15 * max(1.0, abs(u)):
            break

    v = (u + p.b) / p.a
    rhs = fhn_rhs(State(u, v), p)
    residual = max(abs(rhs.u), abs(rhs.v))
    if not residual <= EQUILIBRIUM_RESIDUAL_TOL:
        raise ConvergenceError(
            f"rest-point residual {residual:.3e} above {EQUILIBRIUM_RESIDUAL_TOL:.0e}"
        )
    return Equilibrium(u, v, residual)


def nullclines(p: FhnParams, u_grid) -> tuple[np.ndarray, np.ndarray]:
    """Both nullclines evaluated over u_grid.

    Returns (cubic, linear): v = u - u^3/3 where du/dt vanishes and
    v = (u + b)/a where dv/dt vanishes.
    """
    u = np.asarray(u_grid, dtype=float)
    if u.size == 0:
        raise ValueError("u_grid must be nonempty")
    if not np.all(np.isfinite(u)):
        raise ValueError("u_grid must be finite")
    return u - u ** 3 / 3.0, (u + p.b) / p.a
