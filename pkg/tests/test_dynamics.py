import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from eulerfit.dynamics import (
    EQUILIBRIUM_RESIDUAL_TOL,
    Equilibrium,
    FhnParams,
    State,
    equilibrium,
    fhn_field,
    fhn_rhs,
    nullclines,
)
from eulerfit.rng import Rng

# root of (0.8/3)u^3 + 0.2u + 0.7 from the bisection oracle below
UE_DEFAULT = -1.199408035244035
VE_DEFAULT = -0.6242600440550439

valid_a = st.floats(min_value=0.01, max_value=0.99)
valid_b = st.floats(min_value=0.01, max_value=5.0)
valid_c = st.floats(min_value=0.05, max_value=5.0)
small_u = st.floats(min_value=-3.0, max_value=3.0)


def bisect_equilibrium_u(a: float, b: float, iters: int = 200) -> float:
    """Independent oracle: plain bisection on (a/3)u^3 + (1-a)u + b = 0."""
    def f(u):
        return (a / 3.0) * u ** 3 + (1.0 - a) * u + b

    lo, hi = -10.0, 10.0
    assert f(lo) < 0.0 < f(hi)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if f(mid) == 0.0:
            return mid
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# --- parameter and state validation -----------------------------------------

@pytest.mark.parametrize("kw", [
    dict(a=0.0), dict(a=1.0), dict(a=1.5), dict(a=-0.3), dict(a=float("nan")),
    dict(b=0.0), dict(b=-1.0), dict(c=0.0), dict(c=-2.0), dict(c=float("inf")),
])
def test_params_reject_out_of_range(kw):
    with pytest.raises(ValueError):
        FhnParams(**kw)


def test_params_constraint_named_in_message():
    with pytest.raises(ValueError, match="0 < a < 1"):
        FhnParams(a=1.5)


def test_params_validation_bypass():
    p = FhnParams(a=0.8, b=0.0, c=3.0, validate=False)
    assert p.b == 0.0


def test_state_rejects_non_finite():
    with pytest.raises(ValueError):
        State(float("nan"), 0.0)
    with pytest.raises(ValueError):
        State(0.0, float("inf"))


def test_equilibrium_type_rejects_bad_residual():
    with pytest.raises(ValueError):
        Equilibrium(0.0, 0.0, 1e-9)


# --- vector field ------------------------------------------------------------

@given(small_u, valid_a, valid_b, valid_c)
def test_rhs_vanishes_on_cubic_nullcline(u, a, b, c):
    p = FhnParams(a, b, c)
    s = State(u, u - u ** 3 / 3.0)
    assert fhn_rhs(s, p).u == 0.0


def test_rhs_hand_values():
    p = FhnParams(a=0.8, b=0.7, c=3.0)
    at_origin = fhn_rhs(State(0.0, 0.0), p)
    assert at_origin.u == 0.0
    assert at_origin.v == pytest.approx(2.1, rel=1e-12)
    at_one = fhn_rhs(State(1.0, 0.0), p)
    assert at_one.u == pytest.approx(2.0 / 9.0, rel=1e-12)
    assert at_one.v == pytest.approx(5.1, rel=1e-12)


@given(small_u, small_u, valid_a, valid_b, valid_c)
def test_rhs_matches_field_closure(u, v, a, b, c):
    p = FhnParams(a, b, c)
    d = fhn_rhs(State(u, v), p)
    y = fhn_field(p)(np.array([u, v]), 0.0)
    assert d.u == y[0] and d.v == y[1]


@given(small_u, small_u, valid_b, valid_a, valid_c)
def test_rhs_odd_under_state_and_b_flip(u, v, b, a, c):
    pos = FhnParams(a, b, c, validate=False)
    neg = FhnParams(a, -b, c, validate=False)
    d_pos = fhn_rhs(State(u, v), pos)
    d_neg = fhn_rhs(State(-u, -v), neg)
    assert d_neg.u == -d_pos.u
    assert d_neg.v == -d_pos.v


# --- equilibrium -------------------------------------------------------------

def test_equilibrium_matches_bisection_oracle():
    p = FhnParams()
    eq = equilibrium(p)
    u_oracle = bisect_equilibrium_u(p.a, p.b)
    assert eq.u_e == pytest.approx(u_oracle, abs=1e-8)
    assert eq.v_e == pytest.approx((u_oracle + p.b) / p.a, abs=1e-8)
    assert eq.u_e == pytest.approx(UE_DEFAULT, abs=1e-12)
    assert eq.v_e == pytest.approx(VE_DEFAULT, abs=1e-12)
    assert eq.residual_norm <= EQUILIBRIUM_RESIDUAL_TOL


def test_equilibrium_is_a_rest_point():
    p = FhnParams()
    eq = equilibrium(p)
    rhs = fhn_rhs(State(eq.u_e, eq.v_e), p)
    assert max(abs(rhs.u), abs(rhs.v)) <= 1e-10


def test_equilibrium_at_origin_when_b_zero():
    p = FhnParams(a=0.8, b=0.0, c=3.0, validate=False)
    eq = equilibrium(p)
    assert abs(eq.u_e) <= 1e-12
    assert abs(eq.v_e) <= 1e-12


def test_equilibrium_residual_for_100_random_parameter_sets():
    rng = Rng(1234)
    for _ in range(100):
        p = FhnParams(a=rng.uniform_in(0.01, 0.99), b=rng.uniform_in(0.01, 5.0),
                      c=rng.uniform_in(0.05, 5.0))
        assert equilibrium(p).residual_norm <= 1e-10


def test_equilibrium_bracket_expands_for_large_b():
    # root sits far outside the starting [-10, 10] bracket
    p = FhnParams(a=0.5, b=400.0, c=1.0)
    eq = equilibrium(p)
    assert eq.u_e < -10.0
    assert eq.residual_norm <= 1e-10


# --- nullclines --------------------------------------------------------------

def test_nullclines_at_simple_points():
    p = FhnParams()
    cubic, linear = nullclines(p, [0.0])
    assert cubic[0] == 0.0
    assert linear[0] == pytest.approx(p.b / p.a, rel=1e-15)
    cubic, _ = nullclines(p, [math.sqrt(3.0)])
    assert abs(cubic[0]) <= 1e-15


def test_nullclines_lengths_match_grid():
    p = FhnParams()
    grid = np.linspace(-2.0, 2.0, 17)
    cubic, linear = nullclines(p, grid)
    assert cubic.shape == linear.shape == grid.shape


def test_nullclines_cross_at_default_equilibrium():
    cubic, linear = nullclines(FhnParams(), [UE_DEFAULT])
    assert cubic[0] == pytest.approx(VE_DEFAULT, abs=1e-6)
    assert linear[0] == pytest.approx(VE_DEFAULT, abs=1e-6)


@given(valid_a, valid_b, valid_c)
def test_nullclines_agree_at_equilibrium(a, b, c):
    p = FhnParams(a, b, c)
    eq = equilibrium(p)
    cubic, linear = nullclines(p, [eq.u_e])
    assert abs(cubic[0] - linear[0]) <= 1e-8


def test_nullclines_reject_bad_grids():
    p = FhnParams()
    with pytest.raises(ValueError):
        nullclines(p, [])
    with pytest.raises(ValueError):
        nullclines(p, [0.0, float("nan")])
