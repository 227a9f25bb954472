"""Acceptance gate: one test per criterion, each at its stated tolerance.

The pipeline criteria drive the real CLI end to end (sweep / generate / train
/ eval) at fixed budgets: 2000 full-batch epochs at lr=1e-3 for the accuracy
grids, 4000 for the sampling-step study.  Heavy studies run once in
module-scoped fixtures; the determinism criterion repeats the identical
invocations and compares artifacts byte for byte (the sweep CSV's wall-clock
column is masked, timing being measurement rather than computation).

Each test prints a `criterion N: PASS/FAIL` line (visible with -s).
"""

import math
import statistics

import numpy as np
import pytest

from eulerfit.cli import main
from eulerfit.integrate import (
    Trajectory,
    read_trajectory_csv,
    simulate,
    step_euler,
    step_rk4,
)
from eulerfit.learner import euler_residual_loss, eval_mse
from eulerfit.neural import mlp_backward, mlp_forward, mlp_init
from eulerfit.dynamics import FhnParams, State, equilibrium, fhn_rhs
from eulerfit.rng import Rng
from oracles import fd_input_gradient, fd_param_gradients, max_relative_error

BASE_SEED = 0
SEEDS = 3
TABLE_EPOCHS = 2000
DT_EPOCHS = 4000
WIDTHS = (32, 64, 128, 256)
DEPTHS = (1, 2, 3)
DT_VALUES = (0.01, 0.025, 0.05)
NOISE_LEVELS = (0.0, 0.02, 0.05)


def _ok(rc: int) -> None:
    assert rc == 0, f"CLI exited with {rc}"


def _report(criterion: str, ok: bool, detail: str) -> None:
    print(f"criterion {criterion}: {'PASS' if ok else 'FAIL'} — {detail}")


def _parse_sweep(path):
    lines = path.read_text().splitlines()
    assert lines[0] == "width,depth,dt,noise,seed,mse_u,mse_v,final_loss,seconds"
    rows = []
    for line in lines[1:]:
        w, d, dt, noise, seed, mse_u, mse_v, final_loss, seconds = line.split(",")
        rows.append(dict(width=int(w), depth=int(d), dt=float(dt),
                         noise=float(noise), seed=int(seed), mse_u=float(mse_u),
                         mse_v=float(mse_v), final_loss=float(final_loss),
                         seconds=float(seconds)))
    return rows


def _median_mse_u(rows, **match):
    picked = [r["mse_u"] for r in rows
              if all(r[k] == v for k, v in match.items())]
    assert len(picked) == SEEDS, f"expected {SEEDS} runs for {match}"
    return statistics.median(picked)


def _mask_seconds(path) -> str:
    return "\n".join(",".join(line.split(",")[:8])
                     for line in path.read_text().splitlines())


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    return tmp_path_factory.mktemp("acceptance")


def _table1_args(out):
    return ["sweep", "--widths", ",".join(map(str, WIDTHS)),
            "--depths", ",".join(map(str, DEPTHS)), "--dts", "0.01",
            "--noises", "0", "--seeds", str(SEEDS), "--seed", str(BASE_SEED),
            "--t-final", "20", "--epochs", str(TABLE_EPOCHS), "--out", str(out)]


def _noise_args(out):
    return ["sweep", "--widths", "64", "--depths", "1", "--dts", "0.01",
            "--noises", ",".join(map(str, NOISE_LEVELS)), "--seeds", str(SEEDS),
            "--seed", str(BASE_SEED), "--t-final", "20",
            "--epochs", str(TABLE_EPOCHS), "--out", str(out)]


def _dt_cell_args(dt, clean, model, log, pred):
    return (["generate", "--dt", str(dt), "--t-final", "20", "--noise", "0",
             "--seed", str(BASE_SEED), "--out", str(clean)],
            ["train", "--data", str(clean), "--width", "64", "--depth", "1",
             "--epochs", str(DT_EPOCHS), "--lr", "0.001",
             "--seed", str(BASE_SEED), "--model-out", str(model),
             "--log-out", str(log)],
            ["eval", "--model", str(model), "--truth", str(clean),
             "--out", str(pred)])


@pytest.fixture(scope="module")
def table1(workdir):
    out = workdir / "table1.csv"
    _ok(main(_table1_args(out)))
    return out


@pytest.fixture(scope="module")
def noise_sweep(workdir):
    out = workdir / "noise.csv"
    _ok(main(_noise_args(out)))
    return out


@pytest.fixture(scope="module")
def dt_study(workdir):
    runs = {}
    for dt in DT_VALUES:
        tag = str(dt).replace(".", "p")
        files = {name: workdir / f"{name}_{tag}.{ext}"
                 for name, ext in (("clean", "csv"), ("model", "txt"),
                                   ("log", "csv"), ("pred", "csv"))}
        for args in _dt_cell_args(dt, files["clean"], files["model"],
                                  files["log"], files["pred"]):
            _ok(main(args))
        losses = [float(line.split(",")[1])
                  for line in files["log"].read_text().splitlines()[1:]]
        ev = eval_mse(read_trajectory_csv(files["pred"]),
                      read_trajectory_csv(files["clean"]))
        runs[dt] = dict(initial=losses[0], final=losses[-1], mse_u=ev.mse_u,
                        files=files)
    return runs


# --- criterion 1: accuracy grid ----------------------------------------------

def test_criterion_1_width_depth_grid(table1):
    rows = _parse_sweep(table1)
    medians = {(w, d): _median_mse_u(rows, width=w, depth=d)
               for w in WIDTHS for d in DEPTHS}
    worst_cell = max(medians, key=medians.get)
    ok = all(m <= 2e-2 for m in medians.values()) and medians[(64, 1)] <= 1e-2
    _report("1 (width x depth grid)", ok,
            f"worst median mse_u {medians[worst_cell]:.2e} at {worst_cell} "
            f"(limit 2e-2); 64x1 {medians[(64, 1)]:.2e} (limit 1e-2)")
    for cell, m in medians.items():
        assert m <= 2e-2, f"cell {cell}: median mse_u {m:.3e} > 2e-2"
    assert medians[(64, 1)] <= 1e-2


# --- criterion 2: width benefit at depth 1 -----------------------------------

def test_criterion_2_width_benefit_at_depth_1(table1):
    rows = _parse_sweep(table1)
    wide = _median_mse_u(rows, width=128, depth=1)
    narrow = _median_mse_u(rows, width=32, depth=1)
    ok = wide <= narrow
    _report("2 (width benefit at depth 1)", ok,
            f"median mse_u width 128 {wide:.2e} <= width 32 {narrow:.2e}")
    assert ok


# --- criterion 3: sampling-step study ----------------------------------------

def test_criterion_3_dt_study(dt_study):
    details = []
    ok = True
    for dt in DT_VALUES:
        run = dt_study[dt]
        reduction = run["initial"] / run["final"]
        ok = ok and reduction >= 1e4 and run["mse_u"] <= 1e-1
        details.append(f"dt={dt}: loss /{reduction:.1e}, mse_u {run['mse_u']:.2e}")
    _report("3 (dt study)", ok, "; ".join(details))
    for dt in DT_VALUES:
        run = dt_study[dt]
        assert run["initial"] / run["final"] >= 1e4, f"dt={dt}: loss fell too little"
        assert run["mse_u"] <= 1e-1, f"dt={dt}: mse_u {run['mse_u']:.3e} > 1e-1"


# --- criterion 4: noise degradation ------------------------------------------

def test_criterion_4_noise_degradation(noise_sweep):
    rows = _parse_sweep(noise_sweep)
    medians = [_median_mse_u(rows, noise=noise) for noise in NOISE_LEVELS]
    increasing = medians[0] < medians[1] < medians[2]
    ratio = medians[2] / medians[0]
    ok = increasing and ratio >= 5.0
    _report("4 (noise degradation)", ok,
            f"median mse_u {medians[0]:.2e} < {medians[1]:.2e} < {medians[2]:.2e}, "
            f"5% / clean ratio {ratio:.1f} (needs >= 5)")
    assert increasing
    assert ratio >= 5.0


# --- criterion 5: gradient exactness -----------------------------------------

def test_criterion_5_gradient_exactness():
    worst = 0.0
    for seed in range(20):
        rng = Rng(1000 + seed)
        depth = 1 + seed % 3
        width = 2 + int(rng.uniform_in(0, 14.999))  # <= 16
        sizes = (2,) + (width,) * depth + (2,)
        net = mlp_init(sizes, seed=seed)
        x = np.array(rng.normals(2))
        upstream = np.array(rng.normals(2))

        grads, gx = mlp_backward(net, x, upstream)
        scalar = lambda cand: float(np.dot(upstream, mlp_forward(cand, x)))
        fd_w, fd_b = fd_param_gradients(scalar, net, h=1e-6)
        worst = max(worst,
                    max_relative_error(grads.weights, fd_w),
                    max_relative_error(grads.biases, fd_b),
                    max_relative_error([gx], [fd_input_gradient(net, x, upstream)]))

    rng = Rng(77)
    traj = Trajectory(0.0, 0.1, np.array(rng.normals(12)).reshape(6, 2))
    net = mlp_init([2, 4, 2], seed=5)
    _, grads = euler_residual_loss(net, traj)
    fd_w, fd_b = fd_param_gradients(lambda c: euler_residual_loss(c, traj)[0],
                                    net, h=1e-6)
    worst = max(worst, max_relative_error(grads.weights, fd_w),
                max_relative_error(grads.biases, fd_b))

    ok = worst <= 1e-5
    _report("5 (gradient exactness)", ok,
            f"max relative error vs central differences {worst:.2e} (limit 1e-5)")
    assert ok


# --- criterion 6: integrator orders ------------------------------------------

def test_criterion_6_integrator_orders():
    decay = lambda y, t: -y

    def global_error(step, dt):
        traj = simulate(decay, [1.0], 0.0, dt, round(1.0 / dt), substeps=1, step=step)
        return abs(traj.states[-1, 0] - math.exp(-1.0))

    euler_ratio = global_error(step_euler, 0.1) / global_error(step_euler, 0.05)
    rk4_ratio = global_error(step_rk4, 0.1) / global_error(step_rk4, 0.05)
    ok = 1.5 <= euler_ratio <= 3.0 and 8.0 <= rk4_ratio <= 32.0
    _report("6 (integrator orders)", ok,
            f"halving-dt error ratios: Euler {euler_ratio:.2f} in [1.5, 3], "
            f"RK4 {rk4_ratio:.2f} in [8, 32]")
    assert 1.5 <= euler_ratio <= 3.0
    assert 8.0 <= rk4_ratio <= 32.0


# --- criterion 7: zero-residual oracle ---------------------------------------

def test_criterion_7_zero_residual_oracle():
    worst = 0.0
    for seed in range(10):
        net = mlp_init([2, 6, 2], seed=seed)
        s = np.array([0.5, -0.5])
        rows = [s]
        for _ in range(20):
            s = s + 0.02 * mlp_forward(net, s)
            rows.append(s)
        loss, _ = euler_residual_loss(net, Trajectory(0.0, 0.02, np.array(rows)))
        worst = max(worst, loss)
    ok = worst <= 1e-18
    _report("7 (zero-residual oracle)", ok,
            f"worst self-rollout loss {worst:.2e} (limit 1e-18)")
    assert ok


# --- criterion 8: equilibrium correctness ------------------------------------

def test_criterion_8_equilibrium_correctness():
    p = FhnParams()

    def gap(u):
        return (p.a / 3.0) * u ** 3 + (1.0 - p.a) * u + p.b

    lo, hi = -10.0, 10.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if gap(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    u_oracle = 0.5 * (lo + hi)
    v_oracle = (u_oracle + p.b) / p.a

    eq = equilibrium(p)
    rhs = fhn_rhs(State(eq.u_e, eq.v_e), p)
    residual = max(abs(rhs.u), abs(rhs.v))
    ok = (abs(eq.u_e - u_oracle) <= 1e-8 and abs(eq.v_e - v_oracle) <= 1e-8
          and residual <= 1e-10)
    _report("8 (equilibrium correctness)", ok,
            f"|u_e - oracle| {abs(eq.u_e - u_oracle):.1e} (limit 1e-8), "
            f"field residual {residual:.1e} (limit 1e-10)")
    assert abs(eq.u_e - u_oracle) <= 1e-8
    assert abs(eq.v_e - v_oracle) <= 1e-8
    assert residual <= 1e-10


# --- criterion 9: determinism ------------------------------------------------

def test_criterion_9_determinism(workdir, table1, noise_sweep, dt_study):
    repeats = []

    table1_again = workdir / "table1_rerun.csv"
    _ok(main(_table1_args(table1_again)))
    repeats.append(("table1 sweep",
                    _mask_seconds(table1) == _mask_seconds(table1_again)))

    noise_again = workdir / "noise_rerun.csv"
    _ok(main(_noise_args(noise_again)))
    repeats.append(("noise sweep",
                    _mask_seconds(noise_sweep) == _mask_seconds(noise_again)))

    for dt in DT_VALUES:
        tag = str(dt).replace(".", "p")
        again = {name: workdir / f"rerun_{name}_{tag}.{ext}"
                 for name, ext in (("clean", "csv"), ("model", "txt"),
                                   ("log", "csv"), ("pred", "csv"))}
        for args in _dt_cell_args(dt, again["clean"], again["model"],
                                  again["log"], again["pred"]):
            _ok(main(args))
        originals = dt_study[dt]["files"]
        for name in ("clean", "model", "log", "pred"):
            repeats.append((f"dt={dt} {name}",
                            originals[name].read_bytes() == again[name].read_bytes()))

    ok = all(same for _, same in repeats)
    failed = [name for name, same in repeats if not same]
    _report("9 (determinism)", ok,
            "all repeated artifacts bit-identical" if ok
            else f"mismatches: {failed}")
    assert ok, f"non-deterministic artifacts: {failed}"
