"""Command-line surface tying the pipeline together.

Subcommands: generate | train | eval | sweep | phase.  Every command is
deterministic given its flags; all randomness sits behind explicit --seed.
Exit codes: 0 success, 1 usage error, 2 numeric failure.
"""

from __future__ import annotations

import argparse
import itertools
import math
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dynamics import (
    ConvergenceError,
    FhnParams,
    equilibrium,
    fhn_field,
    nullclines,
)
from .integrate import (
    IntegrationError,
    NoiseSpec,
    Trajectory,
    add_noise,
    format_float,
    read_trajectory_csv,
    simulate,
    write_trajectory_csv,
)
from .learner import (
    DEFAULT_EPOCHS,
    DEFAULT_LR,
    DivergenceError,
    TrainConfig,
    eval_mse,
    rollout,
    train,
)
from .neural import load_model, save_model

SWEEP_CSV_HEADER = "width,depth,dt,noise,seed,mse_u,mse_v,final_loss,seconds"
PHASE_CSV_HEADER = "u,cubic_v,linear_v"


@dataclass(frozen=True)
class SweepSpec:
    """The experiment grid: every combination times seeds_per_cell runs."""

    widths: tuple[int, ...]
    depths: tuple[int, ...]
    dts: tuple[float, ...]
    noise_levels: tuple[float, ...]
    seeds_per_cell: int

    def __post_init__(self) -> None:
        for name in ("widths", "depths", "dts", "noise_levels"):
            if not getattr(self, name):
                raise ValueError(f"{name} must be nonempty")
        if self.seeds_per_cell < 1:
            raise ValueError("seeds_per_cell must be >= 1")

    @property
    def cells(self) -> int:
        return (len(self.widths) * len(self.depths) * len(self.dts)
                * len(self.noise_levels) * self.seeds_per_cell)


@dataclass(frozen=True)
class SweepRow:
    """One run of one cell; nan metric fields mark a failed run."""

    width: int
    depth: int
    dt: float
    noise: float
    seed: int
    mse_u: float
    mse_v: float
    final_loss: float
    seconds: float


def _num_steps(t_final: float, dt: float) -> int:
    k = round(t_final / dt)
    if k < 1 or abs(k * dt - t_final) > 1e-9 * max(1.0, abs(t_final)):
        raise ValueError(f"t-final={t_final} must be an integer number of dt={dt} steps")
    return k


def default_initial_state(params: FhnParams) -> np.ndarray:
    """Mirror image of the rest point; starts well off equilibrium so the
    relaxation oscillation is excited."""
    eq = equilibrium(params)
    return np.array([-eq.u_e, -eq.v_e])


def generate_truth(params: FhnParams, dt: float, t_final: float,
                   substeps: int = 10) -> Trajectory:
    """Ground-truth trajectory from the default initial state."""
    steps = _num_steps(t_final, dt)
    return simulate(fhn_field(params), default_initial_state(params), 0.0, dt,
                    steps, substeps=substeps)


def run_sweep(spec: SweepSpec, params: FhnParams = FhnParams(), *,
              t_final: float = 20.0, epochs: int = DEFAULT_EPOCHS,
              lr: float = DEFAULT_LR, base_seed: int = 0, substeps: int = 10,
              progress=None) -> list[SweepRow]:
    """Train/evaluate every cell of the grid; rows come back in grid order.

    Per-run seeds are base_seed + seed index, so any row is reproducible in
    isolation (a single-cell sweep at that seed, or generate/train/eval with
    the same flags).  Rollout error is always measured against the clean
    trajectory, also when training data is noisy.  Failed runs yield nan
    metrics and the sweep continues.
    """
    clean_cache: dict[float, Trajectory] = {}
    rows: list[SweepRow] = []
    for width, depth, dt, noise in itertools.product(
            spec.widths, spec.depths, spec.dts, spec.noise_levels):
        if dt not in clean_cache:
            clean_cache[dt] = generate_truth(params, dt, t_final, substeps)
        clean = clean_cache[dt]
        for idx in range(spec.seeds_per_cell):
            seed = base_seed + idx
            cfg = TrainConfig(dt=dt, width=width, depth=depth, epochs=epochs,
                              lr=lr, noise_level=noise, seed=seed,
                              t_final=t_final)
            start = time.perf_counter()
            try:
                data = clean if noise == 0 else add_noise(clean, NoiseSpec(noise, seed))
                report = train(data, cfg)
                pred = rollout(report.net, clean.states[0], dt, clean.num_steps,
                               t0=clean.t0)
                ev = eval_mse(pred, clean, cfg)
                row = SweepRow(width, depth, dt, noise, seed, ev.mse_u, ev.mse_v,
                               report.final_loss, time.perf_counter() - start)
            except (DivergenceError, IntegrationError):
                nan = float("nan")
                row = SweepRow(width, depth, dt, noise, seed, nan, nan, nan,
                               time.perf_counter() - start)
            rows.append(row)
            if progress is not None:
                progress(row)
    return rows


def write_sweep_csv(rows: list[SweepRow], path) -> None:
    lines = [SWEEP_CSV_HEADER]
    for r in rows:
        lines.append(",".join([
            str(r.width), str(r.depth), format_float(r.dt), format_float(r.noise),
            str(r.seed), format_float(r.mse_u), format_float(r.mse_v),
            format_float(r.final_loss), format_float(r.seconds),
        ]))
    Path(path).write_bytes(("\n".join(lines) + "\n").encode("ascii"))


def write_phase_csv(params: FhnParams, u_grid, path) -> None:
    """Plot-ready nullcline table with the rest point on a leading comment line."""
    eq = equilibrium(params)
    cubic, linear = nullclines(params, u_grid)
    lines = [
        f"# equilibrium u_e={format_float(eq.u_e)} v_e={format_float(eq.v_e)}",
        PHASE_CSV_HEADER,
    ]
    for u, cv, lv in zip(np.asarray(u_grid, dtype=float), cubic, linear):
        lines.append(f"{format_float(u)},{format_float(cv)},{format_float(lv)}")
    Path(path).write_bytes(("\n".join(lines) + "\n").encode("ascii"))


# ---------------------------------------------------------------------------
# flag plumbing

class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on usage errors; the artifact reserves 2 for
    # numeric failures, so remap through an exception handled in main().
    def error(self, message):
        raise _UsageError(message)


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in text.split(",") if tok.strip())


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in text.split(",") if tok.strip())


def _load_config(path) -> dict[str, str]:
    """Optional key = value file; CLI flags take precedence over its entries."""
    table: dict[str, str] = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line is not 'key = value': {raw!r}")
        key, value = line.split("=", 1)
        table[key.strip().replace("-", "_")] = value.strip()
    return table


class _Options:
    def __init__(self, **kw):
        self.__dict__.update(kw)


def _resolve(args, schema: dict) -> _Options:
    config = _load_config(args.config) if args.config else {}
    unknown = set(config) - set(schema)
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    out = {}
    for name, (cast, default) in schema.items():
        value = getattr(args, name)
        if value is None and name in config:
            value = cast(config[name])
        out[name] = default if value is None else value
    return _Options(**out)


_PARAM_SCHEMA = {
    "a": (float, FhnParams().a),
    "b": (float, FhnParams().b),
    "c": (float, FhnParams().c),
}


def _add_param_flags(sub) -> None:
    sub.add_argument("--a", type=float, help="cubic-nullcline slope parameter (0 < a < 1)")
    sub.add_argument("--b", type=float, help="nullcline offset parameter (b > 0)")
    sub.add_argument("--c", type=float, help="time-scale separation parameter (c > 0)")


def _add_config_flag(sub) -> None:
    sub.add_argument("--config", help="key = value file supplying defaults for any flag")


# ---------------------------------------------------------------------------
# subcommands

_GENERATE_SCHEMA = dict(_PARAM_SCHEMA, **{
    "dt": (float, 0.01),
    "t_final": (float, 20.0),
    "noise": (float, 0.0),
    "seed": (int, 0),
    "substeps": (int, 10),
    "out": (str, "clean.csv"),
    "noisy_out": (str, None),
})


def cmd_generate(args) -> int:
    o = _resolve(args, _GENERATE_SCHEMA)
    params = FhnParams(o.a, o.b, o.c)
    clean = generate_truth(params, o.dt, o.t_final, o.substeps)
    write_trajectory_csv(clean, o.out)
    print(f"wrote {o.out} ({clean.num_steps + 1} samples)")
    if o.noise > 0:
        noisy = add_noise(clean, NoiseSpec(o.noise, o.seed))
        noisy_path = o.noisy_out
        if noisy_path is None:
            stem = Path(o.out)
            noisy_path = str(stem.with_suffix(".noisy" + stem.suffix))
        write_trajectory_csv(noisy, noisy_path)
        print(f"wrote {noisy_path} (noise level {format_float(o.noise)})")
    return 0


_TRAIN_SCHEMA = {
    "data": (str, "clean.csv"),
    "width": (int, 64),
    "depth": (int, 1),
    "epochs": (int, DEFAULT_EPOCHS),
    "lr": (float, DEFAULT_LR),
    "seed": (int, 0),
    "time_input": (_parse_bool, False),
    "model_out": (str, "model.txt"),
    "log_out": (str, "train_log.csv"),
}


def cmd_train(args) -> int:
    o = _resolve(args, _TRAIN_SCHEMA)
    data = read_trajectory_csv(o.data)
    cfg = TrainConfig(dt=data.dt, width=o.width, depth=o.depth, epochs=o.epochs,
                      lr=o.lr, seed=o.seed, t_final=data.dt * data.num_steps,
                      time_input=o.time_input)
    report = train(data, cfg)
    save_model(report.net, o.model_out)
    lines = ["epoch,loss"]
    lines += [f"{i},{format_float(loss)}" for i, loss in enumerate(report.loss_history)]
    Path(o.log_out).write_bytes(("\n".join(lines) + "\n").encode("ascii"))
    print(f"final_loss={format_float(report.final_loss)}")
    return 0


_EVAL_SCHEMA = {
    "model": (str, "model.txt"),
    "truth": (str, "clean.csv"),
    "out": (str, "pred.csv"),
}


def cmd_eval(args) -> int:
    o = _resolve(args, _EVAL_SCHEMA)
    net = load_model(o.model)
    truth = read_trajectory_csv(o.truth)
    time_input = net.d_in == truth.dim + 1
    pred = rollout(net, truth.states[0], truth.dt, truth.num_steps, t0=truth.t0,
                   time_input=time_input)
    write_trajectory_csv(pred, o.out)
    ev = eval_mse(pred, truth)
    print(f"mse_u={format_float(ev.mse_u)} mse_v={format_float(ev.mse_v)}")
    return 0


_SWEEP_SCHEMA = dict(_PARAM_SCHEMA, **{
    "widths": (_int_list, (32, 64, 128, 256)),
    "depths": (_int_list, (1, 2, 3)),
    "dts": (_float_list, (0.01,)),
    "noises": (_float_list, (0.0,)),
    "seeds": (int, 3),
    "seed": (int, 0),
    "t_final": (float, 20.0),
    "epochs": (int, DEFAULT_EPOCHS),
    "lr": (float, DEFAULT_LR),
    "substeps": (int, 10),
    "out": (str, "sweep.csv"),
})


def cmd_sweep(args) -> int:
    o = _resolve(args, _SWEEP_SCHEMA)
    spec = SweepSpec(o.widths, o.depths, o.dts, o.noises, o.seeds)
    params = FhnParams(o.a, o.b, o.c)

    done = itertools.count(1)

    def progress(row: SweepRow) -> None:
        print(f"[{next(done)}/{spec.cells}] width={row.width} depth={row.depth} "
              f"dt={row.dt} noise={row.noise} seed={row.seed} "
              f"mse_u={row.mse_u:.3e} ({row.seconds:.1f}s)", file=sys.stderr)

    rows = run_sweep(spec, params, t_final=o.t_final, epochs=o.epochs, lr=o.lr,
                     base_seed=o.seed, substeps=o.substeps, progress=progress)
    write_sweep_csv(rows, o.out)
    print(f"wrote {o.out} ({len(rows)} rows)")
    return 0


_PHASE_SCHEMA = dict(_PARAM_SCHEMA, **{
    "u_min": (float, -2.5),
    "u_max": (float, 2.5),
    "samples": (int, 101),
    "out": (str, "phase.csv"),
})


def cmd_phase(args) -> int:
    o = _resolve(args, _PHASE_SCHEMA)
    params = FhnParams(o.a, o.b, o.c)
    if o.samples < 1:
        raise ValueError(f"samples must be >= 1, got {o.samples}")
    grid = np.linspace(o.u_min, o.u_max, o.samples)
    write_phase_csv(params, grid, o.out)
    eq = equilibrium(params)
    print(f"wrote {o.out} (equilibrium u_e={format_float(eq.u_e)} "
          f"v_e={format_float(eq.v_e)})")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="eulerfit",
                     description="Learn an ODE right-hand side from trajectory data.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="simulate ground truth (and optional noisy copy)")
    _add_param_flags(p)
    p.add_argument("--dt", type=float, help="sample spacing (default 0.01)")
    p.add_argument("--t-final", dest="t_final", type=float, help="horizon (default 20)")
    p.add_argument("--noise", type=float, help="noise level fraction (default 0)")
    p.add_argument("--seed", type=int, help="noise seed (default 0)")
    p.add_argument("--substeps", type=int, help="internal RK4 substeps (default 10)")
    p.add_argument("--out", help="clean trajectory CSV path (default clean.csv)")
    p.add_argument("--noisy-out", dest="noisy_out",
                   help="noisy trajectory CSV path (default <out>.noisy.csv)")
    _add_config_flag(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("train", help="fit the residual network to a trajectory CSV")
    p.add_argument("--data", help="training trajectory CSV (default clean.csv)")
    p.add_argument("--width", type=int, help="hidden-layer width (default 64)")
    p.add_argument("--depth", type=int, help="hidden-layer count (default 1)")
    p.add_argument("--epochs", type=int, help=f"update budget (default {DEFAULT_EPOCHS})")
    p.add_argument("--lr", type=float, help=f"Adam learning rate (default {DEFAULT_LR})")
    p.add_argument("--seed", type=int, help="weight-init seed (default 0)")
    p.add_argument("--time-input", dest="time_input", action="store_true", default=None,
                   help="feed the sample time to the network as an extra input")
    p.add_argument("--model-out", dest="model_out", help="model file (default model.txt)")
    p.add_argument("--log-out", dest="log_out",
                   help="per-epoch loss CSV (default train_log.csv)")
    _add_config_flag(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="roll out a model against a truth CSV")
    p.add_argument("--model", help="model file (default model.txt)")
    p.add_argument("--truth", help="truth trajectory CSV (default clean.csv)")
    p.add_argument("--out", help="prediction CSV (default pred.csv)")
    _add_config_flag(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="train/evaluate a width x depth x dt x noise grid")
    _add_param_flags(p)
    p.add_argument("--widths", type=_int_list, help="comma list (default 32,64,128,256)")
    p.add_argument("--depths", type=_int_list, help="comma list (default 1,2,3)")
    p.add_argument("--dts", type=_float_list, help="comma list (default 0.01)")
    p.add_argument("--noises", type=_float_list, help="comma list (default 0)")
    p.add_argument("--seeds", type=int, help="runs per cell (default 3)")
    p.add_argument("--seed", type=int, help="base seed (default 0)")
    p.add_argument("--t-final", dest="t_final", type=float, help="horizon (default 20)")
    p.add_argument("--epochs", type=int, help=f"update budget (default {DEFAULT_EPOCHS})")
    p.add_argument("--lr", type=float, help=f"Adam learning rate (default {DEFAULT_LR})")
    p.add_argument("--substeps", type=int, help="truth-generation substeps (default 10)")
    p.add_argument("--out", help="results CSV (default sweep.csv)")
    _add_config_flag(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("phase", help="export nullclines and the rest point")
    _add_param_flags(p)
    p.add_argument("--u-min", dest="u_min", type=float, help="grid start (default -2.5)")
    p.add_argument("--u-max", dest="u_max", type=float, help="grid end (default 2.5)")
    p.add_argument("--samples", type=int, help="grid size (default 101)")
    p.add_argument("--out", help="output CSV (default phase.csv)")
    _add_config_flag(p)
    p.set_defaults(func=cmd_phase)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except (IntegrationError, DivergenceError, ConvergenceError) as err:
        print(f"numeric failure: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
