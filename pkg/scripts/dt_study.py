"""Sampling-step study.

For each dt, trains on clean data sampled at that spacing and reports how far
the loss fell plus the rollout accuracy.  Writes per-dt training logs and
predictions under results/.
"""

import argparse
from pathlib import Path

from eulerfit.cli import generate_truth
from eulerfit.dynamics import FhnParams
from eulerfit.integrate import format_float, write_trajectory_csv
from eulerfit.learner import TrainConfig, eval_mse, rollout, train


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dts", default="0.01,0.025,0.05")
    ap.add_argument("--width", type=int, default=64)
    ap.add_argument("--epochs", type=int, default=4000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out-dir", default="results")
    args = ap.parse_args()

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    params = FhnParams()

    print(f"{'dt':>8} {'init loss':>12} {'final loss':>12} {'reduction':>10} "
          f"{'mse_u':>10} {'mse_v':>10}")
    for dt in (float(tok) for tok in args.dts.split(",")):
        clean = generate_truth(params, dt, 20.0)
        cfg = TrainConfig(dt=dt, width=args.width, depth=1, epochs=args.epochs,
                          seed=args.seed, t_final=20.0)
        report = train(clean, cfg)
        pred = rollout(report.net, clean.states[0], dt, clean.num_steps)
        ev = eval_mse(pred, clean, cfg)

        tag = f"dt{repr(dt).replace('.', 'p')}"
        write_trajectory_csv(pred, out_dir / f"pred_{tag}.csv")
        log = ["epoch,loss"] + [f"{i},{format_float(x)}"
                                for i, x in enumerate(report.loss_history)]
        (out_dir / f"train_log_{tag}.csv").write_text("\n".join(log) + "\n")

        reduction = report.loss_history[0] / report.final_loss
        print(f"{dt:>8} {report.loss_history[0]:>12.3e} {report.final_loss:>12.3e} "
              f"{reduction:>10.1e} {ev.mse_u:>10.2e} {ev.mse_v:>10.2e}")


if __name__ == "__main__":
    main()
