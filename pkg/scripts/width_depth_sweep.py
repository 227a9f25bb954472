"""Width x depth accuracy grid.

Trains the residual network at every (width, depth) combination on clean
dt=0.01 data and reports the median rollout MSE of u over several seeds.
Writes results/width_depth_sweep.csv.
"""

import argparse
import statistics
from pathlib import Path

from eulerfit.cli import SweepSpec, run_sweep, write_sweep_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--widths", default="32,64,128,256")
    ap.add_argument("--depths", default="1,2,3")
    ap.add_argument("--epochs", type=int, default=2000)
    ap.add_argument("--seeds", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out-dir", default="results")
    args = ap.parse_args()

    spec = SweepSpec(
        widths=tuple(int(w) for w in args.widths.split(",")),
        depths=tuple(int(d) for d in args.depths.split(",")),
        dts=(0.01,),
        noise_levels=(0.0,),
        seeds_per_cell=args.seeds,
    )
    rows = run_sweep(spec, epochs=args.epochs, base_seed=args.seed,
                     progress=lambda r: print(f"  width={r.width} depth={r.depth} "
                                              f"seed={r.seed} mse_u={r.mse_u:.3e} "
                                              f"({r.seconds:.0f}s)"))
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    out = out_dir / "width_depth_sweep.csv"
    write_sweep_csv(rows, out)
    print(f"\nwrote {out}")

    print(f"\nmedian rollout MSE(u) over {args.seeds} seeds:")
    print("depth \\ width " + "".join(f"{w:>10d}" for w in spec.widths))
    for depth in spec.depths:
        cells = []
        for width in spec.widths:
            ms = [r.mse_u for r in rows if r.width == width and r.depth == depth]
            cells.append(f"{statistics.median(ms):>10.1e}")
        print(f"{depth:>13d} " + "".join(cells))


if __name__ == "__main__":
    main()
