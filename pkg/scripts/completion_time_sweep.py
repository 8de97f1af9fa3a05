#!/usr/bin/env python3
"""Mean completion time of 20 kbits vs. average EH rate and vs. relay peak power.

Writes results/completion_time_vs_eh_rate.csv and results/completion_time_vs_relay_peak.csv.
"""

import argparse
import time
from pathlib import Path

from ehrelay.sweep import SweepConfig, run_sweep, to_csv, with_grid


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--data-kbits", type=float, default=20.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out-dir", type=Path, default=Path("results"))
    args = ap.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)

    for variable in ("eh_rate", "relay_peak"):
        cfg = with_grid(
            SweepConfig(objective="tmin", sweep_variable=variable, trials=args.trials, data=args.data_kbits * 1e3, seed=args.seed)
        )
        t0 = time.perf_counter()
        rows = run_sweep(cfg, jobs=args.jobs)
        path = args.out_dir / f"completion_time_vs_{variable}.csv"
        path.write_text(to_csv(rows))
        print(f"{path}  ({time.perf_counter() - t0:.1f} s)")
        for r in rows:
            print(
                f"  {r['sweep_value'] * 1e3:6.1f} mW  optimal {r['optimal'] * 1e3:7.3f} ms"
                f"  fixed-sched {r['fixed_scheduling'] * 1e3:7.3f}  fixed-power {r['fixed_power'] * 1e3:7.3f}"
                f"  bound {r['upper_bound'] * 1e3:7.3f}  ok {r['trials_ok']}"
            )


if __name__ == "__main__":
    main()
