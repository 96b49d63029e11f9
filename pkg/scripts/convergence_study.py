#!/usr/bin/env python3
"""Global error of both schemes against the exact thermal relaxation.

Halves dt from ``0.05/R`` (R the relaxation rate) and reports the error at
``t = 2/R`` and the observed order between consecutive levels.
"""
import argparse
import csv
import math
import warnings
from pathlib import Path

from thermobloch import BathParams, Scheme, StepConfig, SystemParams, evolve
from thermobloch.core import EXCITED
from thermobloch.integrator import StepSizeWarning, relaxation_rate, thermal_relaxation


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--exp-beta", type=float, default=4.0)
    ap.add_argument("--levels", type=int, default=6)
    ap.add_argument("-o", "--output", type=Path, default=Path("convergence.csv"))
    args = ap.parse_args()

    sysp = SystemParams.from_gap(1.0)
    bath = BathParams.from_rate(1.0, args.exp_beta)
    r = relaxation_rate(bath, sysp)
    rows = []
    for scheme in Scheme:
        prev = None
        for k in range(args.levels):
            dt = 0.05 / r / 2**k
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", StepSizeWarning)
                traj = evolve(EXCITED, StepConfig(dt, t_max=2.0 / r, scheme=scheme), sysp, bath)
            err = abs(traj.final.rho11 - thermal_relaxation(traj.times[-1], 1.0, bath, sysp))
            order = math.log2(prev / err) if prev else float("nan")
            rows.append((scheme.value, dt * r, err, order))
            print(f"{scheme.value:>11}  R*dt={dt * r:.5f}  error={err:.3e}  order={order:.3f}")
            prev = err

    with args.output.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["scheme", "rate_dt", "abs_error", "observed_order"])
        w.writerows(rows)
    print(f"wrote {args.output}")


if __name__ == "__main__":
    main()
