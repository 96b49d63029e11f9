#!/usr/bin/env python3
"""Spontaneous deexcitation from |1> at several bath temperatures.

Writes one CSV with a column of rho11 per temperature, sampled on a shared
time grid in units of 1/Gamma, and prints each curve's long-time value next
to the Fermi-Dirac occupation.
"""
import argparse
import csv
import math
from pathlib import Path

import numpy as np

from thermobloch import BathParams, StepConfig, SystemParams, evolve
from thermobloch.core import EXCITED
from thermobloch.integrator import fermi_dirac, relaxation_rate

EXP_BETA = ("inf", "9", "4", "7/3", "1.5")


def parse_exp_beta(token):
    if token == "inf":
        return math.inf
    num, _, den = token.partition("/")
    return float(num) / float(den or 1)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--gamma", type=float, default=1.0)
    ap.add_argument("--t-max", type=float, default=10.0, help="in units of 1/gamma")
    ap.add_argument("--samples", type=int, default=201)
    ap.add_argument("-o", "--output", type=Path, default=Path("fig2_deexcitation.csv"))
    args = ap.parse_args()

    sysp = SystemParams.from_gap(1.0)
    t_max = args.t_max / args.gamma
    columns = {}
    for token in EXP_BETA:
        bath = BathParams.from_rate(args.gamma, parse_exp_beta(token))
        dt = 1e-3 / relaxation_rate(bath, sysp)
        n = math.ceil(t_max / dt)
        stride = max(1, n // (args.samples - 1))
        traj = evolve(EXCITED, StepConfig(dt, t_max=t_max, record_every=stride), sysp, bath)
        columns[token] = traj
        print(f"exp(beta dE) = {token:>4}: rho11(t_max) = {traj.final.rho11:.6f}, "
              f"Fermi-Dirac = {fermi_dirac(bath, sysp):.6f}")

    # curves use different dt, so resample onto a common grid
    grid = np.linspace(0.0, t_max, args.samples)
    with args.output.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["gamma_t"] + [f"rho11_expbeta_{t.replace('/', '_')}" for t in EXP_BETA])
        for i, t in enumerate(grid):
            row = [t * args.gamma] + [np.interp(t, columns[k].times, columns[k].rho11) for k in EXP_BETA]
            w.writerow([format(v, ".10g") for v in row])
    print(f"wrote {args.output}")


if __name__ == "__main__":
    main()
