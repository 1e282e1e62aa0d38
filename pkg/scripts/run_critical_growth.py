#!/usr/bin/env python3
"""Growth study for profiles whose critical moment stays constant.

At p = 1/2 the first moment of an atom on B(0, r) must shrink with the
log gauge; this script builds the odd-step family that instead holds the
moment at a constant level, then measures how the quasi-norm and the
weighted spectral integral grow as the ball shrinks.  The integral's
growth is compared against the closed-form level 2 (2 pi |m1|)^p
log(1 + 1/r) driven by the spectral moment.

Example:
    python3 scripts/run_critical_growth.py --jmin 3 --jmax 10
"""

import argparse
import sys

import numpy as np

from hardylab.fourier import critical_term_prediction, hardy_integral
from hardylab.grid import Ball, GridFunction, moment
from hardylab.maximal import hp_quasinorm


def saturating_dipole(r, n=128):
    dx = 2.0 * r / n
    mid = -r + (np.arange(n) + 0.5) * dx
    c = r ** (0.5 - 2.0) / np.sqrt(2.0 * r)
    f = GridFunction(x0=-r, dx=dx, samples=c * np.sign(mid), mode="exact")
    return f, Ball(0.0, r)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--jmin", type=int, default=3,
                    help="shallowest radius 2^-jmin (default 3)")
    ap.add_argument("--jmax", type=int, default=8,
                    help="deepest radius 2^-jmax (default 8)")
    ap.add_argument("--n", type=int, default=128,
                    help="samples per profile (default 128)")
    args = ap.parse_args(argv)
    if args.jmax <= args.jmin:
        ap.error("need jmax > jmin")

    rs = [2.0 ** -j for j in range(args.jmax, args.jmin - 1, -1)]
    print(f"{'r':>12} {'quasinorm':>12} {'integral':>10} {'closed form':>12}")
    norms, totals, preds = [], [], []
    for r in rs:
        f, ball = saturating_dipole(r, args.n)
        m1 = moment(f, ball, 1)
        nrm = hp_quasinorm(f, 0.5).total
        tot = hardy_integral(f, 0.5, a=1.0, omega=1.0).total
        pred = critical_term_prediction(0.5, 2.0 * np.pi * abs(m1), 1.0, r)
        norms.append(nrm)
        totals.append(tot)
        preds.append(pred)
        print(f"{r:12.6f} {nrm:12.2f} {tot:10.4f} {pred:12.4f}")

    L = np.log(1.0 / np.array(rs))
    nslope = np.polyfit(L, np.log(norms), 1)[0]
    islope = np.polyfit(L, totals, 1)[0]
    pslope = np.polyfit(L, preds, 1)[0]
    print(f"\nquasi-norm log-log growth rate: {nslope:+.4f}")
    print(f"integral slope vs log(1/r):     {islope:+.4f}")
    print(f"closed-form slope:              {pslope:+.4f}")
    print(f"measured/predicted:             {islope / pslope:.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
