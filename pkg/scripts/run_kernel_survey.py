#!/usr/bin/env python3
"""Survey the built-in kernels: size constants, regularity, cancellation,
and the molecule class of operator images.

For each named kernel this measures the empirical size constant, the
supremum of the annulus regularity ratios, the per-ball oscillation
profile, and (for a small battery of random atoms) the class constant of
the operator images.  Writes a JSON summary if --out is given.

Example:
    python3 scripts/run_kernel_survey.py --kernels bump hilbert warped
"""

import argparse
import json
import sys

import numpy as np

from hardylab.atoms import make_approx_atom
from hardylab.grid import Ball
from hardylab.operators import (
    KERNEL_NAMES,
    hormander_sweep,
    kernel_by_name,
    kernel_size_check,
    local_campanato_check,
    standard_sample_pairs,
    verify_Ta_molecule,
)
from hardylab.params import HardyParams


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--kernels", nargs="+", default=["bump", "hilbert",
                                                     "warped"],
                    choices=list(KERNEL_NAMES))
    ap.add_argument("--seeds", type=int, default=5,
                    help="atoms per (p, r) cell in the image battery")
    ap.add_argument("--out", help="write the JSON summary here")
    args = ap.parse_args(argv)

    P1 = HardyParams(1.0, 2.0, omega=1.0)
    P23 = HardyParams(2.0 / 3.0, 2.0, omega=1.0)
    atoms = []
    for pr, lam in ((P1, 2.0), (P23, 2.5)):
        for seed in range(args.seeds):
            for r in (2.0 ** -2, 2.0 ** -5):
                f, B = make_approx_atom(pr, r, seed=seed, subdiv=5, fill=0.0)
                atoms.append((f, B, pr, lam))

    summary = {}
    for name in args.kernels:
        K = kernel_by_name(name)
        size = kernel_size_check(K, standard_sample_pairs((-4.0, 4.0),
                                                          2.0 ** -10))
        reg_sup, _ = hormander_sweep(K)
        camp = local_campanato_check(K, Ball(0.1, 2.0 ** -4), P23)
        consts = []
        fails = 0
        for f, B, pr, lam in atoms:
            rep = verify_Ta_molecule(K, f, B, pr, lam)
            consts.append(rep.tightest_constant)
            fails += 0 if rep.passed else 1
        entry = {
            "size_constant": size.c_measured,
            "size_passed": bool(size.passed),
            "regularity_sup": reg_sup,
            "oscillation_sup_ratio": camp.sup_ratio,
            "image_constant_sup": float(np.max(consts)),
            "image_constant_median": float(np.median(consts)),
            "image_failures": fails,
            "n_atoms": len(atoms),
        }
        summary[name] = entry
        print(f"{name:>12}: size {entry['size_constant']:.4f}  "
              f"regularity sup {entry['regularity_sup']:.4f}  "
              f"oscillation {entry['oscillation_sup_ratio']:.4f}  "
              f"image sup/med {entry['image_constant_sup']:.3f}/"
              f"{entry['image_constant_median']:.3f}  "
              f"failures {fails}/{len(atoms)}")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
