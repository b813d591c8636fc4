"""Isometry defect of the truncated coefficient matrix versus truncation degree.

Draws isometric underlying contractions with a range of spectral radii and
prints, for each, the defect at K = 2, 4, ..., Kmax together with the fitted
per-degree decay rate and rho^2 for comparison.

    python scripts/decay_profile.py --count 6 --kmax 16 --seed 1
"""

import argparse
import csv
import sys

import numpy as np

from redlift.generators import make_rng, random_omega
from redlift.lifting import phi_coeffs
from redlift.redheffer import isometry_defect
from redlift.systems import strong_stability


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    p.add_argument("--count", type=int, default=6)
    p.add_argument("--kmax", type=int, default=16)
    p.add_argument("--seed", type=int, default=1)
    args = p.parse_args(argv)

    rng = make_rng(args.seed)
    degrees = list(range(2, args.kmax + 1, 2))
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["instance", "rho", "rho_sq", "fitted_rate"] + [f"K{k}" for k in degrees])
    for i, rho_target in enumerate(np.linspace(0.3, 0.85, args.count)):
        om = random_omega(rng, 2, 3, 2, isometric=True,
                          rho_range=(rho_target - 0.05, rho_target + 0.05))
        psi = phi_coeffs(om)
        rho = strong_stability(psi.realization.state_op)[1]
        defects = [isometry_defect(psi, k) for k in degrees]
        usable = [(k, d) for k, d in zip(degrees, defects) if d > 1e-12]
        rate = float("nan")
        if len(usable) >= 2:
            ks, ds = zip(*usable)
            rate = float(np.exp(np.polyfit(ks, np.log(ds), 1)[0]))
        w.writerow([i, f"{rho:.6f}", f"{rho * rho:.6f}", f"{rate:.6f}"]
                   + [f"{d:.3e}" for d in defects])


if __name__ == "__main__":
    main()
