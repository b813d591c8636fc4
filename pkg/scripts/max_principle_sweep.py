"""Truncated norms of Gamma_{H_V} along rays t * V0 for the two regimes of the
maximum principle.

For a quadruple whose Psi12 is bounded below every norm stays under a common
bound strictly less than one; for a quadruple with a zero Psi12 column matched
by a unit Psi22 column every norm equals one.  Output is CSV on stdout.

    python scripts/max_principle_sweep.py --K 12 --points 9 --rays 3
"""

import argparse
import csv
import sys

import numpy as np

from redlift.generators import (make_rng, norm_one_quadruple, random_schur_parameter,
                                strict_max_principle_quadruple)
from redlift.redheffer import SchurParameter, gamma_HV
from redlift.systems import LinearSystem


def scaled(v: SchurParameter, t: float, K: int) -> SchurParameter:
    s = v.system
    return SchurParameter(LinearSystem(s.state_op, t * s.input_op, s.output_op, t * s.feed_op),
                          True, K)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    p.add_argument("--K", type=int, default=12)
    p.add_argument("--points", type=int, default=9)
    p.add_argument("--rays", type=int, default=3)
    p.add_argument("--seed", type=int, default=3)
    args = p.parse_args(argv)

    rng = make_rng(args.seed)
    cases = {"strict": strict_max_principle_quadruple(rng, 2, 2, 2, 2),
             "norm_one": norm_one_quadruple(rng, 2, 2, 2, 2)}
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["regime", "ray", "t", "norm"])
    for name, psi in cases.items():
        for ray in range(args.rays):
            v0 = random_schur_parameter(rng, psi.dim_e, psi.dim_eprime, 1.0, ray % 3, args.K)
            for t in np.linspace(0.0, 0.95, args.points):
                n = gamma_HV(psi, scaled(v0, t, args.K), args.K).norm()
                w.writerow([name, ray, f"{t:.4f}", repr(n)])


if __name__ == "__main__":
    main()
