"""Monte Carlo recovery of the series-R / parallel-LC model from noisy sweeps.

    python scripts/lcr_recovery.py --trials 200 --noise 1e-3
"""

import argparse

import numpy as np

from cmetwoport.lcr import ImpedanceSweep, fit_lcr
from cmetwoport.synthetic import REFERENCE_LCR, lcr_sweep


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--noise", type=float, default=1e-3)
    ap.add_argument("--points", type=int, default=400)
    args = ap.parse_args()

    truth = np.array([REFERENCE_LCR.r, REFERENCE_LCR.l, REFERENCE_LCR.c])
    errs, iters, ok = [], [], 0
    for seed in range(args.trials):
        f, z = lcr_sweep(n=args.points, rel_noise=args.noise, rng=np.random.default_rng(seed))
        fit = fit_lcr(ImpedanceSweep(f, z))
        e = np.array([fit.model.r, fit.model.l, fit.model.c]) / truth - 1
        errs.append(e)
        iters.append(fit.iterations)
        ok += bool(np.all(np.abs(e) < 0.01))
    errs = np.abs(np.array(errs))
    print(f"{ok}/{args.trials} within 1%, median iterations {int(np.median(iters))}")
    for name, col in zip(("R", "L", "C"), errs.T):
        print(f"{name}: median |err| {np.median(col):.2e}, max {col.max():.2e}")


if __name__ == "__main__":
    main()
