"""Noise budget of the LT1363 readout at the U1 mode.

Prints input-referred ASDs (nV/rtHz) for a few assumed values of Re{Z_sen},
since only |Z_sen| is known. Usage:

    python scripts/reproduce_noise_budget.py --zmag 15.8e3 --re 0 2e3 3.85e3
"""

import argparse
import cmath
import math

from cmetwoport.noise import ReadoutCircuit, dominance_report, get_opamp, noise_psd, quadrature_total


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--zmag", type=float, default=15.8e3, help="|Z_sen| in ohm")
    ap.add_argument("--re", type=float, nargs="+", default=[0.0, 2e3, 3.85e3], help="Re{Z_sen} values to try")
    ap.add_argument("--r1", type=float, default=16.0)
    ap.add_argument("--r2", type=float, default=300.0)
    ap.add_argument("--temp", type=float, default=300.0)
    args = ap.parse_args()

    amp = get_opamp("LT1363")
    c = ReadoutCircuit(args.r1, args.r2, args.temp)
    print(f"{'Re Z':>8} {'thermal':>8} {'current':>8} {'voltage':>8} {'total':>8}  dominant")
    for re in args.re:
        if re > args.zmag:
            print(f"{re:8.0f}  skipped, exceeds |Z|")
            continue
        z = complex(re, math.sqrt(args.zmag ** 2 - re ** 2))
        b = noise_psd(c, amp, z)
        cols = [b.asd(t, "in") * 1e9 for t in ("thermal", "current", "voltage", "total")]
        dom = dominance_report(amp, z, c).dominant.value
        print(f"{re:8.0f} " + " ".join(f"{v:8.2f}" for v in cols) + f"  {dom}  (phase {math.degrees(cmath.phase(z)):.1f} deg)")
    print(f"quadrature of 8, 15, 9 nV: {quadrature_total([8, 15, 9]):.2f} nV/rtHz")


if __name__ == "__main__":
    main()
