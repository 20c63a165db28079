"""Smallest Rayleigh quotient at the base state and the non-coercive probe.

    python scripts/coercivity_table.py --sizes 16 24 32
"""

import argparse
import math

from twostream.diagnostics import COERCIVITY_CONSTANT, noncoercive_probe, probe_slope, rayleigh_min
from twostream.fields import GridSpec, StreamPair

BASE = ((0, 1, 0), (0, 0, 1))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[16, 24, 32])
    ap.add_argument("--eps", type=float, nargs="+", default=[0.0, 0.3, 1.0])
    args = ap.parse_args()
    bound = COERCIVITY_CONSTANT * math.pi**2
    print(f"# lower bound pi^2/32 = {bound:.6f}, single x-mode value pi^2/2 = {math.pi**2 / 2:.6f}")
    print("n,eps,min_quotient,margin,iterations")
    for n in args.sizes:
        base = StreamPair.linear(GridSpec.cube(n), *BASE)
        for eps in args.eps:
            res = rayleigh_min(base, eps=eps)
            print(f"{n},{eps},{res.min_quotient!r},{res.min_quotient / bound:.4f},{res.iterations}")
    grid = GridSpec(1.0, 1.0, 1.0, 32, 4, 64)
    rows = noncoercive_probe(StreamPair.linear(grid, *BASE), [1, 2, 4, 8, 16])
    print("n,B,h1_squared,quotient")
    for r in rows:
        print(f"{r.n},{r.B!r},{r.h1_squared!r},{r.quotient!r}")
    print(f"# slope over n >= 2: {probe_slope(rows[1:]):.4f}")


if __name__ == "__main__":
    main()
