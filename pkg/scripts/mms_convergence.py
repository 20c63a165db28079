"""Manufactured-solution convergence of the linearized solve in x.

Prints ``n,error`` rows and the fitted order for a base-state and a perturbed
background.  The right-hand side comes from the strong operator on x-refined
grids, Richardson-combined, so its own truncation error is negligible.

    python scripts/mms_convergence.py
"""

import numpy as np

from twostream.diagnostics import random_smooth_field
from twostream.fields import GridSpec, StreamPair
from twostream.linearized import LinearizedOperator, solve_linearized

BASE = ((0, 1, 0), (0, 0, 1))


def fields(grid, seed):
    rng = np.random.default_rng(seed)
    return [random_smooth_field(grid, rng, nmax=3) for _ in range(4)]


def error(n, amp, eps, seed=7):
    rhs = []
    for r in (8, 16):
        fine = GridSpec(1.0, 1.0, 1.0, (n - 1) * r + 1, 16, 16)
        bf, bg, F, G = fields(fine, seed)
        mu, nu = LinearizedOperator(StreamPair(fine, *BASE, amp * bf, amp * bg), eps=eps).apply_strong(F, G)
        rhs.append((mu[::r], nu[::r]))
    mu, nu = ((4 * b - a) / 3 for a, b in zip(*rhs))
    grid = GridSpec(1.0, 1.0, 1.0, n, 16, 16)
    bf, bg, F, G = fields(grid, seed)
    sol = solve_linearized(LinearizedOperator(StreamPair(grid, *BASE, amp * bf, amp * bg), eps=eps), (mu, nu), tol=1e-12)
    dF, dG = sol.F.values - F, sol.G.values - G
    return float(np.sqrt(grid.inner(dF, dF) + grid.inner(dG, dG)))


def main():
    ns = (16, 32, 64)
    for amp, eps in ((0.0, 0.0), (0.01, 0.3)):
        errs = [error(n, amp, eps) for n in ns]
        print(f"# background amplitude {amp}, eps {eps}")
        print("n,error")
        for n, e in zip(ns, errs):
            print(f"{n},{e!r}")
        print(f"# fitted order {-np.polyfit(np.log(ns), np.log(errs), 1)[0]:.3f}")


if __name__ == "__main__":
    main()
