"""Solve the Beltrami scenario with both methods and print the checks.

    python scripts/run_beltrami.py --grid 32 --delta 0.01
"""

import argparse
import time

from twostream.cli import parse_grid
from twostream.euler import FlowState, verification_metrics
from twostream.nashmoser import nash_moser_solve, newton_solve
from twostream.scenario import load_scenario_text, shipped_scenarios


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--grid", type=parse_grid, default=(32, 32, 32))
    ap.add_argument("--delta", type=float, default=0.01)
    args = ap.parse_args()
    text = shipped_scenarios()["beltrami"].read_text().replace("delta: 0.01", f"delta: {args.delta!r}")
    sc = load_scenario_text(text).with_overrides(grid=args.grid)
    results = {}
    for name, solve in (("newton", lambda: newton_solve(sc.problem, tol=sc.tol, params=sc.params)),
                        ("nash-moser", lambda: nash_moser_solve(sc.problem, sc.params, tol=sc.tol))):
        t0 = time.perf_counter()
        pair, rep = solve()
        print(f"# {name}: {rep.verdict} in {time.perf_counter() - t0:.2f}s")
        print(rep.table(), end="")
        results[name] = pair
    metrics = verification_metrics(FlowState.from_pair(results["newton"], sc.problem.bernoulli), 1.0)
    for k, v in sorted(metrics.items()):
        print(f"{k} {v:.6e}")


if __name__ == "__main__":
    main()
