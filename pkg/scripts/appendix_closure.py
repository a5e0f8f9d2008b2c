"""Closure error of the higher-order functional expansion under time-step refinement.

    python scripts/appendix_closure.py --n 64 --dt 4e-5 2e-5 1e-5 5e-6
"""
import argparse
import math

from elnematic.coefficients import LeslieCoefficients
from elnematic.diagnostics import appendix_terms
from elnematic.solver import RandomSmooth, RunConfig, initial_state, step
from elnematic.spectral import TorusGrid


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=64)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--mu", type=float, nargs=6, default=[0.0, -0.5, 0.5, 1.0, 0.2, 0.2])
    ap.add_argument("--dt", type=float, nargs="+", default=[4e-5, 2e-5, 1e-5, 5e-6])
    args = ap.parse_args()

    grid = TorusGrid(2, args.n)
    mu = LeslieCoefficients(*args.mu)
    s0 = initial_state(grid, RandomSmooth(seed=args.seed))
    print("dt,closure_error,half_dA_fd,rhs_total,observed_order")
    prev = None
    for dt in args.dt:
        t = appendix_terms(s0, mu, grid, later=step(s0, RunConfig(grid, mu, dt, dt)))
        order = math.log(prev[1] / t.closure_error) / math.log(prev[0] / dt) if prev else float("nan")
        print(f"{dt:g},{t.closure_error:.6e},{t.half_dA_fd!r},{t.rhs_total!r},{order:.3f}")
        prev = (dt, t.closure_error)


if __name__ == "__main__":
    main()
