"""Taylor-Green decay with the director decoupled, versus the Stokes rate mu4 k^2.

    python scripts/taylor_green.py --delta 1e-4 1e-5 1e-6
"""
import argparse
import math

import numpy as np

from elnematic.io import config_from_dict, load_config_json
from elnematic.solver import simulate
from elnematic.spectral import norm_l2


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default="configs/taylor_green.json")
    ap.add_argument("--delta", type=float, nargs="+", default=[1e-4, 1e-5, 1e-6],
                    help="mu2 = -delta, mu3 = delta keeps lambda1 < 0 while decoupling the director")
    args = ap.parse_args()

    base = load_config_json(args.config)
    mu4 = base["mu"][3]
    target = mu4 * (2 * math.pi * base["init"].get("wavenumber", 1)) ** 2
    print("delta,rate,target,rel_error")
    for delta in args.delta:
        cfg = config_from_dict({**base, "mu": [0.0, -delta, delta, mu4, 0.0, 0.0]})
        ts, vs = [], []
        simulate(cfg, [lambda k, s: (ts.append(s.t), vs.append(norm_l2(cfg.grid, s.v)))])
        rate = -float(np.polyfit(ts, np.log(vs), 1)[0])
        print(f"{delta:g},{rate!r},{target!r},{abs(rate - target) / target:.3e}")


if __name__ == "__main__":
    main()
