"""Seed the solver with the unstable plane wave and compare growth to the linear rate.

Also sweeps the hyperviscosity coefficient to show the fitted rate is
insensitive to it while the unregularised run loses the mode to blowup.

    python scripts/unstable_mode_growth.py --out runs/unstable
"""
import argparse
import json
import warnings
from pathlib import Path

import numpy as np

from elnematic.io import config_from_dict, load_config_json, write_csv
from elnematic.linstab import LeslieUnstableParams, unstable_mode
from elnematic.solver import BlowupError, simulate
from elnematic.spectral import norm_l2


def growth(raw):
    cfg = config_from_dict(raw)
    ts, vs = [], []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        try:
            simulate(cfg, [lambda k, s: (ts.append(s.t), vs.append(norm_l2(cfg.grid, s.v)))])
        except BlowupError as exc:
            return None, exc.t, ts, vs
    return float(np.polyfit(ts, np.log(vs), 1)[0]), None, ts, vs


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default="configs/unstable_mode.json")
    ap.add_argument("--out", default="runs/unstable")
    ap.add_argument("--hyper", type=float, nargs="+", default=[0.0, 1e-7, 1e-6, 1e-5])
    args = ap.parse_args()

    base = load_config_json(args.config)
    cfg = config_from_dict(base)
    target = unstable_mode(LeslieUnstableParams(cfg.mu, float(base["epsilon_leslie"])), cfg.init.mode.m).growth_rate
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for h in args.hyper:
        rate, blow, ts, vs = growth({**base, "hyperviscosity": h})
        write_csv(out / f"norm_v_h{h:g}.csv", ["t", "norm_v"], list(zip(ts, vs)))
        rows.append([h, rate if rate is not None else float("nan"), blow if blow is not None else float("nan")])
        print(json.dumps({"hyperviscosity": h, "rate": rate, "target": target, "blowup_t": blow}))
    write_csv(out / "sweep.csv", ["hyperviscosity", "fitted_rate", "blowup_t"], rows)


if __name__ == "__main__":
    main()
