"""Energy history and law residual for a coefficient set (Parodi or not).

    python scripts/energy_law.py --config configs/sphere_case1.json --out runs/energy
"""
import argparse
import json
from pathlib import Path

import numpy as np

from elnematic.diagnostics import CSV_COLUMNS, energy_law_residual, is_monotone
from elnematic.io import config_from_dict, load_config_json, write_csv
from elnematic.runner import record_run


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default="configs/sphere_case1.json")
    ap.add_argument("--out", default="runs/energy")
    ap.add_argument("--t-end", type=float)
    args = ap.parse_args()

    raw = load_config_json(args.config)
    if args.t_end is not None:
        raw["t_end"] = args.t_end
    cfg = config_from_dict(raw, args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    reports, _, _ = record_run(cfg)
    write_csv(out / "energy.csv", CSV_COLUMNS, [r.row() for r in reports])
    res = energy_law_residual(reports, cfg.mu)
    E = np.array([r.E_total for r in reports])
    print(json.dumps({"E0": E[0], "E_final": E[-1], "monotone": is_monotone(reports),
                      "max_abs_residual": float(np.nanmax(np.abs(res))), "parodi": reports[0].parodi}, indent=2))


if __name__ == "__main__":
    main()
