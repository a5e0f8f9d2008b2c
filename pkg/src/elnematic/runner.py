"""Drive a simulation and record its diagnostics to an output directory."""
from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .coefficients import classify_regime
from .diagnostics import (CSV_COLUMNS, appendix_terms, convergence_monitor, decay_functional,
                          energy_law_residual, energy_report, is_monotone)
from .io import config_to_dict, write_csv, write_json, write_snapshot
from .solver import RunConfig, State, initial_state, make_integrator, simulate, step


def _uniform_prefix(times: list[float]) -> int:
    """Length of the leading run of equally spaced samples."""
    if len(times) < 3:
        return len(times)
    h = times[1] - times[0]
    k = 2
    while k < len(times) and abs((times[k] - times[k - 1]) - h) <= 1e-9 * max(1.0, abs(h)):
        k += 1
    return k


def record_run(cfg: RunConfig, snapshot_dir: Path | None = None):
    """Run ``cfg`` and return (reports, decay samples, final state)."""
    reports, decay_t, decay_v = [], [], []
    grid, mu = cfg.grid, cfg.mu

    def sink(k: int, s: State) -> None:
        reports.append(energy_report(s, mu, grid))
        decay_t.append(s.t)
        decay_v.append(decay_functional(s, mu, grid))
        if snapshot_dir is not None and cfg.snapshot_every and k % cfg.snapshot_every == 0:
            write_snapshot(snapshot_dir / f"snap_{k:08d}.elc", grid, s.t, {"v": s.v, "d": s.d})

    final = simulate(cfg, [sink])
    n_uniform = _uniform_prefix([r.t for r in reports])
    if n_uniform >= 3:
        res = energy_law_residual(reports[:n_uniform], mu)
        for r, x in zip(reports, res):
            r.law_residual = float(x)
    return reports, (decay_t, decay_v), final


def run_and_record(cfg: RunConfig, out: Path) -> dict:
    """Write timeseries.csv, summary.json, config.json and final.elc into ``out``."""
    out = Path(out)
    write_json(out / "config.json", config_to_dict(cfg))
    reports, (dt_, dv), final = record_run(cfg, out)
    write_csv(out / "timeseries.csv", CSV_COLUMNS, [r.row() for r in reports])
    write_snapshot(out / "final.elc", cfg.grid, final.t, {"v": final.v, "d": final.d})

    closure = None
    if cfg.n_steps >= 1:
        s0 = initial_state(cfg.grid, cfg.init)
        s1 = step(s0, cfg, make_integrator(cfg))
        closure = appendix_terms(s0, cfg.mu, cfg.grid, later=s1).closure_error
    residuals = [r.law_residual for r in reports if not math.isnan(r.law_residual)]
    fit = convergence_monitor(dt_, dv)
    summary = {
        "regime": classify_regime(cfg.mu).tag.value,
        "monotone": is_monotone(reports),
        "max_residual": float(np.max(np.abs(residuals))) if residuals else None,
        "appendix_closure": closure,
        "decay_fit": fit.to_json(),
        "t_final": final.t,
        "samples": len(reports),
    }
    write_json(out / "summary.json", summary)
    return summary
