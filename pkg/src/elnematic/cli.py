"""Command line entry point: ``elnematic {simulate,coeffs,linstab,verify}``.

Exit codes: 0 success, 1 domain/config error (or a failed verify check),
2 numerical blowup, 3 I/O error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys

EXIT_OK, EXIT_DOMAIN, EXIT_BLOWUP, EXIT_IO = 0, 1, 2, 3
_THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")

log = logging.getLogger("elnematic")


def _apply_thread_cap() -> None:
    """Propagate ELC_THREADS to the BLAS/OpenMP pools before numpy loads."""
    raw = os.environ.get("ELC_THREADS")
    if raw is None:
        return
    if not raw.isdigit() or int(raw) < 1:
        raise ValueError(f"ELC_THREADS must be a positive integer, got {raw!r}")
    for var in _THREAD_VARS:
        os.environ[var] = raw


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="elnematic", description="Penalised Ericksen-Leslie nematic flow on a torus.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run the solver from a JSON config")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--seed", type=int)
    s.add_argument("--dt", type=float)
    s.add_argument("--t-end", type=float)
    s.add_argument("--n", type=int)
    s.add_argument("--dim", type=int, choices=(2, 3))

    c = sub.add_parser("coeffs", help="derived constants and regime of a coefficient set")
    c.add_argument("--config")
    c.add_argument("--mu", type=float, nargs=6, metavar=("MU1", "MU2", "MU3", "MU4", "MU5", "MU6"))
    c.add_argument("--eps-penalty", type=float, default=1.0)

    ls = sub.add_parser("linstab", help="plane-wave stability and the unstable mode")
    ls.add_argument("--config")
    ls.add_argument("--mu", type=float, nargs=6, metavar=("MU1", "MU2", "MU3", "MU4", "MU5", "MU6"))
    ls.add_argument("--epsilon-leslie", type=float, help="build the unstable mode for this Le3a epsilon")
    ls.add_argument("--m", type=float, nargs="+", default=[1.0, 2.0, 4.0])
    ls.add_argument("--thetas", type=int, default=9, help="number of sweep angles on [0, pi/2]")
    ls.add_argument("--out", help="write the sweep table as CSV here")

    vf = sub.add_parser("verify", help="identity and property self-checks")
    vf.add_argument("--small", action="store_true", help="16^2 / 8^3 grids")
    vf.add_argument("--filter", help="run only checks whose name contains this string")
    return p


# ---------------------------------------------------------------------------
# subcommands

def _coefficients(args):
    from .coefficients import LeslieCoefficients
    from .io import load_config_json, parse_coefficients

    if args.mu is not None:
        return LeslieCoefficients(*args.mu, eps_penalty=getattr(args, "eps_penalty", 1.0)), {}
    if args.config is None:
        raise _Usage("give --mu or --config")
    raw = load_config_json(args.config)
    return parse_coefficients(raw, args.config), raw


class _Usage(ValueError):
    pass


def cmd_coeffs(args) -> int:
    from .coefficients import DomainError, classify_regime, derive_constants, dissipation_margin

    mu, _ = _coefficients(args)
    dc = derive_constants(mu)
    rep = classify_regime(mu)
    try:
        margin = dissipation_margin(mu)
    except DomainError as exc:
        margin = None
        log.info("no dissipation margin: %s", exc)
    out = {"mu": list(mu.mu), "eps_penalty": mu.eps_penalty, "lambda1": dc.lambda1, "lambda2": dc.lambda2,
           "alpha": dc.alpha, "parodi_defect": dc.parodi_defect, "regime": rep.tag.value,
           "failed": list(rep.failed), "margin": margin}
    print(json.dumps(out, indent=2))
    return EXIT_OK


def cmd_linstab(args) -> int:
    import math

    import numpy as np

    from .coefficients import DomainError
    from .io import write_csv
    from .linstab import (LeslieUnstableParams, dispersion_roots, gpq, is_stable, solve_pq_system,
                          solve_theta0_unstable, theta_sweep, unstable_mode)

    mu, raw = _coefficients(args)
    eps = args.epsilon_leslie if args.epsilon_leslie is not None else raw.get("epsilon_leslie")
    thetas = np.linspace(0.0, math.pi / 2, args.thetas).tolist()
    sweep = theta_sweep(mu, args.m, thetas)
    report = {"mu": list(mu.mu), "sweep": sweep, "verdict": "stable" if all(r["stable"] for r in sweep) else "unstable"}
    try:
        report["pq_root"] = solve_pq_system(mu)
    except DomainError as exc:
        report["pq_root"] = None
        report["pq_root_note"] = str(exc)
    if eps is not None:
        params = LeslieUnstableParams(mu, float(eps))
        theta0 = solve_theta0_unstable(params)
        g, p, q = gpq(theta0, mu)
        modes = [unstable_mode(params, m).to_json() for m in args.m]
        roots = {str(m): [[w.real, w.imag] for w in dispersion_roots(m, theta0, mu)] for m in args.m}
        report.update(theta0=theta0, g=g, p=p, q=q, roots_at_theta0=roots, modes=modes,
                      verdict="unstable" if not is_stable([complex(*r) for rs in roots.values() for r in rs])
                      else report["verdict"])
    if args.out:
        write_csv(args.out, ["m", "theta", "re_omega1", "im_omega1", "re_omega2", "im_omega2", "stable"],
                  [[r["m"], r["theta"], *r["omega1"], *r["omega2"], float(r["stable"])] for r in sweep])
    print(json.dumps(report, indent=2))
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import format_table, run_suite

    results = run_suite(small=args.small, name_filter=args.filter)
    print(format_table(results))
    failed = [r.name for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_OK if not failed else EXIT_DOMAIN


def cmd_simulate(args) -> int:
    from pathlib import Path

    from .io import config_from_dict, load_config_json
    from .runner import run_and_record

    raw = load_config_json(args.config)
    grid = dict(raw.get("grid", {}))
    if args.n is not None:
        grid["n"] = args.n
    if args.dim is not None:
        grid["dim"] = args.dim
    raw["grid"] = grid
    if args.dt is not None:
        raw["dt"] = args.dt
    if args.t_end is not None:
        raw["t_end"] = args.t_end
    cfg = config_from_dict(raw, args.config, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    summary = run_and_record(cfg, out)
    print(json.dumps({"out": str(out), **summary}, indent=2))
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "coeffs": cmd_coeffs, "linstab": cmd_linstab, "verify": cmd_verify}


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        _apply_thread_cap()
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN

    from .solver import BlowupError

    try:
        return COMMANDS[args.command](args)
    except BlowupError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:  # DomainError, ConfigError, UsageError, DataError
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
