"""Self-check suite behind ``elnematic verify``.

Each check is a small function returning ``(passed, detail)``; the suite
runs them in a fixed order on small grids so the whole table is cheap.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .coefficients import LeslieCoefficients, MoleculeShape, dissipation_margin, simplified_model
from .constitutive import (corotational_from_director_eq, dissipation_from_stress, dot, eta56,
                           gl_force, leslie_stress, matvec, outer, penalty_density, stress_split)
from .diagnostics import appendix_terms, energy_rate, energy_report, half_dA_dt_exact, is_monotone
from .linstab import (LeslieUnstableParams, dispersion_residual, dispersion_roots, gpq,
                      linearized_residuals, solve_theta0_unstable, unstable_mode)
from .solver import RandomSmooth, RunConfig, initial_state, simulate, step
from .spectral import TorusGrid, band_limited_random, divergence, leray_project, norm_l2, strain_vorticity

SPHERE = LeslieCoefficients(0.0, -0.5, 0.5, 1.0, 0.2, 0.2)
CASE_II = LeslieCoefficients(0.0, -0.6, 0.4, 1.0, 0.3, 0.5)
UNSTABLE = LeslieUnstableParams(LeslieCoefficients(0.0, 0.5, 1.35, 0.05, 0.0, 1.0), 0.15)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def _random_fields(grid: TorusGrid, seed: int):
    rng = np.random.default_rng(seed)
    v = leray_project(grid, band_limited_random(grid, rng, 3, (grid.dim,)))
    d = band_limited_random(grid, rng, 3, (grid.dim,))
    G = band_limited_random(grid, rng, 3, (grid.dim,))
    return v, d, G


def _rel(a, b) -> float:
    scale = max(float(np.max(np.abs(a))), float(np.max(np.abs(b))), 1e-300)
    return float(np.max(np.abs(a - b))) / scale


def check_parodi_cancellation(grids, draws):
    worst = 0.0
    for grid in grids:
        for s in range(draws):
            v, d, G = _random_fields(grid, s)
            A, _ = strain_vorticity(grid, v)
            Ad = matvec(A, d)
            mu = SPHERE
            N = corotational_from_director_eq(G, Ad, mu.lambda1, mu.lambda2)
            I = lambda f: float(np.sum(f)) * grid.cell_volume
            lhs = mu.lambda1 * I(dot(N, N)) + (mu.lambda2 - mu.mu2 - mu.mu3) * I(dot(N, Ad))
            rhs = I(dot(G, G)) / mu.lambda1 - mu.lambda2 ** 2 / mu.lambda1 * I(dot(Ad, Ad))
            worst = max(worst, abs(lhs - rhs) / max(abs(lhs), abs(rhs)))
    return worst <= 1e-12, f"max rel {worst:.2e}"


def check_stress_split(grids, draws):
    worst = 0.0
    for grid in grids:
        for s in range(draws):
            v, d, G = _random_fields(grid, 100 + s)
            rng = np.random.default_rng(s)
            lam1, lam2 = -rng.uniform(0.2, 2.0), rng.uniform(-1.0, 1.0)
            A, _ = strain_vorticity(grid, v)
            Ad = matvec(A, d)
            N = corotational_from_director_eq(G, Ad, lam1, lam2)
            e5, e6 = eta56(lam1, lam2)
            mu2, mu3 = 0.5 * (lam1 - lam2), -0.5 * (lam1 + lam2)
            lhs = stress_split(d, G, lam1, lam2)
            rhs = mu2 * outer(N, d) + mu3 * outer(d, N) + e5 * outer(Ad, d) + e6 * outer(d, Ad)
            worst = max(worst, _rel(lhs, rhs))
    return worst <= 1e-12, f"max rel {worst:.2e}"


def check_simplified_stress(grids, draws):
    worst = 0.0
    for grid in grids:
        for s in range(draws):
            v, d, G = _random_fields(grid, 200 + s)
            kind = list(MoleculeShape)[s % 3]
            mu = simplified_model(kind, -0.3 - 0.1 * s)
            A, Om = strain_vorticity(grid, v)
            N = corotational_from_director_eq(G, matvec(A, d), mu.lambda1, mu.lambda2)
            lhs = leslie_stress(A, Om, N, d, mu) - mu.mu4 * A
            rhs = -(mu.mu2 / mu.lambda1) * outer(G, d) - (mu.mu3 / mu.lambda1) * outer(d, G)
            worst = max(worst, _rel(lhs, rhs))
    return worst <= 1e-12, f"max rel {worst:.2e}"


def check_dissipation_form(grids, draws):
    worst = 0.0
    for grid in grids:
        for s in range(draws):
            v, d, G = _random_fields(grid, 300 + s)
            mu = SPHERE
            A, _ = strain_vorticity(grid, v)
            Ad = matvec(A, d)
            N = corotational_from_director_eq(G, Ad, mu.lambda1, mu.lambda2)
            I = lambda f: float(np.sum(f)) * grid.cell_volume
            gv2 = I(np.sum(A * A, axis=(0, 1))) * 2.0
            M = N + mu.lambda2 / mu.lambda1 * Ad
            ref = (mu.mu1 * I(dot(d, Ad) ** 2) + 0.5 * mu.mu4 * gv2 - mu.lambda1 * I(dot(M, M))
                   + (mu.mu5 + mu.mu6 + mu.lambda2 ** 2 / mu.lambda1) * I(dot(Ad, Ad)))
            D = dissipation_from_stress(grid, v, d, N, mu)
            worst = max(worst, abs(D - ref) / abs(ref))
    return worst <= 1e-11, f"max rel {worst:.2e}"


def check_gl_gradient(grids, draws):
    worst = 0.0
    h = 1e-5
    for grid in grids:
        _, d, w = _random_fields(grid, 400)
        E = lambda x: float(np.sum(penalty_density(x, 1.0))) * grid.cell_volume
        fd = (E(d + h * w) - E(d - h * w)) / (2 * h)
        exact = float(np.sum(gl_force(d, 1.0) * w)) * grid.cell_volume
        worst = max(worst, abs(fd - exact) / abs(exact))
    return worst <= 1e-6, f"max rel {worst:.2e}"


def _resolved_grids(grids):
    """Grids on which band-1 data keeps every product of the right-hand side unaliased."""
    return [TorusGrid(g.dim, max(g.n, 16), g.length) for g in grids]


def check_energy_rate(grids, draws):
    worst = 0.0
    for grid in _resolved_grids(grids):
        for mu in (SPHERE, CASE_II):
            st = initial_state(grid, RandomSmooth(seed=7, band=1))
            rate = energy_rate(st, mu, grid)
            D = energy_report(st, mu, grid).dissipation
            worst = max(worst, abs(rate + D) / max(1.0, abs(D)))
    return worst <= 1e-10, f"max |dE/dt + D| / D = {worst:.2e}"


def check_appendix_expansion(grids, draws):
    worst = 0.0
    for grid in _resolved_grids(grids):
        for mu in (SPHERE, CASE_II):
            st = initial_state(grid, RandomSmooth(seed=11, band=1))
            terms = appendix_terms(st, mu, grid)
            exact = half_dA_dt_exact(st, mu, grid)
            worst = max(worst, abs(exact - terms.rhs_total) / terms.scale)
    return worst <= 1e-10, f"max rel {worst:.2e}"


def check_appendix_closure(grids, draws):
    grid = grids[0]
    st = initial_state(grid, RandomSmooth(seed=1))
    errs = []
    for dt in (4e-5, 2e-5, 1e-5):
        later = step(st, RunConfig(grid, SPHERE, dt, dt))
        errs.append(appendix_terms(st, SPHERE, grid, later=later).closure_error)
    order = math.log2(errs[1] / errs[2]) if errs[2] > 0 else math.inf
    return errs[-1] <= 1e-2 and order >= 0.9, f"errors {', '.join(f'{e:.2e}' for e in errs)}; order {order:.2f}"


def check_dispersion(grids, draws):
    worst = 0.0
    for th in np.linspace(0, math.pi / 2, 9):
        for m in (1.0, 2.0, 4.0):
            for mu in (SPHERE, UNSTABLE.mu):
                g, _, _ = gpq(th, mu)
                for w in dispersion_roots(m, th, mu):
                    worst = max(worst, dispersion_residual(w, m, th, mu) / (m ** 4 * max(1.0, abs(g))))
    stable = all(w.imag <= 1e-12 for th in np.linspace(0, math.pi / 2, 9) for m in (1, 2, 4)
                 for w in dispersion_roots(m, th, SPHERE))
    return worst <= 1e-12 and stable, f"max scaled residual {worst:.2e}; CaseI stable {stable}"


def check_unstable_mode(grids, draws):
    mode = unstable_mode(UNSTABLE, 2.0)
    res = linearized_residuals(mode, UNSTABLE.mu)
    th = solve_theta0_unstable(UNSTABLE)
    ok = max(res.values()) <= 1e-10 and abs(mode.growth_rate - 0.4725) <= 1e-12 \
        and abs(math.cos(th) ** 2 - 0.075) <= 1e-12
    return ok, f"growth {mode.growth_rate:.12g}; residuals {max(res.values()):.1e}"


def check_margin(grids, draws):
    mu = CASE_II
    c = mu.lambda2 - mu.mu2 - mu.mu3
    M = np.array([[-mu.lambda1, -c / 2], [-c / 2, mu.mu5 + mu.mu6]])
    oracle = float(np.linalg.eigvalsh(M)[0])
    eta = dissipation_margin(mu)
    return abs(eta - oracle) <= 1e-12 and eta > 0, f"eta {eta:.12g} vs eigvalsh {oracle:.12g}"


def check_divergence_free(grids, draws):
    worst = 0.0
    for grid in grids:
        cfg = RunConfig(grid, SPHERE, 1e-4, 2e-3, RandomSmooth(seed=5))
        def sink(k, s):
            nonlocal worst
            worst = max(worst, norm_l2(grid, divergence(grid, s.v)) / max(norm_l2(grid, s.v), 1e-300))
        simulate(cfg, [sink])
    return worst <= 1e-10, f"max ||div v||/||v|| = {worst:.2e}"


def check_energy_monotone(grids, draws):
    ok = True
    for grid in grids:
        for mu in (SPHERE, CASE_II):
            reps = []
            simulate(RunConfig(grid, mu, 1e-4, 5e-3, RandomSmooth(seed=2)),
                     [lambda k, s: reps.append(energy_report(s, mu, grid))])
            ok &= is_monotone(reps)
    return ok, "E_total non-increasing" if ok else "energy increased"


def check_determinism(grids, draws):
    grid = grids[0]
    cfg = RunConfig(grid, SPHERE, 1e-4, 2e-3, RandomSmooth(seed=9))
    a = simulate(cfg)
    b = simulate(cfg)
    same = a.v.tobytes() == b.v.tobytes() and a.d.tobytes() == b.d.tobytes()
    return same, "bit-identical" if same else "runs differ"


CHECKS: list[tuple[str, Callable]] = [
    ("parodi_cancellation", check_parodi_cancellation),
    ("stress_split_eta56", check_stress_split),
    ("simplified_model_stress", check_simplified_stress),
    ("dissipation_from_stress", check_dissipation_form),
    ("gl_force_gradient", check_gl_gradient),
    ("energy_rate_identity", check_energy_rate),
    ("appendix_expansion", check_appendix_expansion),
    ("appendix_closure", check_appendix_closure),
    ("dispersion_residuals", check_dispersion),
    ("unstable_mode", check_unstable_mode),
    ("dissipation_margin", check_margin),
    ("divergence_free", check_divergence_free),
    ("energy_monotone", check_energy_monotone),
    ("determinism", check_determinism),
]


def run_suite(small: bool = True, name_filter: str | None = None) -> list[CheckResult]:
    grids = [TorusGrid(2, 16), TorusGrid(3, 8)] if small else [TorusGrid(2, 64), TorusGrid(3, 16)]
    draws = 50
    out = []
    for name, fn in CHECKS:
        if name_filter and name_filter not in name:
            continue
        t0 = time.perf_counter()
        try:
            passed, detail = fn(grids, draws)
        except Exception as exc:  # a crashing check is a failing check
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(CheckResult(name, bool(passed), detail, time.perf_counter() - t0))
    return out


def format_table(results: list[CheckResult]) -> str:
    width = max((len(r.name) for r in results), default=4)
    lines = [f"{'check':<{width}}  result  time(s)  detail"]
    for r in results:
        lines.append(f"{r.name:<{width}}  {'PASS' if r.passed else 'FAIL':<6}  {r.seconds:7.2f}  {r.detail}")
    return "\n".join(lines)
