import math

import numpy as np
import pytest

from elnematic.coefficients import LeslieCoefficients
from elnematic.diagnostics import (CSV_COLUMNS, appendix_terms, convergence_monitor, decay_functional,
                                   energy_law_residual, energy_rate, energy_report, half_dA_dt_exact,
                                   is_monotone)
from elnematic.solver import RandomSmooth, RunConfig, State, initial_state, simulate, step
from elnematic.spectral import TorusGrid, UsageError

SPHERE = LeslieCoefficients(0.0, -0.5, 0.5, 1.0, 0.2, 0.2)
CASE_II = LeslieCoefficients(0.0, -0.6, 0.4, 1.0, 0.3, 0.5)
WITH_MU1 = LeslieCoefficients(0.3, -0.7, 0.3, 0.8, 0.5, 0.1)
G = TorusGrid(2, 32)


def test_energy_of_known_state():
    g = G
    x, y = g.x
    v = np.array([np.sin(2 * np.pi * y), np.zeros(g.shape)])
    d = np.array([np.cos(2 * np.pi * x), np.sin(2 * np.pi * x)])
    r = energy_report(State(v, d), SPHERE, g)
    assert r.E_kin == pytest.approx(0.25, rel=1e-12)
    assert r.E_grad == pytest.approx(0.5 * 4 * math.pi ** 2, rel=1e-12)
    assert r.E_penalty == pytest.approx(0.0, abs=1e-25)


@pytest.mark.parametrize("mu", [SPHERE, CASE_II, WITH_MU1])
def test_energy_rate_equals_minus_dissipation(mu):
    s = initial_state(G, RandomSmooth(seed=3))
    assert energy_rate(s, mu, G) == pytest.approx(-energy_report(s, mu, G).dissipation, rel=1e-10)


@pytest.mark.parametrize("mu", [SPHERE, CASE_II, WITH_MU1])
def test_appendix_expansion_exact(mu):
    s = initial_state(G, RandomSmooth(seed=4))
    terms = appendix_terms(s, mu, G)
    assert half_dA_dt_exact(s, mu, G) == pytest.approx(terms.rhs_total, abs=1e-10 * terms.scale)


def test_transport_correction_cancels_i14():
    s = initial_state(G, RandomSmooth(seed=4))
    terms = appendix_terms(s, SPHERE, G)
    assert terms.I[13] == pytest.approx(-terms.transport_correction, rel=1e-14)
    assert abs(terms.I[13]) > 1e-8 * terms.scale
    assert terms.I15 == 0.0


def test_i15_only_without_parodi():
    s = initial_state(G, RandomSmooth(seed=4))
    assert appendix_terms(s, CASE_II, G).I15 != 0.0


def test_appendix_left_terms_nonnegative():
    s = initial_state(G, RandomSmooth(seed=6))
    assert all(v >= 0 for v in appendix_terms(s, WITH_MU1, G).lhs_extra.values())


def test_closure_first_order():
    s0 = initial_state(G, RandomSmooth(seed=1))
    errs = []
    for dt in (4e-5, 2e-5, 1e-5):
        s1 = step(s0, RunConfig(G, SPHERE, dt, dt))
        errs.append(appendix_terms(s0, SPHERE, G, later=s1).closure_error)
    assert math.log2(errs[1] / errs[2]) >= 0.9
    with pytest.raises(UsageError):
        appendix_terms(s0, SPHERE, G, later=s0)


def test_residual_usage_errors():
    s = initial_state(G, RandomSmooth(seed=1))
    r = energy_report(s, SPHERE, G)
    with pytest.raises(UsageError):
        energy_law_residual([r, r], SPHERE)
    reps = [energy_report(State(s.v, s.d, t), SPHERE, G) for t in (0.0, 0.1, 0.3)]
    with pytest.raises(UsageError):
        energy_law_residual(reps, SPHERE)


def test_residual_small_on_short_run():
    reps = []
    simulate(RunConfig(G, SPHERE, 1e-4, 5e-3, RandomSmooth(seed=2)), [lambda k, s: reps.append(energy_report(s, SPHERE, G))])
    res = energy_law_residual(reps, SPHERE)
    assert math.isnan(res[0]) and math.isnan(res[-1])
    assert np.nanmax(np.abs(res)) <= 1e-3


def test_inequality_gap_case_two():
    reps = []
    simulate(RunConfig(G, CASE_II, 1e-4, 5e-3, RandomSmooth(seed=2)), [lambda k, s: reps.append(energy_report(s, CASE_II, G))])
    assert np.nanmax(energy_law_residual(reps, CASE_II)) <= 1e-6
    assert not reps[0].parodi


def test_is_monotone_tolerance():
    class R:
        def __init__(self, E):
            self.E_total = E
    assert is_monotone([R(1.0), R(1.0 + 5e-9), R(0.5)])
    assert not is_monotone([R(1.0), R(1.0 + 2e-8)])


def test_row_matches_columns():
    r = energy_report(initial_state(G, RandomSmooth(seed=1)), SPHERE, G)
    assert len(r.row()) == len(CSV_COLUMNS)


def test_convergence_monitor_power_law():
    t = np.linspace(0, 50, 400)
    fit = convergence_monitor(t, 3.0 * (1 + t) ** -2.5)
    assert fit.fitted_power == pytest.approx(2.5, rel=1e-10)
    assert fit.r_squared == pytest.approx(1.0)


def test_convergence_monitor_threshold_time():
    t = np.linspace(0, 10, 101)
    fit = convergence_monitor(t, np.exp(-2 * t), threshold=1e-6)
    assert fit.below_threshold_time == pytest.approx(7.0)


def test_decay_functional_zero_at_equilibrium():
    d = np.zeros((2,) + G.shape)
    d[1] = 1.0
    assert decay_functional(State(np.zeros_like(d), d), SPHERE, G) == 0.0


def test_decay_functional_uses_full_h1_norm():
    x, y = G.x
    v = np.array([np.sin(2 * np.pi * y), np.zeros(G.shape)])
    d = np.zeros((2,) + G.shape)
    d[0] = 1.0
    expected = math.sqrt(0.5 + 0.5 * 4 * math.pi ** 2)
    assert decay_functional(State(v, d), SPHERE, G) == pytest.approx(expected, rel=1e-12)
