import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from elnematic.coefficients import DomainError, LeslieCoefficients, classify_regime, Regime
from elnematic.linstab import (LeslieUnstableParams, dispersion_residual, dispersion_roots, gpq,
                               in_plane_geometry, is_stable, linearized_residuals, solve_pq_system,
                               solve_theta0_unstable, unstable_mode)
from elnematic.spectral import UsageError

from oracles import gpq_exact, quadratic_roots_companion

FIX = LeslieCoefficients(0.0, 0.5, 1.35, 0.05, 0.0, 1.0)
PARAMS = LeslieUnstableParams(FIX, 0.15)
SPHERE = LeslieCoefficients(0.0, -0.5, 0.5, 1.0, 0.2, 0.2)

# frozen from exact rational arithmetic (see oracles.gpq_exact): cos^2 = eps / (2 (mu6 - mu5))
COS2 = Fraction(3, 40)
G_EXACT, P_EXACT, Q_EXACT = gpq_exact(FIX.mu, COS2)


def test_oracle_values_are_the_closed_forms():
    assert COS2 == Fraction("0.075")
    assert G_EXACT == Fraction("-0.23625")
    assert P_EXACT == Fraction("0.36125")
    assert Q_EXACT == 0


def test_gpq_at_zero():
    g, p, q = gpq(0.0, FIX)
    assert (g, p, q) == pytest.approx((FIX.mu3 + FIX.mu6 + FIX.mu4, -FIX.mu3, FIX.lambda1 + FIX.lambda2))


def test_gpq_only_mu4():
    mu = LeslieCoefficients(0, 0, 0, 0.3, 0, 0)
    for th in np.linspace(0, math.pi / 2, 7):
        assert gpq(th, mu)[0] == pytest.approx(0.3, abs=1e-15)


def test_theta0_fixture():
    th = solve_theta0_unstable(PARAMS)
    assert th == pytest.approx(math.atan(math.sqrt(1.85 / 0.15)), abs=1e-12)
    assert math.cos(th) ** 2 == pytest.approx(float(COS2), abs=1e-12)
    g, p, q = gpq(th, FIX)
    assert g == pytest.approx(float(G_EXACT), abs=1e-12)
    assert p == pytest.approx(float(P_EXACT), abs=1e-12)
    assert abs(q) <= 1e-12


def test_q_changes_sign_across_theta0():
    th = solve_theta0_unstable(PARAMS)
    assert gpq(th - 1e-3, FIX)[2] * gpq(th + 1e-3, FIX)[2] < 0


def test_theta0_decreases_with_epsilon():
    bound = min(1.0, 1.0, 2 * 1.0 * 0.5 / (4 + 1.5))
    eps = np.linspace(0.01, bound * 0.999, 20)
    th = []
    for e in eps:
        p = LeslieUnstableParams.from_base(0.0, 0.5, 0.05, 0.0, 1.0, float(e))
        th.append(solve_theta0_unstable(p))
    assert np.all(np.diff(th) < 0)


@pytest.mark.parametrize("mu, msg", [
    (LeslieCoefficients(0, -0.5, 1.35, 0.05, 0, 1), "Le1"),
    (LeslieCoefficients(0, 0.5, 1.35, 0.05, 0.6, 1), "Le2"),
    (LeslieCoefficients(0, 0.5, 1.0, 0.05, 0.0, 1.0), "Le3"),
])
def test_regime_violations_named(mu, msg):
    with pytest.raises(DomainError, match=msg):
        solve_theta0_unstable(LeslieUnstableParams(mu, 0.15))


def test_le5_violation():
    mu = LeslieCoefficients(0.0, 0.5, 1.35, 0.5, 0.0, 1.0)
    with pytest.raises(DomainError, match="Le5"):
        unstable_mode(LeslieUnstableParams(mu, 0.15), 2.0)


def test_dispersion_fixture_roots():
    th = solve_theta0_unstable(PARAMS)
    w1, w2 = sorted(dispersion_roots(2.0, th, FIX), key=lambda w: w.imag)
    assert w1 == pytest.approx(4j / FIX.lambda1, abs=1e-12)
    assert w1.imag == pytest.approx(-4.705882352941176, abs=1e-12)
    assert w2 == pytest.approx(0.4725j, abs=1e-12)


def test_dispersion_m_zero():
    assert dispersion_roots(0.0, 0.3, FIX) == (0j, 0j)


def test_dispersion_needs_lambda1():
    with pytest.raises(DomainError):
        dispersion_roots(1.0, 0.3, LeslieCoefficients(0, 1, 1, 1, 0, 0))


@given(st.floats(0, math.pi / 2), st.floats(0.1, 8),
       st.tuples(st.floats(0, 1), st.floats(-2, 2), st.floats(-2, 2), st.floats(0.1, 2), st.floats(-2, 2), st.floats(-2, 2)))
def test_roots_match_companion_oracle(th, m, t):
    mu = LeslieCoefficients(*t)
    if abs(mu.lambda1) < 1e-3:
        return
    g, p, q = gpq(th, mu)
    ref = quadratic_roots_companion(mu.lambda1, 1j * m * m * (0.5 * mu.lambda1 * g + 0.5 * p * q - 1), 0.5 * m ** 4 * g)
    got = dispersion_roots(m, th, mu)
    scale = max(1.0, max(abs(r) for r in ref))
    for w in got:
        assert min(abs(w - r) for r in ref) <= 1e-9 * scale
        assert dispersion_residual(w, m, th, mu) <= 1e-12 * m ** 4 * max(1.0, abs(g)) * max(1.0, abs(mu.lambda1)) * scale ** 2


def test_case_one_sets_are_stable():
    for th in np.linspace(0, math.pi / 2, 5):
        for m in (1.0, 2.0, 4.0):
            assert is_stable(dispersion_roots(m, th, SPHERE))


@given(st.floats(0.1, 10), st.floats(0, math.pi / 2))
def test_scale_covariance(c, th):
    g, p, q = gpq(th, FIX)
    gs, ps, qs = gpq(th, FIX.scaled(c))
    assert (gs, ps, qs) == pytest.approx((c * g, c * p, c * q), rel=1e-12, abs=1e-12)


def test_pq_system_parodi_example():
    mu = LeslieCoefficients(0.0, 0.25, 1.0, 1.0, 0.0, 1.25)
    th = solve_pq_system(mu)
    assert th == pytest.approx(math.atan(2.0), abs=1e-12)
    g, p, q = gpq(th, mu)
    assert abs(p) <= 1e-12 and abs(q) <= 1e-12


def test_pq_system_mu3_zero():
    mu = LeslieCoefficients(0.0, -1.0, 0.0, 1.0, 1.0, 0.0)
    assert solve_pq_system(mu) == 0.0


def test_pq_system_non_parodi_is_none():
    assert solve_pq_system(FIX) is None
    grid = np.linspace(0, math.pi / 2, 200)
    assert min(gpq(t, FIX)[1] ** 2 + gpq(t, FIX)[2] ** 2 for t in grid) > 1e-3


def test_pq_system_precondition():
    with pytest.raises(DomainError, match="lama1a"):
        solve_pq_system(LeslieCoefficients(0, 1.0, 0.5, 1, 0, 1))


def test_unstable_mode_fixture():
    md = unstable_mode(PARAMS, 2.0)
    s = math.sin(md.theta)
    assert md.growth_rate == pytest.approx(0.4725, abs=1e-12)
    assert md.omega == pytest.approx(0.4725j, abs=1e-12)
    assert abs(md.n @ md.a) <= 1e-12 and abs(md.nu @ md.b) <= 1e-12
    assert np.allclose(md.b, md.n - md.nu * s)
    assert md.C == pytest.approx(1j * s * (float(G_EXACT) + 0.5 - 0.05 + 0.0), abs=1e-12)
    assert md.D == pytest.approx(-0.5j * (FIX.lambda2 - FIX.lambda1) * 2 * s, abs=1e-12)


def test_unstable_mode_linearized_residuals():
    for m in (1.0, 2.0, 5.0):
        res = linearized_residuals(unstable_mode(PARAMS, m), FIX)
        assert max(res.values()) <= 1e-10


def test_swapped_amplitude_labels_fail_residual():
    # C balances the pressure gradient; using it as the tension leaves a residual
    md = unstable_mode(PARAMS, 2.0)
    from dataclasses import replace
    swapped = replace(md, C=md.D, D=md.C)
    assert max(linearized_residuals(swapped, FIX).values()) > 1e-3


def test_unstable_mode_geometry_check():
    nu, _ = in_plane_geometry(0.3)
    with pytest.raises(UsageError):
        unstable_mode(PARAMS, 2.0, nu=nu, n=np.array([0.0, 1.0]))


@given(st.floats(0, 2 * math.pi), st.sampled_from([2, 3]))
def test_in_plane_geometry(phi, dim):
    th = solve_theta0_unstable(PARAMS)
    nu, n = in_plane_geometry(th, phi, dim)
    assert np.linalg.norm(nu) == pytest.approx(1) and np.linalg.norm(n) == pytest.approx(1)
    assert nu @ n == pytest.approx(math.sin(th), abs=1e-14)
    md = unstable_mode(PARAMS, 2.0, nu, n)
    assert max(linearized_residuals(md, FIX).values()) <= 1e-10


def test_unstable_fixture_is_not_case_two():
    # reported only, never required: this fixture violates both dissipative regimes
    assert classify_regime(FIX).tag is Regime.NEITHER
