"""Plane-wave linear stability of the constrained Ericksen-Leslie system.

Perturbations of the rest state with uniform director ``n`` are taken as
``exp(i (m nu.x - omega t))``; growth means ``Im(omega) > 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from .coefficients import DomainError, LeslieCoefficients, is_parodi
from .spectral import UsageError


def gpq(theta: float, mu: LeslieCoefficients) -> tuple[float, float, float]:
    c2 = math.cos(theta) ** 2
    s2 = math.sin(theta) ** 2
    g = 2 * mu.mu1 * c2 * s2 + (mu.mu3 + mu.mu6) * c2 + mu.mu4 + (mu.mu5 - mu.mu2) * s2
    p = mu.mu2 * s2 - mu.mu3 * c2
    q = (mu.lambda1 + mu.lambda2) * c2 + (mu.lambda1 - mu.lambda2) * s2
    return g, p, q


def _q(theta, mu):
    return gpq(theta, mu)[2]


def solve_pq_system(mu: LeslieCoefficients) -> float | None:
    """Common root of p and q on [0, pi/2]; exists iff Parodi's relation holds."""
    if not mu.lambda1 < 0:
        raise DomainError(f"lambda1 = {mu.lambda1:g} violates (lama1a) lambda1 < 0")
    if not (abs(mu.mu5 - mu.mu6) >= mu.mu3 - mu.mu2 > 0):
        raise DomainError("violates (lambda one is less than lambda two): |mu5-mu6| >= mu3-mu2 > 0")
    if not mu.mu2 * mu.mu3 >= 0:
        raise DomainError(f"mu2*mu3 = {mu.mu2 * mu.mu3:g} < 0; the p = 0 root needs mu2*mu3 >= 0")
    if not is_parodi(mu):
        return None
    if mu.mu2 == 0:
        return math.pi / 2
    return math.atan(math.sqrt(mu.mu3 / mu.mu2))


@dataclass(frozen=True)
class LeslieUnstableParams:
    mu: LeslieCoefficients
    epsilon_leslie: float

    def violations(self, theta0: float | None = None) -> list[str]:
        mu, e = self.mu, self.epsilon_leslie
        out = []
        if not (mu.mu6 > 0 and mu.mu2 > 0):
            out.append("(Le1) mu6 > 0, mu2 > 0")
        if not mu.mu5 < min(mu.mu2, mu.mu6):
            out.append("(Le2) mu5 < min(mu2, mu6)")
        target = mu.mu6 - mu.mu5 + mu.mu2 - e
        if not math.isclose(mu.mu3, target, rel_tol=1e-12, abs_tol=1e-12):
            out.append(f"(Le3a) mu3 = mu6 - mu5 + mu2 - eps = {target:g}, got {mu.mu3:g}")
        denom = 4 * mu.mu6 - 3 * mu.mu5 + 3 * mu.mu2
        bound = min(mu.mu6 - mu.mu5, 2 * mu.mu2,
                    2 * (mu.mu6 - mu.mu5) * (mu.mu2 - mu.mu5) / denom if denom > 0 else -math.inf)
        if not 0 < e < bound:
            out.append(f"(Le3) 0 < eps < {bound:g}, got eps = {e:g}")
        s = 2 * mu.mu6 - mu.mu5 + mu.mu2
        if not 0 <= mu.mu1 < 0.25 * s:
            out.append(f"(Le4) 0 <= mu1 < {0.25 * s:g}")
        if theta0 is not None and not 0 <= mu.mu4 < 0.5 * s * math.cos(theta0) ** 2:
            out.append(f"(Le5) 0 <= mu4 < {0.5 * s * math.cos(theta0) ** 2:g}")
        return out

    @classmethod
    def from_base(cls, mu1, mu2, mu4, mu5, mu6, epsilon_leslie, eps_penalty=1.0):
        """Build the coefficient set with mu3 fixed by (Le3a)."""
        mu3 = mu6 - mu5 + mu2 - epsilon_leslie
        return cls(LeslieCoefficients(mu1, mu2, mu3, mu4, mu5, mu6, eps_penalty), epsilon_leslie)


def solve_theta0_unstable(params: LeslieUnstableParams) -> float:
    """Angle in (0, pi/2) where q vanishes but p does not."""
    bad = [v for v in params.violations() if v.startswith(("(Le1)", "(Le2)", "(Le3"))]
    if bad:
        raise DomainError("unstable-mode regime violated: " + "; ".join(bad))
    mu, e = params.mu, params.epsilon_leslie
    theta = math.atan(math.sqrt((2 * (mu.mu6 - mu.mu5) - e) / e))
    # Newton polish on q(theta) = lambda1 + lambda2 cos(2 theta)
    for _ in range(3):
        dq = -2.0 * mu.lambda2 * math.sin(2 * theta)
        if dq == 0:
            break
        step = _q(theta, mu) / dq
        theta -= step
        if abs(step) < 1e-16:
            break
    return theta


def dispersion_roots(m: float, theta: float, mu: LeslieCoefficients) -> tuple[complex, complex]:
    """Roots of lambda1 w^2 + i m^2 (lambda1 g/2 + p q/2 - 1) w + m^4 g/2 = 0."""
    lam1 = mu.lambda1
    if lam1 == 0:
        raise DomainError("dispersion_roots: lambda1 = 0 violates (lama1a)")
    g, p, q = gpq(theta, mu)
    if m == 0:
        return 0j, 0j
    a = lam1
    b = 1j * m * m * (0.5 * lam1 * g + 0.5 * p * q - 1.0)
    c = 0.5 * m ** 4 * g
    disc = np.sqrt(complex(b * b - 4 * a * c))
    # pick the numerically stable pairing
    s = -b - disc if abs(-b - disc) >= abs(-b + disc) else -b + disc
    w1 = s / (2 * a)
    w2 = (2 * c) / s if s != 0 else -b / (2 * a)
    return complex(w1), complex(w2)


def dispersion_residual(omega: complex, m: float, theta: float, mu: LeslieCoefficients) -> float:
    g, p, q = gpq(theta, mu)
    lam1 = mu.lambda1
    return abs(lam1 * omega ** 2 + 1j * m * m * (0.5 * lam1 * g + 0.5 * p * q - 1.0) * omega + 0.5 * m ** 4 * g)


def is_stable(roots, tol: float = 1e-12) -> bool:
    return all(w.imag <= tol for w in roots)


@dataclass(frozen=True)
class PlaneWaveMode:
    theta: float
    m: float
    nu: np.ndarray
    n: np.ndarray
    a: np.ndarray
    b: np.ndarray
    omega: complex
    C: complex  # multiplies the pressure perturbation (closed form of the x-momentum balance)
    D: complex  # multiplies the director-tension perturbation
    growth_rate: float

    def to_json(self) -> dict:
        cx = lambda z: [z.real, z.imag]
        return {
            "theta": self.theta, "m": self.m, "nu": self.nu.tolist(), "n": self.n.tolist(),
            "a": self.a.tolist(), "b": self.b.tolist(), "omega": cx(self.omega),
            "C": cx(self.C), "D": cx(self.D), "growth_rate": self.growth_rate,
        }


def in_plane_geometry(theta: float, phi: float = 0.0, dim: int = 2) -> tuple[np.ndarray, np.ndarray]:
    """nu = (cos phi, sin phi[, 0]) and a unit n in the same plane with nu.n = sin(theta)."""
    nu = np.zeros(dim)
    perp = np.zeros(dim)
    nu[:2] = math.cos(phi), math.sin(phi)
    perp[:2] = -math.sin(phi), math.cos(phi)
    n = math.sin(theta) * nu + math.cos(theta) * perp
    return nu, n


def unstable_mode(params: LeslieUnstableParams, m: float, nu: np.ndarray | None = None,
                  n: np.ndarray | None = None, dim: int = 2) -> PlaneWaveMode:
    if m == 0:
        raise DomainError("unstable_mode needs a nonzero wave number m")
    theta0 = solve_theta0_unstable(params)
    bad = [v for v in params.violations(theta0) if v.startswith(("(Le4)", "(Le5)"))]
    if bad:
        raise DomainError("no unstable plane wave: " + "; ".join(bad))
    if nu is None or n is None:
        nu, n = in_plane_geometry(theta0, dim=dim)
    nu = np.asarray(nu, dtype=float)
    n = np.asarray(n, dtype=float)
    s = math.sin(theta0)
    if abs(float(nu @ n) - s) > 1e-10:
        raise UsageError(f"nu.n = {float(nu @ n):.12g} must equal sin(theta0) = {s:.12g}")
    mu = params.mu
    g, _, _ = gpq(theta0, mu)
    omega = -0.5j * m * m * g
    C = 0.5j * m * s * (g + mu.mu2 - mu.mu4 + mu.mu5 * math.cos(2 * theta0))
    D = -0.5j * (mu.lambda2 - mu.lambda1) * m * s
    return PlaneWaveMode(theta0, m, nu, n, np.zeros_like(n), n - nu * s, omega, C, D, omega.imag)


def linearized_residuals(mode: PlaneWaveMode, mu: LeslieCoefficients,
                         tension_sign: float = 1.0) -> dict[str, float]:
    """Relative residuals of the linearised constrained equations for a plane wave.

    Derivatives act as ``d/dx_j -> i m nu_j`` and ``d/dt -> -i omega``.  The
    pressure amplitude is ``mode.C`` and the director tension ``mode.D``.
    Each residual is divided by the sum of the magnitudes of its terms.
    """
    nu, n = mode.nu, mode.n
    a, b = mode.a.astype(complex), mode.b.astype(complex)
    kk = 1j * mode.m * nu
    ddt = -1j * mode.omega
    gv = np.outer(b, kk)                  # (grad v)_ij = d_j v_i
    A = 0.5 * (gv + gv.T)
    Om = 0.5 * (gv - gv.T)
    An = A @ n
    N = ddt * a - Om @ n
    sigma = [mu.mu1 * (n @ An) * np.outer(n, n), mu.mu2 * np.outer(N, n), mu.mu3 * np.outer(n, N),
             mu.mu4 * A, mu.mu5 * np.outer(An, n), mu.mu6 * np.outer(n, An)]
    lev_terms = [ddt * b, kk * mode.C] + [-(s @ kk) for s in sigma]
    lam1, lam2 = mu.lambda1, mu.lambda2
    led_terms = [lam1 * N, lam2 * An, (kk @ kk) * a, tension_sign * mode.D * n]

    def rel(terms):
        r = np.linalg.norm(sum(terms))
        sc = sum(np.linalg.norm(t) for t in terms)
        return float(r / sc) if sc > 0 else float(r)

    return {
        "lev": rel(lev_terms),
        "imc": float(abs(kk @ b)) / max(abs(mode.m) * float(np.linalg.norm(b)), 1e-300),
        "led": rel(led_terms),
        "led2": float(abs(n @ a)),
    }


def theta_sweep(mu: LeslieCoefficients, ms, thetas) -> list[dict]:
    rows = []
    for m in ms:
        for th in thetas:
            w1, w2 = dispersion_roots(m, th, mu)
            rows.append({"m": m, "theta": th, "omega1": [w1.real, w1.imag], "omega2": [w2.real, w2.imag],
                         "stable": is_stable((w1, w2))})
    return rows
