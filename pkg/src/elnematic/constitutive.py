"""Pointwise constitutive quantities of the penalised Ericksen-Leslie model.

All functions take real-space arrays in the layout of :mod:`elnematic.spectral`.
Passing ``grid`` makes the result dealiased (products formed in real space,
then truncated with the two-thirds rule).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coefficients import DomainError, LeslieCoefficients
from .spectral import DataError, TorusGrid, dealias, jacobian, strain_vorticity

SYMMETRY_TOL = 1e-10


def matvec(M: np.ndarray, u: np.ndarray) -> np.ndarray:
    """(M u)_i = M_ij u_j, pointwise."""
    return np.sum(M * u[None], axis=1)


def dot(u: np.ndarray, w: np.ndarray) -> np.ndarray:
    return np.sum(u * w, axis=0)


def outer(u: np.ndarray, w: np.ndarray) -> np.ndarray:
    """(u (x) w)_ij = u_i w_j, pointwise."""
    return u[:, None] * w[None, :]


def _maybe_dealias(grid, f):
    return f if grid is None else dealias(grid, f)


def penalty_density(d: np.ndarray, eps: float) -> np.ndarray:
    return 0.25 / eps ** 2 * (dot(d, d) - 1.0) ** 2


def gl_force(d: np.ndarray, eps_penalty: float) -> np.ndarray:
    """Ginzburg-Landau force f(d) = (|d|^2 - 1) d / eps^2."""
    if not eps_penalty > 0:
        raise DomainError("eps_penalty must be > 0")
    return (dot(d, d) - 1.0) / eps_penalty ** 2 * d


def gl_force_jacobian(d: np.ndarray, eps_penalty: float) -> np.ndarray:
    """f'(d)_ik = [(|d|^2 - 1) delta_ik + 2 d_i d_k] / eps^2."""
    dim = d.shape[0]
    eye = np.eye(dim).reshape((dim, dim) + (1,) * (d.ndim - 1))
    return ((dot(d, d) - 1.0) * eye + 2.0 * outer(d, d)) / eps_penalty ** 2


@dataclass
class KinematicTerms:
    N: np.ndarray
    Adotd: np.ndarray
    dTAd: np.ndarray


def kinematic_terms(grid: TorusGrid, v: np.ndarray, d: np.ndarray, d_t: np.ndarray) -> KinematicTerms:
    """Corotational rate N = d_t + (v.grad) d - Omega d, plus A d and d^T A d."""
    for f in (v, d, d_t):
        grid.check(f, 1)
    A, Om = strain_vorticity(grid, v)
    Jd = jacobian(grid, d)
    adv = matvec(Jd, v)
    N = d_t + dealias(grid, adv) - dealias(grid, matvec(Om, d))
    Ad = dealias(grid, matvec(A, d))
    dTAd = dealias(grid, dot(d, matvec(A, d)))
    return KinematicTerms(N, Ad, dTAd)


def check_symmetric(A: np.ndarray, tol: float = SYMMETRY_TOL) -> None:
    err = np.max(np.abs(A - np.swapaxes(A, 0, 1))) if A.size else 0.0
    if err > tol:
        raise DataError(f"strain tensor asymmetric by {err:.3e} (> {tol:g})")


def leslie_stress(A: np.ndarray, Omega: np.ndarray, N: np.ndarray, d: np.ndarray,
                  mu: LeslieCoefficients, grid: TorusGrid | None = None) -> np.ndarray:
    """Leslie viscous stress.

    sigma_ij = mu1 (d.A d) d_i d_j + mu2 N_i d_j + mu3 d_i N_j + mu4 A_ij
               + mu5 (A d)_i d_j + mu6 d_i (A d)_j

    ``Omega`` does not enter explicitly (it is folded into ``N``) but is
    accepted so the call mirrors the kinematic decomposition.
    """
    check_symmetric(A)
    Ad = matvec(A, d)
    sigma = mu.mu4 * A
    if mu.mu1:
        sigma = sigma + mu.mu1 * dot(d, Ad) * outer(d, d)
    sigma = sigma + mu.mu2 * outer(N, d) + mu.mu3 * outer(d, N)
    sigma = sigma + mu.mu5 * outer(Ad, d) + mu.mu6 * outer(d, Ad)
    return _maybe_dealias(grid, sigma)


def ericksen_stress(grid: TorusGrid, d: np.ndarray, dealiased: bool = True) -> np.ndarray:
    """(grad d . grad d)_ij = sum_k d_i d_k d_j d_k (derivatives in i, j)."""
    J = jacobian(grid, d)  # J[k, i] = d_i d_k
    E = np.sum(J[:, :, None] * J[:, None, :], axis=0)
    return dealias(grid, E) if dealiased else E


def stress_split(d: np.ndarray, G: np.ndarray, lambda1: float, lambda2: float) -> np.ndarray:
    """Conservative stress  -1/2 (1 - l2/l1) G (x) d + 1/2 (1 + l2/l1) d (x) G."""
    if lambda1 == 0:
        raise DomainError("stress_split: lambda1 = 0 violates (lama1a)")
    r = lambda2 / lambda1
    return -0.5 * (1.0 - r) * outer(G, d) + 0.5 * (1.0 + r) * outer(d, G)


def eta56(lambda1: float, lambda2: float) -> tuple[float, float]:
    q = lambda2 * lambda2 / lambda1
    return 0.5 * (lambda2 - q), -0.5 * (lambda2 + q)


def corotational_from_director_eq(G: np.ndarray, Ad: np.ndarray, lambda1: float, lambda2: float) -> np.ndarray:
    """N solving lambda1 N + lambda2 A d = -G, i.e. the director equation."""
    return -(G + lambda2 * Ad) / lambda1


@dataclass
class StressFields:
    sigma: np.ndarray
    ericksen: np.ndarray
    split_conservative: np.ndarray


def stress_fields(grid: TorusGrid, v: np.ndarray, d: np.ndarray, G: np.ndarray,
                  mu: LeslieCoefficients) -> StressFields:
    """Leslie, Ericksen and split stresses with N taken from the director equation."""
    A, Om = strain_vorticity(grid, v)
    Ad = matvec(A, d)
    N = corotational_from_director_eq(G, Ad, mu.lambda1, mu.lambda2)
    return StressFields(
        sigma=leslie_stress(A, Om, N, d, mu, grid),
        ericksen=ericksen_stress(grid, d),
        split_conservative=dealias(grid, stress_split(d, G, mu.lambda1, mu.lambda2)),
    )


def dissipation_from_stress(grid: TorusGrid, v: np.ndarray, d: np.ndarray, N: np.ndarray,
                            mu: LeslieCoefficients) -> float:
    """Total dissipation as the work of the viscous stresses.

    D = int sigma : grad v + h . (N + Omega d) with the viscous molecular field
    h = -(lambda1 N + lambda2 A d); ``N + Omega d`` is the material rate of d.
    """
    J = jacobian(grid, v)
    A = 0.5 * (J + np.swapaxes(J, 0, 1))
    Om = 0.5 * (J - np.swapaxes(J, 0, 1))
    Ad = matvec(A, d)
    sigma = leslie_stress(A, Om, N, d, mu)
    h = -(mu.lambda1 * N + mu.lambda2 * Ad)
    density = np.sum(sigma * J, axis=(0, 1)) + dot(h, N + matvec(Om, d))
    return float(np.sum(density)) * grid.cell_volume
