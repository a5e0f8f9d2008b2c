"""Energy, dissipation and higher-order functionals of a solver state."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .coefficients import LeslieCoefficients, dissipation_margin, is_parodi
from .constitutive import dot, gl_force_jacobian, matvec, penalty_density
from .solver import Integrator, State
from .spectral import TorusGrid, UsageError, grad_hat

CSV_COLUMNS = ("t", "E_total", "E_kin", "E_grad", "E_penalty", "A",
               "diss_mu1", "diss_mu4", "diss_director", "diss_Ad", "law_residual")


@dataclass
class EnergyReport:
    t: float
    E_total: float
    E_kin: float
    E_grad: float
    E_penalty: float
    A: float
    diss_mu1: float
    diss_mu4: float
    diss_director: float
    diss_Ad: float
    parodi: bool
    norm_N2: float
    norm_Ad2: float
    norm_grad_v: float
    norm_G: float
    law_residual: float = math.nan

    @property
    def dissipation(self) -> float:
        return self.diss_mu1 + self.diss_mu4 + self.diss_director + self.diss_Ad

    def row(self) -> list[float]:
        return [getattr(self, c) for c in CSV_COLUMNS]


def _integral(grid: TorusGrid, f: np.ndarray) -> float:
    return float(np.sum(f)) * grid.cell_volume


def _state_fields(grid: TorusGrid, state: State, mu: LeslieCoefficients):
    it = Integrator(grid, mu)
    vh, dh = it.to_hat(state)
    return it, vh, dh, it.fields(vh, dh)


def energy_report(state: State, mu: LeslieCoefficients, grid: TorusGrid) -> EnergyReport:
    """Energies and dissipation terms of a single state.

    The corotational rate N is taken from the director equation, so the
    report is a function of the state alone.
    """
    it, vh, dh, F = _state_fields(grid, state, mu)
    lam1, lam2 = mu.lambda1, mu.lambda2
    I = lambda f: _integral(grid, f)
    E_kin = 0.5 * I(dot(F.v, F.v))
    E_grad = 0.5 * I(np.sum(F.Jd ** 2, axis=(0, 1)))
    E_pen = I(penalty_density(F.d, mu.eps_penalty))
    grad_v2 = I(np.sum(F.Jv ** 2, axis=(0, 1)))
    G2 = I(dot(F.G, F.G))
    Ad2 = I(dot(F.Ad, F.Ad))
    N2 = I(dot(F.N, F.N))
    dAd = dot(F.d, F.Ad)
    diss_mu1 = mu.mu1 * I(dAd * dAd)
    diss_mu4 = 0.5 * mu.mu4 * grad_v2
    parodi = is_parodi(mu)
    if parodi:
        diss_dir = -G2 / lam1
        diss_Ad = (mu.mu5 + mu.mu6 + lam2 * lam2 / lam1) * Ad2
    else:
        diss_dir = -lam1 * N2 - (lam2 - mu.mu2 - mu.mu3) * I(dot(F.N, F.Ad))
        diss_Ad = (mu.mu5 + mu.mu6) * Ad2
    return EnergyReport(
        t=state.t, E_total=E_kin + E_grad + E_pen, E_kin=E_kin, E_grad=E_grad, E_penalty=E_pen,
        A=grad_v2 + G2, diss_mu1=diss_mu1, diss_mu4=diss_mu4, diss_director=diss_dir,
        diss_Ad=diss_Ad, parodi=parodi, norm_N2=N2, norm_Ad2=Ad2,
        norm_grad_v=math.sqrt(grad_v2), norm_G=math.sqrt(G2),
    )


def energy_rate(state: State, mu: LeslieCoefficients, grid: TorusGrid) -> float:
    """Exact dE/dt of the semi-discrete system, (v, v_t) - (lap d - f, d_t)."""
    it, vh, dh, F = _state_fields(grid, state, mu)
    vt, dt_ = it.full_rhs(state)
    return _integral(grid, dot(F.v, vt)) - _integral(grid, dot(F.G, dt_))


def residual_scale(reports: Sequence[EnergyReport]) -> float:
    return max(1.0, reports[0].dissipation)


def _uniform_spacing(times: np.ndarray) -> float:
    if times.size < 3:
        raise UsageError("energy_law_residual needs at least 3 samples")
    dts = np.diff(times)
    h = dts[0]
    if h <= 0 or np.max(np.abs(dts - h)) > 1e-9 * max(1.0, abs(h)):
        raise UsageError("energy_law_residual needs uniformly spaced samples")
    return float(h)


def energy_law_residual(reports: Sequence[EnergyReport], mu: LeslieCoefficients,
                        scale: float | None = None) -> np.ndarray:
    """Normalised energy-law residual at interior samples.

    With Parodi's relation this is ``(dE/dt + D) / scale`` (an equality).
    Without it, the inequality gap ``max(0, dE/dt - bound) / scale`` where the
    bound uses the eigenvalue dissipation margin when positive.
    Endpoints are NaN.
    """
    times = np.array([r.t for r in reports])
    h = _uniform_spacing(times)
    E = np.array([r.E_total for r in reports])
    if scale is None:
        scale = residual_scale(reports)
    out = np.full(len(reports), np.nan)
    dEdt = (E[2:] - E[:-2]) / (2 * h)
    inner = reports[1:-1]
    if all(r.parodi for r in reports):
        D = np.array([r.dissipation for r in inner])
        out[1:-1] = (dEdt + D) / scale
    else:
        eta = dissipation_margin(mu) if mu.lambda1 < 0 and mu.mu5 + mu.mu6 >= 0 else 0.0
        bound = np.array([-(r.diss_mu1 + r.diss_mu4) - max(eta, 0.0) * (r.norm_Ad2 + r.norm_N2)
                          for r in inner])
        out[1:-1] = np.maximum(0.0, dEdt - bound) / scale
    return out


def is_monotone(reports: Sequence[EnergyReport], rel_tol: float = 1e-8) -> bool:
    E = np.array([r.E_total for r in reports])
    if E.size < 2:
        return True
    slack = rel_tol * max(1.0, E[0])
    return bool(np.all(np.diff(E) <= slack))


# ---------------------------------------------------------------------------
# time derivative of A(t)

@dataclass
class AppendixTerms:
    I: np.ndarray  # I1..I14 in order
    lhs_extra: dict
    transport_correction: float
    I15: float
    closure_error: float = math.nan
    half_dA_fd: float = math.nan

    @property
    def rhs_total(self) -> float:
        return float(np.sum(self.I)) + self.transport_correction + self.I15 - sum(self.lhs_extra.values())

    @property
    def scale(self) -> float:
        return float(np.sum(np.abs(self.I))) + abs(self.transport_correction) + abs(self.I15) \
            + sum(abs(x) for x in self.lhs_extra.values())

    def to_json(self) -> dict:
        return {
            "I": [float(x) for x in self.I],
            "lhs_extra": {k: float(v) for k, v in self.lhs_extra.items()},
            "transport_correction": self.transport_correction,
            "I15": self.I15,
            "closure_error": self.closure_error,
        }


def appendix_terms(state: State, mu: LeslieCoefficients, grid: TorusGrid,
                   later: State | None = None) -> AppendixTerms:
    """Term-by-term expansion of (1/2) dA/dt, A = ||grad v||^2 + ||lap d - f||^2.

    ``I`` holds the fourteen right-hand integrals in the classical ordering;
    ``lhs_extra`` the four non-negative left-hand integrals.  The expansion
    as usually printed keeps ``-(G, v.grad f)`` (I14) but drops its partner
    ``+(G, f'(d) (v.grad d))`` from the chain rule on ``f(d)_t``; that partner
    is reported as ``transport_correction`` and the two cancel exactly.
    Without Parodi's relation one more term survives, ``I15 =
    (lambda2 + mu2 + mu3) (N, (lap A) d)``.

    If ``later`` (the solver state one step on) is given, ``closure_error``
    compares the forward difference of A/2 against the expansion.
    """
    it, vh, dh, F = _state_fields(grid, state, mu)
    g = grid
    lam1, lam2 = mu.lambda1, mu.lambda2
    X = lambda f: _integral(g, f)

    d, v, A, Om, Ad, G, N = F.d, F.v, F.A, F.Om, F.Ad, F.G, F.N
    Jd, Jv = F.Jd, F.Jv                      # Jd[i, l] = d_l d_i
    gradJv = g.ifft(grad_hat(g, grad_hat(g, vh)))  # [i, j, l] = d_l d_j v_i
    gA = 0.5 * (gradJv + np.swapaxes(gradJv, 0, 1))  # gA[i, j, l] = d_l A_ij
    gOm = 0.5 * (gradJv - np.swapaxes(gradJv, 0, 1))
    JG = g.ifft(grad_hat(g, g.fft(G)))       # JG[i, l] = d_l G_i
    lap_v = g.ifft(-g.k2 * vh)
    fp = gl_force_jacobian(d, mu.eps_penalty)

    dgAd = np.sum(gA * d[None, :, None], axis=1)          # [i, l] = d_j d_l A_ij
    s = np.sum(dgAd * d[:, None], axis=0)                 # [l] = d_k d_p d_l A_kp
    a = 2.0 * np.sum(Ad[:, None] * Jd, axis=0)            # [l] = A_kp d_l (d_k d_p)
    dAd = dot(d, Ad)
    m56 = mu.mu5 + mu.mu6

    lhs = {
        "mu1": mu.mu1 * X(np.sum(s * s, axis=0)),
        "mu4": 0.5 * mu.mu4 * X(dot(lap_v, lap_v)),
        "mu56": m56 * X(np.sum(dgAd * dgAd, axis=(0, 1))),
        "lambda1": -X(np.sum(JG * JG, axis=(0, 1))) / lam1,
    }

    AJd = np.sum(A[:, :, None] * Jd[None, :, :], axis=1)   # [i, l] = A_ik d_l d_k
    grad_Ad = dgAd + AJd                                    # d_l (A d)_i
    Omd_minus = matvec(Om, d) - (lam2 / lam1) * Ad
    adv_d = matvec(Jd, v)

    I = np.empty(14)
    I[0] = -mu.mu1 * X(np.sum(a * s, axis=0))
    I[1] = -mu.mu1 * X(dAd * 2.0 * np.sum(Jd[:, None] * d[None, :, None] * gA, axis=(0, 1, 2)))
    I[2] = -m56 * X(np.sum(Jd[None, :, :] * Ad[:, None, None] * gA, axis=(0, 1, 2)))
    I[3] = -m56 * X(np.sum(AJd[:, None, :] * d[None, :, None] * gA, axis=(0, 1, 2)))
    I[4] = -X(np.sum(JG[:, None, :] * Om[:, :, None] * Jd[None, :, :], axis=(0, 1, 2)))
    I[5] = X(np.sum(G[:, None, None] * gOm * Jd[None, :, :], axis=(0, 1, 2)))
    I[6] = 2.0 * lam2 * X(np.sum(N[:, None, None] * gA * Jd[None, :, :], axis=(0, 1, 2)))
    I[7] = lam2 * X(dot(N, matvec(A, F.lap_d)))
    I[8] = -(lam2 * lam2 / lam1) * X(np.sum(grad_Ad * grad_Ad, axis=(0, 1)))
    I[9] = X(dot(lap_v, matvec(Jv, v)))
    I[10] = X(dot(G, matvec(fp, G))) / lam1
    I[11] = -X(dot(G, matvec(fp, Omd_minus)))
    I[12] = 2.0 * X(np.sum(JG[:, :, None] * Jv[None, :, :] * Jd[:, None, :], axis=(0, 1, 2)))
    v_grad_f = matvec(fp, adv_d)
    I[13] = -X(dot(G, v_grad_f))
    correction = X(dot(G, v_grad_f))

    defect = lam2 + mu.mu2 + mu.mu3
    if is_parodi(mu):
        I15 = 0.0
    else:
        lapA = 0.5 * (g.ifft(-g.k2 * grad_hat(g, vh)) + np.swapaxes(g.ifft(-g.k2 * grad_hat(g, vh)), 0, 1))
        I15 = defect * X(dot(N, matvec(lapA, d)))

    out = AppendixTerms(I, lhs, correction, I15)
    if later is not None:
        dt = later.t - state.t
        if not dt > 0:
            raise UsageError("later state must be strictly after the current one")
        A0 = _functional_A(grid, state, mu)
        A1 = _functional_A(grid, later, mu)
        out.half_dA_fd = 0.5 * (A1 - A0) / dt
        sc = max(out.scale, abs(out.half_dA_fd))
        out.closure_error = 0.0 if sc == 0 else abs(out.half_dA_fd - out.rhs_total) / sc
    return out


def _functional_A(grid: TorusGrid, state: State, mu: LeslieCoefficients) -> float:
    _, _, _, F = _state_fields(grid, state, mu)
    return _integral(grid, np.sum(F.Jv ** 2, axis=(0, 1))) + _integral(grid, dot(F.G, F.G))


def half_dA_dt_exact(state: State, mu: LeslieCoefficients, grid: TorusGrid) -> float:
    """(1/2) dA/dt from the right-hand side: (grad v, grad v_t) + (G, lap d_t - f'(d) d_t)."""
    it, vh, dh, F = _state_fields(grid, state, mu)
    vt, dt_ = it.full_rhs(state)
    g = grid
    Jvt = g.ifft(grad_hat(g, g.fft(vt)))
    lap_dt = g.ifft(-g.k2 * g.fft(dt_))
    fp = gl_force_jacobian(F.d, mu.eps_penalty)
    Gt = lap_dt - matvec(fp, dt_)
    return _integral(g, np.sum(F.Jv * Jvt, axis=(0, 1))) + _integral(g, dot(F.G, Gt))


# ---------------------------------------------------------------------------
# convergence to equilibrium

def decay_functional(state: State, mu: LeslieCoefficients, grid: TorusGrid) -> float:
    """||v||_{H^1} + ||lap d - f(d)||, with the full (not semi-) H^1 norm."""
    _, _, _, F = _state_fields(grid, state, mu)
    h1 = math.sqrt(_integral(grid, np.sum(F.Jv ** 2, axis=(0, 1)) + dot(state.v, state.v)))
    return h1 + math.sqrt(_integral(grid, dot(F.G, F.G)))


@dataclass
class DecayFit:
    times: list
    values: list
    fitted_power: float | None
    r_squared: float | None
    below_threshold_time: float | None
    threshold: float = 1e-6

    def to_json(self) -> dict:
        d = asdict(self)
        d.pop("times")
        d.pop("values")
        return d


def convergence_monitor(times: Sequence[float], values: Sequence[float], threshold: float = 1e-6,
                        tail_fraction: float = 0.5) -> DecayFit:
    """Power-law fit D ~ C (1+t)^(-p) on the tail and first threshold crossing."""
    t = np.asarray(times, dtype=float)
    D = np.asarray(values, dtype=float)
    if D.size == 0:
        return DecayFit([], [], None, None, None, threshold)
    D0 = D[0]
    if D0 == 0:
        return DecayFit(t.tolist(), D.tolist(), None, None, float(t[0]), threshold)
    hit = np.nonzero(D <= threshold * D0)[0]
    t_hit = float(t[hit[0]]) if hit.size else None
    start = int(len(t) * (1 - tail_fraction))
    tt, DD = t[start:], D[start:]
    ok = DD > 0
    power = r2 = None
    if ok.sum() >= 3 and DD[ok][-1] < DD[ok][0]:
        x = np.log1p(tt[ok])
        y = np.log(DD[ok])
        coef = np.polyfit(x, y, 1)
        pred = np.polyval(coef, x)
        ss_tot = float(np.sum((y - y.mean()) ** 2))
        power = float(-coef[0])
        r2 = 1.0 - float(np.sum((y - pred) ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return DecayFit(t.tolist(), D.tolist(), power, r2, t_hit, threshold)
