"""Semi-implicit pseudo-spectral time stepping for the penalised Ericksen-Leslie system.

Unknowns are the velocity ``v`` (divergence free) and the director ``d``.
The stiff linear parts, viscosity ``(mu4/2) lap v`` and director relaxation
``-(1/lambda1) lap d``, are integrated with the trapezoidal rule in Fourier
space; everything else is explicit with Heun's two-stage method.  Pressure
is eliminated by the Leray projection.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .coefficients import DomainError, LeslieCoefficients, require_lambda1_negative
from .constitutive import dot, matvec, outer
from .spectral import TorusGrid, band_limited_random, div_hat, grad_hat, project_hat

log = logging.getLogger(__name__)

BLOWUP_THRESHOLD = 1e6
CFL_ADVISORY = 0.5


class BlowupError(RuntimeError):
    def __init__(self, step: int, t: float, reason: str):
        super().__init__(f"numerical blowup at step {step} (t={t:.6g}): {reason}")
        self.step = step
        self.t = t


@dataclass
class State:
    v: np.ndarray
    d: np.ndarray
    t: float = 0.0

    def copy(self) -> "State":
        return State(self.v.copy(), self.d.copy(), self.t)


# ---------------------------------------------------------------------------
# initial conditions

@dataclass(frozen=True)
class TaylorGreen:
    amplitude: float = 1.0
    wavenumber: int = 1
    director: tuple[float, ...] | None = None


@dataclass(frozen=True)
class RandomSmooth:
    seed: int = 0
    band: int = 2
    amplitudes: tuple[float, float] = (0.5, 0.2)
    director: tuple[float, ...] | None = None


@dataclass(frozen=True)
class ConstantDirectorPerturbed:
    mode: object  # linstab.PlaneWaveMode
    amplitude: float = 1e-4

    @property
    def n(self) -> np.ndarray:
        return np.asarray(self.mode.n)


@dataclass(frozen=True)
class FromFile:
    path: str


InitSpec = TaylorGreen | RandomSmooth | ConstantDirectorPerturbed | FromFile


def _unit(grid: TorusGrid, director) -> np.ndarray:
    e = np.zeros(grid.dim)
    if director is None:
        e[0] = 1.0
    else:
        e[:] = director
        e /= np.linalg.norm(e)
    return e


def _const_vector(grid: TorusGrid, e: np.ndarray) -> np.ndarray:
    return np.broadcast_to(e.reshape((grid.dim,) + (1,) * grid.dim), (grid.dim,) + grid.shape).copy()


def initial_state(grid: TorusGrid, init: InitSpec) -> State:
    from .spectral import leray_project

    if isinstance(init, TaylorGreen):
        k = 2 * np.pi * init.wavenumber / grid.length
        x = grid.x
        v = np.zeros((grid.dim,) + grid.shape)
        if grid.dim == 2:
            v[0] = np.sin(k * x[0]) * np.cos(k * x[1])
            v[1] = -np.cos(k * x[0]) * np.sin(k * x[1])
        else:
            v[0] = np.sin(k * x[0]) * np.cos(k * x[1]) * np.cos(k * x[2])
            v[1] = -np.cos(k * x[0]) * np.sin(k * x[1]) * np.cos(k * x[2])
        return State(init.amplitude * v, _const_vector(grid, _unit(grid, init.director)))
    if isinstance(init, RandomSmooth):
        rng = np.random.default_rng(init.seed)
        w = band_limited_random(grid, rng, init.band, (grid.dim,))
        v = leray_project(grid, w)
        v *= init.amplitudes[0] / max(np.sqrt(np.mean(np.sum(v ** 2, axis=0))), 1e-300)
        p = band_limited_random(grid, rng, init.band, (grid.dim,))
        d = _const_vector(grid, _unit(grid, init.director)) + init.amplitudes[1] * p
        return State(v, d)
    if isinstance(init, ConstantDirectorPerturbed):
        mode = init.mode
        kvec = mode.m * np.asarray(mode.nu, dtype=float)[: grid.dim]
        lattice = kvec * grid.length / (2 * np.pi)
        if np.max(np.abs(lattice - np.round(lattice))) > 1e-8:
            raise DomainError(
                f"plane wave m*nu = {kvec} is not a wavevector of the torus of side {grid.length:g}"
            )
        phase = np.tensordot(kvec, grid.x, axes=1)
        wave = np.exp(1j * phase)
        b = np.asarray(mode.b)[: grid.dim].reshape((grid.dim,) + (1,) * grid.dim)
        a = np.asarray(mode.a)[: grid.dim].reshape((grid.dim,) + (1,) * grid.dim)
        v = init.amplitude * np.real(b * wave)
        d = _const_vector(grid, np.asarray(mode.n, dtype=float)[: grid.dim]) + init.amplitude * np.real(a * wave)
        return State(v, d)
    if isinstance(init, FromFile):
        from .io import read_snapshot

        snap = read_snapshot(init.path)
        if snap.grid.dim != grid.dim or snap.grid.n != grid.n:
            raise DomainError(f"{init.path}: snapshot grid {snap.grid} does not match config grid {grid}")
        return State(snap.fields["v"], snap.fields["d"], snap.t)
    raise TypeError(f"unknown init spec {init!r}")


# ---------------------------------------------------------------------------
# configuration

@dataclass
class RunConfig:
    grid: TorusGrid
    mu: LeslieCoefficients
    dt: float
    t_end: float
    init: InitSpec = field(default_factory=RandomSmooth)
    output_every: int = 1
    snapshot_every: int = 0
    dealias: bool = True
    # extra implicit damping balanced explicitly (stabilised semi-implicit);
    # zero reproduces the plain IMEX splitting
    stab_velocity: float = 0.0
    stab_director: float = 0.0
    # optional implicit |k|^8 damping on v and d; regularises Hadamard-unstable
    # coefficient sets where every wave number along an unstable direction grows
    hyperviscosity: float = 0.0

    def __post_init__(self):
        if not self.dt > 0:
            raise DomainError(f"dt must be > 0, got {self.dt}")
        if not self.t_end >= 0:
            raise DomainError(f"t_end must be >= 0, got {self.t_end}")
        if self.output_every < 1:
            raise DomainError("output_every must be >= 1")
        if self.snapshot_every < 0 or (self.snapshot_every and self.snapshot_every % self.output_every):
            raise DomainError("snapshot_every must be a non-negative multiple of output_every")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


# ---------------------------------------------------------------------------
# right-hand side

@dataclass
class Fields:
    """Real-space quantities assembled for one right-hand-side evaluation."""

    v: np.ndarray
    d: np.ndarray
    Jv: np.ndarray
    Jd: np.ndarray
    lap_d: np.ndarray
    A: np.ndarray
    Om: np.ndarray
    Ad: np.ndarray
    f: np.ndarray
    G: np.ndarray
    N: np.ndarray


class Integrator:
    """Holds the spectral operators for a grid/coefficient pair."""

    def __init__(self, grid: TorusGrid, mu: LeslieCoefficients, dealias: bool = True,
                 stab_velocity: float = 0.0, stab_director: float = 0.0, hyperviscosity: float = 0.0):
        require_lambda1_negative(mu)
        if hyperviscosity < 0 or stab_velocity < 0 or stab_director < 0:
            raise DomainError("stabilisation and hyperviscosity coefficients must be >= 0")
        self.grid = grid
        self.mu = mu
        self.lam1 = mu.lambda1
        self.lam2 = mu.lambda2
        self.kappa = -1.0 / self.lam1
        self.mask = grid.dealias_mask if dealias else np.ones(grid.spectral_shape, dtype=bool)
        self.stab_v = stab_velocity
        self.stab_d = stab_director
        k2 = grid.k2
        self.hyper = hyperviscosity
        damp = hyperviscosity * k2 ** 4
        self.L_v = -(0.5 * mu.mu4 + stab_velocity) * k2 - damp
        self.L_d = -self.kappa * (k2 + stab_director) - damp

    # transforms
    def to_hat(self, s: State) -> tuple[np.ndarray, np.ndarray]:
        g = self.grid
        return g.fft(s.v), g.fft(s.d)

    def to_real(self, vh, dh, t) -> State:
        g = self.grid
        return State(g.ifft(vh), g.ifft(dh), t)

    def fields(self, vh: np.ndarray, dh: np.ndarray) -> Fields:
        g = self.grid
        mu = self.mu
        v = g.ifft(vh)
        d = g.ifft(dh)
        Jv = g.ifft(grad_hat(g, vh))
        Jd = g.ifft(grad_hat(g, dh))
        lap_d = g.ifft(-g.k2 * dh)
        Jvt = np.swapaxes(Jv, 0, 1)
        A = 0.5 * (Jv + Jvt)
        Om = 0.5 * (Jv - Jvt)
        Ad = matvec(A, d)
        f = (dot(d, d) - 1.0) / mu.eps_penalty ** 2 * d
        G = lap_d - f
        N = -(G + self.lam2 * Ad) / self.lam1
        return Fields(v, d, Jv, Jd, lap_d, A, Om, Ad, f, G, N)

    def explicit_stress(self, F: Fields) -> np.ndarray:
        """Leslie stress without the mu4 A part, minus the Ericksen stress."""
        mu = self.mu
        d, N, Ad = F.d, F.N, F.Ad
        T = mu.mu2 * outer(N, d) + mu.mu3 * outer(d, N) + mu.mu5 * outer(Ad, d) + mu.mu6 * outer(d, Ad)
        if mu.mu1:
            T += mu.mu1 * dot(d, Ad) * outer(d, d)
        T -= np.sum(F.Jd[:, :, None] * F.Jd[:, None, :], axis=0)
        return T

    def explicit_hat(self, vh: np.ndarray, dh: np.ndarray, F: Fields | None = None):
        """Explicit tendencies in Fourier space (projected, dealiased)."""
        g = self.grid
        if F is None:
            F = self.fields(vh, dh)
        T = self.explicit_stress(F)
        adv_v = matvec(F.Jv, F.v)
        mom = div_hat(g, g.fft(T)) - g.fft(adv_v)
        if self.stab_v:
            mom = mom + self.stab_v * g.k2 * vh
        mom = project_hat(g, mom) * self.mask
        dd = -matvec(F.Jd, F.v) + matvec(F.Om, F.d) - (self.lam2 / self.lam1) * F.Ad + F.f / self.lam1
        ddh = g.fft(dd)
        if self.stab_d:
            ddh = ddh + self.kappa * self.stab_d * dh
        return mom, ddh * self.mask

    def full_rhs(self, s: State) -> tuple[np.ndarray, np.ndarray]:
        """Complete dv/dt and dd/dt in real space."""
        g = self.grid
        vh, dh = self.to_hat(s)
        ev, ed = self.explicit_hat(vh, dh)
        return g.ifft(ev + self.L_v * vh), g.ifft(ed + self.L_d * dh)

    # time stepping
    def factors(self, dt: float):
        key = dt
        cache = getattr(self, "_factors", None)
        if cache is None or cache[0] != key:
            av = (1 + 0.5 * dt * self.L_v) / (1 - 0.5 * dt * self.L_v)
            bv = dt / (1 - 0.5 * dt * self.L_v)
            ad = (1 + 0.5 * dt * self.L_d) / (1 - 0.5 * dt * self.L_d)
            bd = dt / (1 - 0.5 * dt * self.L_d)
            self._factors = (key, av, bv, ad, bd)
        return self._factors[1:]

    def advance(self, vh: np.ndarray, dh: np.ndarray, dt: float, step_index: int = 0, t: float = 0.0):
        av, bv, ad, bd = self.factors(dt)
        F0 = self.fields(vh, dh)
        self._guard(F0, step_index, t, dt)
        n0v, n0d = self.explicit_hat(vh, dh, F0)
        v1 = av * vh + bv * n0v
        d1 = ad * dh + bd * n0d
        n1v, n1d = self.explicit_hat(v1, d1)
        vn = av * vh + 0.5 * bv * (n0v + n1v)
        dn = ad * dh + 0.5 * bd * (n0d + n1d)
        return project_hat(self.grid, vn), dn

    def _guard(self, F: Fields, step: int, t: float, dt: float) -> None:
        vmax = float(np.max(np.abs(F.v)))
        dmax = float(np.max(np.abs(F.d)))
        if not (math.isfinite(vmax) and math.isfinite(dmax)):
            raise BlowupError(step, t, "non-finite values in v or d")
        if vmax > BLOWUP_THRESHOLD or dmax > BLOWUP_THRESHOLD:
            raise BlowupError(step, t, f"sup|v| = {vmax:.3g}, sup|d| = {dmax:.3g} exceed {BLOWUP_THRESHOLD:g}")
        cfl = dt * self.grid.n * vmax / self.grid.length
        if cfl > CFL_ADVISORY and not getattr(self, "_cfl_warned", False):
            self._cfl_warned = True
            warnings.warn(f"CFL number {cfl:.3g} exceeds {CFL_ADVISORY} at step {step}", RuntimeWarning)


def rhs(state: State, mu: LeslieCoefficients, grid: TorusGrid, dealias: bool = True):
    """Time derivatives (dv/dt, dd/dt) of a state."""
    return Integrator(grid, mu, dealias=dealias).full_rhs(state)


def step(state: State, cfg: RunConfig, integrator: Integrator | None = None) -> State:
    it = integrator or make_integrator(cfg)
    vh, dh = it.to_hat(state)
    vh, dh = it.advance(vh, dh, cfg.dt, 0, state.t)
    out = it.to_real(vh, dh, state.t + cfg.dt)
    _final_guard(out, 1)
    return out


def make_integrator(cfg: RunConfig) -> Integrator:
    return Integrator(cfg.grid, cfg.mu, dealias=cfg.dealias,
                      stab_velocity=cfg.stab_velocity, stab_director=cfg.stab_director,
                      hyperviscosity=cfg.hyperviscosity)


def _final_guard(s: State, step_index: int) -> None:
    for name, a in (("v", s.v), ("d", s.d)):
        m = float(np.max(np.abs(a)))
        if not math.isfinite(m) or m > BLOWUP_THRESHOLD:
            raise BlowupError(step_index, s.t, f"sup|{name}| = {m:.3g}")


Sink = Callable[[int, State], None]


def simulate(cfg: RunConfig, sinks: Iterable[Sink] = (), state: State | None = None) -> State:
    """Run from the configured initial state to ``t_end``.

    Every sink is called as ``sink(step_index, state)`` at step 0 and then
    every ``cfg.output_every`` steps, plus once at the final step.
    """
    sinks = list(sinks)
    it = make_integrator(cfg)
    if state is None:
        state = initial_state(cfg.grid, cfg.init)
    t0 = state.t
    vh, dh = it.to_hat(state)
    vh = project_hat(cfg.grid, vh)
    state = it.to_real(vh, dh, t0)
    for sink in sinks:
        sink(0, state)
    n = cfg.n_steps
    for k in range(1, n + 1):
        vh, dh = it.advance(vh, dh, cfg.dt, k - 1, t0 + (k - 1) * cfg.dt)
        if k % cfg.output_every == 0 or k == n:
            state = it.to_real(vh, dh, t0 + k * cfg.dt)
            _final_guard(state, k)
            for sink in sinks:
                sink(k, state)
    state = it.to_real(vh, dh, t0 + n * cfg.dt)
    _final_guard(state, n)
    return state
