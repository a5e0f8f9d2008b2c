"""Periodic fields on a torus and their Fourier-space operators.

Fields are plain ``numpy`` arrays laid out component-first:

* scalar: ``(n,) * dim``
* vector: ``(dim,) + (n,) * dim``
* tensor: ``(dim, dim) + (n,) * dim``

Gradients follow the continuum-mechanics convention
``jacobian(u)[i, j] = d u_i / d x_j`` so that ``(grad v) d`` is the
stretching of ``d`` by the flow.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


class DataError(ValueError):
    """Input field is not finite."""


class UsageError(ValueError):
    """Fields passed together do not live on the same grid."""


def _check_finite(f: np.ndarray) -> None:
    if not np.all(np.isfinite(f)):
        raise DataError("field contains NaN or Inf")


@dataclass(frozen=True)
class TorusGrid:
    dim: int
    n: int
    length: float = 1.0

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise UsageError(f"dim must be 2 or 3, got {self.dim}")
        if self.n < 8 or self.n & (self.n - 1):
            raise UsageError(f"n must be a power of two >= 8, got {self.n}")
        if not self.length > 0:
            raise UsageError("length must be positive")

    @property
    def h(self) -> float:
        return self.length / self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def axes(self) -> tuple[int, ...]:
        return tuple(range(-self.dim, 0))

    @property
    def cell_volume(self) -> float:
        return self.h ** self.dim

    @cached_property
    def x(self) -> np.ndarray:
        """Grid coordinates, shape ``(dim,) + shape``."""
        x1 = np.arange(self.n) * self.h
        return np.array(np.meshgrid(*([x1] * self.dim), indexing="ij"))

    @cached_property
    def _int_modes(self) -> list[np.ndarray]:
        n = self.n
        full = np.fft.fftfreq(n, 1.0 / n)
        half = np.fft.rfftfreq(n, 1.0 / n)
        modes = []
        for ax in range(self.dim):
            m = half if ax == self.dim - 1 else full
            shape = [1] * self.dim
            shape[ax] = m.size
            modes.append(m.reshape(shape))
        return modes

    @cached_property
    def k(self) -> np.ndarray:
        """Wavevector components on the half-spectrum (full Nyquist retained)."""
        sp = self.spectral_shape
        return np.array([np.broadcast_to(2 * np.pi / self.length * m, sp) for m in self._int_modes])

    @cached_property
    def kd(self) -> np.ndarray:
        """Wavevector used for first derivatives: Nyquist components zeroed."""
        kd = self.k.copy()
        for ax, m in enumerate(self._int_modes):
            nyq = np.broadcast_to(np.abs(m) == self.n // 2, self.spectral_shape)
            kd[ax][nyq] = 0.0
        return kd

    @cached_property
    def ik(self) -> np.ndarray:
        return 1j * self.kd

    @cached_property
    def k2(self) -> np.ndarray:
        return np.sum(self.k ** 2, axis=0)

    @cached_property
    def kd2_safe(self) -> np.ndarray:
        kd2 = np.sum(self.kd ** 2, axis=0)
        kd2[kd2 == 0] = 1.0
        return kd2

    @cached_property
    def spectral_shape(self) -> tuple[int, ...]:
        return (self.n,) * (self.dim - 1) + (self.n // 2 + 1,)

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """True for retained modes: every integer wavenumber |k_i| <= n/3."""
        keep = np.ones(self.spectral_shape, dtype=bool)
        for m in self._int_modes:
            keep &= np.abs(m) <= self.n / 3
        return keep

    # transforms ---------------------------------------------------------
    def fft(self, f: np.ndarray) -> np.ndarray:
        return np.fft.rfftn(f, axes=self.axes)

    def ifft(self, fh: np.ndarray) -> np.ndarray:
        return np.fft.irfftn(fh, s=self.shape, axes=self.axes)

    def check(self, f: np.ndarray, rank: int | None = None) -> None:
        if f.shape[f.ndim - self.dim:] != self.shape:
            raise UsageError(f"field shape {f.shape} does not match grid {self.shape}")
        if rank is not None and f.shape != (self.dim,) * rank + self.shape:
            raise UsageError(f"expected rank-{rank} field on {self.shape}, got shape {f.shape}")


# ---------------------------------------------------------------------------
# spectral-space kernels (used by the solver's hot path)

def grad_hat(grid: TorusGrid, fh: np.ndarray) -> np.ndarray:
    """Spectral gradient; appends a trailing derivative index before the grid axes."""
    lead = fh.ndim - grid.dim
    ik = grid.ik.reshape((grid.dim,) + (1,) * lead + grid.spectral_shape)
    # result[j, ...] = d/dx_j of fh; move j to be the last component index
    out = ik * fh[None]
    return np.moveaxis(out, 0, lead)


def div_hat(grid: TorusGrid, uh: np.ndarray) -> np.ndarray:
    """Contract the last component index with the derivative: (div u)_... = d_j u_..j."""
    lead = uh.ndim - grid.dim
    ik = grid.ik
    return np.sum(np.moveaxis(uh, lead - 1, 0) * ik.reshape((grid.dim,) + (1,) * (lead - 1) + grid.spectral_shape), axis=0)


def project_hat(grid: TorusGrid, uh: np.ndarray) -> np.ndarray:
    kd = grid.kd
    kdotu = np.sum(kd * uh, axis=0)
    return uh - kd * (kdotu / grid.kd2_safe)


# ---------------------------------------------------------------------------
# public real-space operators

def gradient(grid: TorusGrid, f: np.ndarray) -> np.ndarray:
    _check_finite(f)
    grid.check(f, 0)
    return grid.ifft(grad_hat(grid, grid.fft(f)))


def jacobian(grid: TorusGrid, u: np.ndarray) -> np.ndarray:
    """``J[i, j] = d u_i / d x_j``."""
    _check_finite(u)
    grid.check(u, 1)
    return grid.ifft(grad_hat(grid, grid.fft(u)))


def divergence(grid: TorusGrid, u: np.ndarray) -> np.ndarray:
    """Divergence over the last component index (vector -> scalar, tensor -> vector)."""
    _check_finite(u)
    grid.check(u)
    return grid.ifft(div_hat(grid, grid.fft(u)))


def laplacian(grid: TorusGrid, f: np.ndarray) -> np.ndarray:
    _check_finite(f)
    grid.check(f)
    return grid.ifft(-grid.k2 * grid.fft(f))


def leray_project(grid: TorusGrid, u: np.ndarray) -> np.ndarray:
    grid.check(u, 1)
    return grid.ifft(project_hat(grid, grid.fft(u)))


def strain_vorticity(grid: TorusGrid, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    J = jacobian(grid, v)
    Jt = np.swapaxes(J, 0, 1)
    return 0.5 * (J + Jt), 0.5 * (J - Jt)


def dealias(grid: TorusGrid, f: np.ndarray) -> np.ndarray:
    grid.check(f)
    return grid.ifft(grid.fft(f) * grid.dealias_mask)


def inner(grid: TorusGrid, f: np.ndarray, g: np.ndarray) -> float:
    """L2 inner product; vector/tensor fields are contracted over all components."""
    if f.shape != g.shape:
        raise UsageError(f"grid mismatch: {f.shape} vs {g.shape}")
    grid.check(f)
    return float(np.sum(f * g)) * grid.cell_volume


def norm_l2(grid: TorusGrid, f: np.ndarray) -> float:
    return float(np.sqrt(inner(grid, f, f)))


def norm_h1(grid: TorusGrid, f: np.ndarray) -> float:
    """H1 seminorm ``||grad f||``."""
    grid.check(f)
    g = grid.ifft(grad_hat(grid, grid.fft(f)))
    return norm_l2(grid, g)


def band_limited_random(grid: TorusGrid, rng: np.random.Generator, band: int,
                        components: tuple[int, ...] = ()) -> np.ndarray:
    """Random real field with spectral support in ``1 <= |k_i| <= band`` and unit RMS."""
    sp = components + grid.spectral_shape
    coeff = rng.standard_normal(sp) + 1j * rng.standard_normal(sp)
    keep = np.ones(grid.spectral_shape, dtype=bool)
    nonzero = np.zeros(grid.spectral_shape, dtype=bool)
    for m in grid._int_modes:
        keep &= np.abs(m) <= band
        nonzero |= m != 0
    coeff = coeff * (keep & nonzero)
    f = grid.ifft(coeff)
    rms = np.sqrt(np.mean(f ** 2))
    return f / rms if rms > 0 else f
