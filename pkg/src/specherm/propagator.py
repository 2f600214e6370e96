"""Complex-time semigroup and unitary propagator of the twisted Laplacian.

Two independent realizations: a closed-form Gaussian kernel applied by
twisted convolution, and a diagonal multiplier in coefficient space.  The
time argument is reduced mod 2*pi before any exponential is formed so that
periodicity holds bit-exactly.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .grids import Field, GridSpec, sample_field
from .indices import Truncation
from .twisted import SpectralCoeffs, forward_transform, inverse_transform, twisted_convolve

_TWO_PI = 2.0 * math.pi


class SingularTimeError(ValueError):
    """Kernel evaluation requested at a parameter where 1 - e^{-2 eta} vanishes."""


def _reduce_angle(t: float) -> float:
    return math.remainder(t, _TWO_PI)


@dataclass(frozen=True)
class ComplexTime:
    """Semigroup parameter eta = r + i t with r >= 0 and t in [-pi, pi]."""

    r: float
    t: float

    def __post_init__(self):
        if self.r < 0:
            raise ValueError("real part must be non-negative")
        if not (-math.pi <= self.t <= math.pi):
            raise ValueError("imaginary part must lie in [-pi, pi]; use ComplexTime.reduced")

    @classmethod
    def reduced(cls, r: float, t: float) -> "ComplexTime":
        return cls(r, _reduce_angle(t))

    @property
    def eta(self) -> complex:
        return complex(self.r, self.t)

    @property
    def omega(self) -> complex:
        return cmath.exp(-2.0 * self.eta)


def mehler_kernel(eta: ComplexTime, zeta, n: int = 1):
    """Closed-form semigroup kernel.

    K_eta(z) = (2 pi)^{-n} e^{-n eta} (1 - w)^{-n} exp(-((1+w)/(1-w)) |z|^2 / 4),
    w = e^{-2 eta}.  Singular exactly where 1 - w vanishes (eta = 0 or
    purely imaginary with sin t = 0).
    """
    w = eta.omega
    one_minus = 1.0 - w
    if abs(one_minus) <= 1e-12:
        raise SingularTimeError(f"kernel singular at eta={eta.eta}")
    z = np.asarray(zeta, dtype=complex)
    if n == 1 and (z.ndim == 0 or z.shape[-1] != 1):
        r2 = np.abs(z) ** 2
    else:
        r2 = np.sum(np.abs(z) ** 2, axis=-1)
    pref = (2.0 * math.pi) ** (-n) * cmath.exp(-n * eta.eta) * one_minus ** (-n)
    out = pref * np.exp(-((1.0 + w) / one_minus) * r2 / 4.0)
    return complex(out) if np.ndim(out) == 0 else out


def mehler_kernel_field(eta: ComplexTime, grid: GridSpec) -> Field:
    return sample_field(grid, lambda *zs: mehler_kernel(eta, np.stack(zs, axis=-1), grid.n))


def evolve_spectral(c: SpectralCoeffs, eta: ComplexTime) -> SpectralCoeffs:
    """Diagonal action: each coefficient is damped/rotated by e^{-eta (2|nu| + n)}."""
    lam = np.array(c.truncation.eigenvalues(), dtype=float)
    return SpectralCoeffs(c.truncation, c.coeffs * np.exp(-eta.eta * lam))


def evolve_kernel(f: Field, eta: ComplexTime) -> Field:
    """Semigroup applied through the closed-form kernel (twisted convolution path)."""
    kernel = mehler_kernel_field(eta, f.grid)
    return twisted_convolve(f, kernel)


def propagate_coeffs(c: SpectralCoeffs, t: float) -> SpectralCoeffs:
    """Unitary evolution in coefficient space; every multiplier has modulus 1."""
    return evolve_spectral(c, ComplexTime.reduced(0.0, t))


def propagate(u, t: float, tr: Truncation | None = None, grid: GridSpec | None = None):
    """Schrodinger-type evolution of u at time t.

    ``u`` may be a Field (``tr`` required; the field is expanded, rotated and
    resynthesized) or SpectralCoeffs (returned as a Field when ``grid`` is
    given, otherwise as coefficients).
    """
    if isinstance(u, Field):
        if tr is None:
            raise ValueError("propagating a sampled field requires a truncation")
        c = propagate_coeffs(forward_transform(u, tr), t)
        return inverse_transform(c, grid if grid is not None else u.grid)
    if isinstance(u, SpectralCoeffs):
        c = propagate_coeffs(u, t)
        return inverse_transform(c, grid) if grid is not None else c
    raise TypeError("u must be a Field or SpectralCoeffs")
