"""Tensor grids on C^n and the time circle, with quadrature and mixed norms.

Spatial grids are uniform with trapezoidal weights: after a twisted
convolution the fields are no longer polynomial-times-Gaussian, so Gauss
rules buy nothing, while a uniform lattice keeps the convolution sum
factorizable.  Time nodes are offset by half a spacing so |sin t| never
vanishes on a node.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from functools import cached_property

import numpy as np


@dataclass(frozen=True)
class GridSpec:
    """Uniform tensor grid on [-L, L]^{2n} with trapezoidal weights."""

    n: int
    L: float
    M: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension must be >= 1")
        if self.L <= 0:
            raise ValueError("half-width must be positive")
        if self.M < 8 or self.M % 2 != 0:
            raise ValueError("points per axis must be an even integer >= 8")

    @property
    def spacing(self) -> float:
        return 2.0 * self.L / (self.M - 1)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.M,) * (2 * self.n)

    @property
    def size(self) -> int:
        return self.M ** (2 * self.n)

    @cached_property
    def axis(self) -> np.ndarray:
        return np.linspace(-self.L, self.L, self.M)

    @cached_property
    def axis_weights(self) -> np.ndarray:
        w = np.full(self.M, self.spacing)
        w[0] *= 0.5
        w[-1] *= 0.5
        return w

    def zeta_coords(self) -> list[np.ndarray]:
        """Complex coordinate arrays z_j = x_j + i y_j, each of shape ``self.shape``.

        Axis layout is (x_1, y_1, ..., x_n, y_n), row-major.
        """
        mesh = np.meshgrid(*([self.axis] * (2 * self.n)), indexing="ij")
        return [mesh[2 * j] + 1j * mesh[2 * j + 1] for j in range(self.n)]

    @cached_property
    def weight_tensor(self) -> np.ndarray:
        w = self.axis_weights
        out = w
        for _ in range(2 * self.n - 1):
            out = np.multiply.outer(out, w)
        return out


def make_grid(n: int, L: float, M: int) -> GridSpec:
    return GridSpec(n=n, L=float(L), M=int(M))


def default_half_width(n: int, k_max: int) -> float:
    """Covers the classical turning point of the highest mode plus tail margin.

    The margin of 6 keeps the polynomial-enhanced Gaussian tail of the
    highest modes below ~1e-8 at the boundary, which Gram and eigenrelation
    accuracies at desk-scale M depend on.
    """
    return math.sqrt(2.0 * (2 * k_max + n)) + 6.0


@dataclass
class Field:
    """Complex-valued function sampled on a GridSpec."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != self.grid.shape:
            raise ValueError(f"values shape {self.values.shape} != grid shape {self.grid.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field values must be finite")

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy())


def sample_field(grid: GridSpec, fn) -> Field:
    """Sample ``fn(z_1, ..., z_n)`` (complex coordinate arrays) on the grid."""
    return Field(grid, np.asarray(fn(*grid.zeta_coords()), dtype=complex))


def zero_field(grid: GridSpec) -> Field:
    return Field(grid, np.zeros(grid.shape, dtype=complex))


def inner_product(f: Field, g: Field) -> complex:
    """Quadrature approximation of the L^2 pairing (f, g) = integral of f * conj(g)."""
    if f.grid != g.grid:
        raise ValueError("fields live on different grids")
    return complex(np.sum(f.values * np.conj(g.values) * f.grid.weight_tensor))


def lp_norm(f: Field, p: float) -> float:
    """L^p norm over the spatial grid; p = inf gives the max modulus over nodes."""
    if p < 1:
        raise ValueError("exponent must be in [1, inf]")
    a = np.abs(f.values)
    if math.isinf(p):
        return float(a.max())
    if p == 1:
        return float(np.sum(a * f.grid.weight_tensor))
    return float(np.sum(a**p * f.grid.weight_tensor) ** (1.0 / p))


@dataclass(frozen=True)
class TimeGrid:
    """Uniform nodes on [-pi, pi), offset by half a spacing from the endpoints."""

    n_t: int

    def __post_init__(self):
        if self.n_t < 1:
            raise ValueError("need at least one time node")

    @cached_property
    def nodes(self) -> np.ndarray:
        h = 2.0 * math.pi / self.n_t
        return -math.pi + (np.arange(self.n_t) + 0.5) * h

    @property
    def weight(self) -> float:
        return 2.0 * math.pi / self.n_t

    @cached_property
    def weights(self) -> np.ndarray:
        return np.full(self.n_t, self.weight)


def make_time_grid(n_t: int) -> TimeGrid:
    return TimeGrid(n_t=int(n_t))


def mixed_norm(values: np.ndarray, tg: TimeGrid, grid: GridSpec, p: float, q: float) -> float:
    """Space-time norm L^p_t L^q_z of time-indexed samples of shape (n_t, *grid.shape).

    p and q may be inf; the inf cases are explicit branches rather than
    large-exponent limits so golden values are bit-stable.
    """
    values = np.asarray(values)
    if values.shape != (tg.n_t,) + grid.shape:
        raise ValueError(f"shape {values.shape} inconsistent with time/space grids")
    if p < 1 or q < 1:
        raise ValueError("exponents must be in [1, inf]")
    spatial = np.array([lp_norm(Field(grid, values[a]), q) for a in range(tg.n_t)])
    if math.isinf(p):
        return float(spatial.max())
    if p == 1:
        return float(np.sum(spatial * tg.weights))
    return float(np.sum(spatial**p * tg.weights) ** (1.0 / p))


@dataclass(frozen=True)
class ExponentPair:
    """Mixed-norm exponents with admissibility metadata for the line 1/p + n/q = n."""

    p: float
    q: float
    n: int

    def __post_init__(self):
        if self.p < 1 or self.q < 1:
            raise ValueError("exponents must be in [1, inf]")

    def on_line(self) -> bool:
        inv_p = 0.0 if math.isinf(self.p) else 1.0 / self.p
        return abs(inv_p + self.n / self.q - self.n) < 1e-12

    def in_range(self) -> bool:
        return 1.0 <= self.q <= 1.0 + 1.0 / self.n

    def admissible(self) -> bool:
        return self.on_line() and self.in_range()


_MAGIC = b"SHFIELD1"


def save_field(f: Field, path) -> None:
    """Flat binary layout: header (n, L, M as little-endian 64-bit) + re/im float64."""
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<qdq", f.grid.n, f.grid.L, f.grid.M))
        flat = np.ravel(f.values)
        inter = np.empty(2 * flat.size, dtype="<f8")
        inter[0::2] = flat.real
        inter[1::2] = flat.imag
        fh.write(inter.tobytes())


def load_field(path) -> Field:
    with open(path, "rb") as fh:
        magic = fh.read(len(_MAGIC))
        if magic != _MAGIC:
            raise ValueError("not a field file")
        n, L, M = struct.unpack("<qdq", fh.read(24))
        grid = GridSpec(n=int(n), L=float(L), M=int(M))
        inter = np.frombuffer(fh.read(), dtype="<f8")
        if inter.size != 2 * grid.size:
            raise ValueError("truncated field file")
        values = (inter[0::2] + 1j * inter[1::2]).reshape(grid.shape)
    return Field(grid, values)
