"""Periodic box, spectral calculus, and the immutable field type.

All state lives on a uniform grid over [0, L_1) x ... x [0, L_N) with
periodic boundary conditions and a power-of-two point count per axis.
Derivatives use the FFT with the full symmetric wavenumber convention,
so the discrete Dirichlet form is exactly dual to the discrete Laplacian
on every representable field, Nyquist mode included.  The pointwise
first-derivative helper zeroes the Nyquist mode instead (a real field
has no consistent real Nyquist derivative); it is a diagnostic tool and
does not define any energy.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .errors import DegenerateCentroidError, FieldError, GridMismatchError


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid on a rectangular box.

    dim:             spatial dimension, 1 or 2
    box_lengths:     edge length per axis
    points_per_axis: number of grid points per axis, a power of two >= 16
    """

    dim: int
    box_lengths: tuple[float, ...]
    points_per_axis: int

    def __init__(self, dim: int, box_lengths, points_per_axis: int):
        if dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {dim}")
        if np.isscalar(box_lengths):
            lengths = (float(box_lengths),) * dim
        else:
            lengths = tuple(float(L) for L in box_lengths)
        if len(lengths) != dim:
            raise ValueError(f"need {dim} box lengths, got {len(lengths)}")
        if any(not np.isfinite(L) or L <= 0 for L in lengths):
            raise ValueError(f"box lengths must be positive and finite: {lengths}")
        n = int(points_per_axis)
        if n < 16 or not _is_power_of_two(n):
            raise ValueError(f"points_per_axis must be a power of two >= 16, got {n}")
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "box_lengths", lengths)
        object.__setattr__(self, "points_per_axis", n)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_axis,) * self.dim

    @property
    def npoints(self) -> int:
        return self.points_per_axis**self.dim

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(L / self.points_per_axis for L in self.box_lengths)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @cached_property
    def axes(self) -> tuple[np.ndarray, ...]:
        """1-d coordinate arrays, one per axis."""
        return tuple(
            np.arange(self.points_per_axis) * h for h in self.spacing
        )

    @cached_property
    def coords(self) -> tuple[np.ndarray, ...]:
        """Coordinate arrays broadcast to the full grid shape."""
        return tuple(np.meshgrid(*self.axes, indexing="ij", copy=False))

    @cached_property
    def wavenumbers(self) -> tuple[np.ndarray, ...]:
        """Per-axis angular wavenumbers 2*pi*m/L, full symmetric convention."""
        return tuple(
            2.0 * np.pi * np.fft.fftfreq(self.points_per_axis, d=h)
            for h in self.spacing
        )

    @cached_property
    def laplacian_symbol(self) -> np.ndarray:
        """|k|^2 broadcast to the grid shape; multiplies -1 in the Laplacian."""
        ksq = np.zeros(self.shape)
        for axis, k in enumerate(self.wavenumbers):
            shape = [1] * self.dim
            shape[axis] = self.points_per_axis
            ksq = ksq + (k**2).reshape(shape)
        return ksq

    @cached_property
    def deriv_wavenumbers(self) -> tuple[np.ndarray, ...]:
        """Wavenumbers with the Nyquist entry zeroed, for pointwise gradients."""
        out = []
        for k in self.wavenumbers:
            kz = k.copy()
            kz[self.points_per_axis // 2] = 0.0
            out.append(kz)
        return tuple(out)


@dataclass(frozen=True, eq=False)
class Field:
    """Real scalar field sampled on a grid, stored flat in row-major order.

    Values are validated finite at construction and frozen against writes.
    """

    values: np.ndarray
    grid: GridSpec

    def __init__(self, values, grid: GridSpec):
        arr = np.asarray(values, dtype=np.float64).reshape(-1).copy()
        if arr.size != grid.npoints:
            raise FieldError(
                f"field has {arr.size} values, grid wants {grid.npoints}"
            )
        if not np.all(np.isfinite(arr)):
            bad = int(np.flatnonzero(~np.isfinite(arr))[0])
            raise FieldError(f"non-finite value at flat index {bad}")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "grid", grid)

    @property
    def shaped(self) -> np.ndarray:
        return self.values.reshape(self.grid.shape)

    def __add__(self, other: "Field") -> "Field":
        _check_same_grid(self, other)
        return Field(self.values + other.values, self.grid)

    def __sub__(self, other: "Field") -> "Field":
        _check_same_grid(self, other)
        return Field(self.values - other.values, self.grid)

    def __mul__(self, c: float) -> "Field":
        return Field(self.values * float(c), self.grid)

    __rmul__ = __mul__

    def __neg__(self) -> "Field":
        return Field(-self.values, self.grid)

    def __repr__(self) -> str:
        return (
            f"Field(n={self.grid.shape}, sup={np.max(np.abs(self.values)):.4g})"
        )


def _check_same_grid(u: Field, v: Field) -> None:
    if u.grid != v.grid:
        raise GridMismatchError(f"grids differ: {u.grid} vs {v.grid}")


def sample_function(grid: GridSpec, fn: Callable[..., np.ndarray]) -> Field:
    """Sample fn(x) or fn(x, y) on the grid and wrap as a Field."""
    return Field(np.asarray(fn(*grid.coords), dtype=np.float64), grid)


def constant_field(grid: GridSpec, value: float) -> Field:
    return Field(np.full(grid.npoints, float(value)), grid)


def random_smooth_field(
    grid: GridSpec,
    rng: np.random.Generator,
    rel_bandwidth: float = 0.25,
    amplitude: float = 1.0,
) -> Field:
    """Band-limited random field with gaussian spectral decay, sup norm scaled.

    Keeps |m_i| <= rel_bandwidth * n/2 and never excites the Nyquist mode,
    so derivatives of any order stay well resolved.
    """
    n = grid.points_per_axis
    coef = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    cutoff = rel_bandwidth * (n // 2)
    for axis in range(grid.dim):
        m = np.fft.fftfreq(n, d=1.0 / n)
        shape = [1] * grid.dim
        shape[axis] = n
        keep = (np.abs(m) <= cutoff) & (np.abs(m) < n // 2)
        coef = coef * keep.reshape(shape).astype(float)
        coef = coef * np.exp(-((m / max(cutoff, 1.0)) ** 2)).reshape(shape)
    u = np.fft.ifftn(coef).real
    peak = np.max(np.abs(u))
    if peak == 0.0:
        u = np.ones(grid.shape)
        peak = 1.0
    return Field(u * (amplitude / peak), grid)


def laplacian(u: Field) -> Field:
    """Spectral Laplacian with the full symmetric symbol."""
    g = u.grid
    uhat = np.fft.fftn(u.shaped)
    out = np.fft.ifftn(-g.laplacian_symbol * uhat).real
    return Field(out, g)


def gradient(u: Field) -> tuple[Field, ...]:
    """Pointwise first derivatives along each axis, Nyquist mode zeroed."""
    g = u.grid
    uhat = np.fft.fftn(u.shaped)
    out = []
    for axis, k in enumerate(g.deriv_wavenumbers):
        shape = [1] * g.dim
        shape[axis] = g.points_per_axis
        du = np.fft.ifftn(1j * k.reshape(shape) * uhat).real
        out.append(Field(du, g))
    return tuple(out)


def integrate(u: Field) -> float:
    """Rectangle-rule integral over the box; exact for band-limited fields."""
    return float(np.sum(u.values) * u.grid.cell_volume)


def inner_l2(u: Field, v: Field) -> float:
    _check_same_grid(u, v)
    return float(np.dot(u.values, v.values) * u.grid.cell_volume)


def dirichlet(u: Field, v: Field) -> float:
    """Integral of grad u . grad v computed in Fourier space.

    Uses the full |k|^2 weight, matching laplacian exactly:
    dirichlet(u, v) == -integrate(laplacian(u) * v) to round-off.
    """
    _check_same_grid(u, v)
    g = u.grid
    uhat = np.fft.fftn(u.shaped)
    if v is u:
        s = float(np.sum(g.laplacian_symbol * np.abs(uhat) ** 2))
    else:
        vhat = np.fft.fftn(v.shaped)
        s = float(np.sum(g.laplacian_symbol * (uhat * np.conj(vhat)).real))
    return s * g.cell_volume / g.npoints


def inner_h1v(u: Field, v: Field, vtot: Field) -> float:
    """Energy inner product: dirichlet(u, v) + integral of vtot*u*v."""
    _check_same_grid(u, v)
    _check_same_grid(u, vtot)
    pot = np.dot(vtot.values * u.values, v.values) * u.grid.cell_volume
    return dirichlet(u, v) + float(pot)


def h1v_norm(u: Field, vtot: Field) -> float:
    s = inner_h1v(u, u, vtot)
    # quadratic form can dip below zero only by round-off when it is ~ 0
    return float(np.sqrt(max(s, 0.0)))


def lp_norm(u: Field, s: float) -> float:
    """L^s norm under the grid quadrature; requires s >= 1."""
    if s < 1:
        raise ValueError(f"lp_norm needs s >= 1, got {s}")
    return float(
        (np.sum(np.abs(u.values) ** s) * u.grid.cell_volume) ** (1.0 / s)
    )


def translate(u: Field, offset) -> Field:
    """Shift the field content by whole grid cells along each axis.

    translate(u, y) has value u(x - y*h) at x, so a bump moves forward by y
    cells.  Offsets must be integers; periodic wrap-around is exact.
    """
    g = u.grid
    if np.isscalar(offset):
        offs = (offset,) * g.dim
    else:
        offs = tuple(offset)
    if len(offs) != g.dim:
        raise ValueError(f"need {g.dim} offsets, got {len(offs)}")
    cells = []
    for o in offs:
        if float(o) != int(o):
            raise ValueError(f"offset must be whole grid cells, got {o}")
        cells.append(int(o))
    rolled = np.roll(u.shaped, shift=cells, axis=tuple(range(g.dim)))
    return Field(rolled, g)


def centroid(u: Field, min_resultant: float = 1e-8) -> np.ndarray:
    """Mass center of u^2 via the circular mean, one angle per axis.

    Raises FieldError on the zero field and DegenerateCentroidError when the
    resultant along some axis is below min_resultant (mass spread so evenly
    that no center is meaningful, e.g. two equal antipodal bumps).
    """
    g = u.grid
    w = u.shaped**2
    total = float(w.sum())
    if total <= 0.0:
        raise FieldError("zero field has no centroid")
    out = np.empty(g.dim)
    for axis in range(g.dim):
        other = tuple(a for a in range(g.dim) if a != axis)
        w_axis = w.sum(axis=other) if other else w
        theta = 2.0 * np.pi * g.axes[axis] / g.box_lengths[axis]
        z = complex(np.sum(w_axis * np.exp(1j * theta)))
        resultant = abs(z) / total
        if resultant < min_resultant:
            raise DegenerateCentroidError(
                f"axis {axis} resultant {resultant:.3e} below {min_resultant:.1e}"
            )
        angle = float(np.angle(z)) % (2.0 * np.pi)
        out[axis] = angle * g.box_lengths[axis] / (2.0 * np.pi)
    return out


def periodic_delta(a, b, lengths) -> np.ndarray:
    """Minimum-image displacement a - b on the torus, componentwise."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    L = np.asarray(lengths, dtype=float)
    d = (a - b) % L
    return np.where(d > 0.5 * L, d - L, d)
