"""Post-solve diagnostics: tail decay, periodic comparisons, bump splitting.

These turn qualitative statements about ground states (exponential decay,
energy cost of a defect, concentration into finitely many lattice bumps)
into measured numbers with explicit windows and tolerances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import ndimage

from .errors import DegenerateCentroidError, FieldError
from .grid import Field, centroid, lp_norm, periodic_delta, translate
from .minimizer import SolveReport, SolverOptions, solve_ground_state
from .model import Problem, zero_defect
from .nehari import energy, pde_residual, project


@dataclass(frozen=True)
class DecayFit:
    """Least-squares fit of log shell_max(r) = log c - alpha r."""

    alpha_hat: float
    c_hat: float
    r_squared: float
    window: tuple[float, float]
    n_samples: int

    @property
    def reliable(self) -> bool:
        return self.r_squared >= 0.99


def radial_shell_profile(u: Field) -> tuple[np.ndarray, np.ndarray]:
    """Max |u| per radial shell about the centroid, shell width = spacing."""
    grid = u.grid
    c = centroid(u)
    r2 = np.zeros(grid.shape)
    for axis, x in enumerate(grid.coords):
        L = grid.box_lengths[axis]
        d = np.abs(x - c[axis])
        d = np.minimum(d, L - d)
        r2 = r2 + d**2
    r = np.sqrt(r2).ravel()
    h = max(grid.spacing)
    bins = np.floor(r / h).astype(int)
    absu = np.abs(u.values)
    nbins = int(bins.max()) + 1
    shell = np.zeros(nbins)
    np.maximum.at(shell, bins, absu)
    radii = (np.arange(nbins) + 0.5) * h
    return radii, shell


def decay_fit(
    u: Field,
    window: Optional[tuple[float, float]] = None,
    floor: float = 1e-13,
    min_samples: int = 8,
) -> DecayFit:
    """Fit an exponential envelope to the tail of |u| around its centroid.

    The fit window stays inside the box's central half (radius at most a
    quarter of the shortest edge); by default it starts where the shell
    maxima have dropped to e^-2 of the peak and ends at the last shell
    above the floor.
    """
    grid = u.grid
    radii, shell = radial_shell_profile(u)
    r_cap = min(grid.box_lengths) / 4.0
    peak = float(shell.max())
    if peak <= 0.0:
        raise FieldError("zero field has no decay profile")
    valid = (shell > floor) & (radii <= r_cap)
    if not np.any(valid):
        raise ValueError("no shell samples above the floor inside the window cap")
    if window is None:
        past_core = radii >= radii[np.argmax(shell)]
        below = valid & past_core & (shell <= peak * math.exp(-2.0))
        if not np.any(below):
            raise ValueError("no tail: field never drops to e^-2 of its peak")
        r_lo = float(radii[below][0])
        r_hi = float(radii[valid][-1])
    else:
        r_lo, r_hi = float(window[0]), float(window[1])
    mask = valid & (radii >= r_lo) & (radii <= r_hi)
    n = int(np.count_nonzero(mask))
    if n < min_samples:
        raise ValueError(
            f"only {n} tail samples above floor in [{r_lo:.3g}, {r_hi:.3g}]; "
            f"need {min_samples}"
        )
    x = radii[mask]
    y = np.log(shell[mask])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return DecayFit(
        alpha_hat=float(-slope),
        c_hat=float(np.exp(intercept)),
        r_squared=r2,
        window=(r_lo, r_hi),
        n_samples=n,
    )


@dataclass(frozen=True)
class ComparisonReport:
    """Ground energy of the full model against its periodic companion."""

    c: float
    c_per: float
    gap: float
    vloc_sign: str
    converged: bool
    converged_per: bool
    full: SolveReport
    per: SolveReport

    def to_jsonable(self) -> dict:
        return {
            "c": self.c,
            "c_per": self.c_per,
            "gap": self.gap,
            "vloc_sign": self.vloc_sign,
            "converged": self.converged,
            "converged_per": self.converged_per,
            "drift_detected": self.full.drift_detected,
        }


def classify_vloc(problem: Problem) -> str:
    v = problem.vloc.values
    tol = 1e-12 * max(1.0, float(np.max(np.abs(v))) if v.size else 0.0)
    has_pos = bool(np.any(v > tol))
    has_neg = bool(np.any(v < -tol))
    if has_pos and has_neg:
        return "mixed"
    if has_pos:
        return "positive"
    if has_neg:
        return "negative"
    return "zero"


def compare_cper(
    problem: Problem, opts: SolverOptions = SolverOptions()
) -> ComparisonReport:
    """Solve the full and defect-free models and report the energy gap.

    gap = c_per - c is positive when the defect lowers the ground energy.
    Non-convergence of either solve is flagged, not raised; refusals
    (hypothesis or spectrum failures) propagate.
    """
    per_problem = zero_defect(problem)
    rep_per = solve_ground_state(per_problem, opts)
    rep = solve_ground_state(problem, opts)
    return ComparisonReport(
        c=rep.c_estimate,
        c_per=rep_per.c_estimate,
        gap=rep_per.c_estimate - rep.c_estimate,
        vloc_sign=classify_vloc(problem),
        converged=rep.converged,
        converged_per=rep_per.converged,
        full=rep,
        per=rep_per,
    )


@dataclass(frozen=True)
class TranslateEntry:
    offset: tuple[int, ...]
    t_applied: float
    energy: float


def translate_energy_curve(
    u_per: Field, problem: Problem, offsets: Sequence
) -> list[TranslateEntry]:
    """Project lattice translates of a periodic ground state into the full model.

    Offsets are integers in period units (scalars in 1d, tuples in 2d).
    For a decaying defect the resulting energies approach the periodic
    level from above as the offset grows.
    """
    grid = problem.grid
    out = []
    for off in offsets:
        off_t = (int(off),) * grid.dim if np.isscalar(off) else tuple(int(o) for o in off)
        if len(off_t) != grid.dim:
            raise ValueError(f"offset {off!r} has wrong dimension")
        cells = tuple(o * cpp for o, cpp in zip(off_t, problem.cells_per_period))
        pt = project(translate(u_per, cells), problem)
        out.append(
            TranslateEntry(offset=off_t, t_applied=pt.t_applied, energy=pt.energy.total)
        )
    return out


@dataclass(frozen=True)
class Bump:
    center: tuple[float, ...]
    profile: Field
    energy_per: float
    mass: float


@dataclass(frozen=True)
class ProfileDecomposition:
    bumps: tuple[Bump, ...]
    remainder_norm: float
    lions_remainder: float

    @property
    def ell(self) -> int:
        return len(self.bumps)


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i: int, j: int) -> None:
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[max(ri, rj)] = min(ri, rj)


def _periodic_components(mask: np.ndarray) -> list[np.ndarray]:
    """Connected components of a boolean grid mask with wrap-around."""
    labels, nlab = ndimage.label(mask)
    if nlab == 0:
        return []
    uf = _UnionFind(nlab + 1)
    dim = mask.ndim
    for axis in range(dim):
        first = np.take(labels, 0, axis=axis).ravel()
        last = np.take(labels, -1, axis=axis).ravel()
        both = (first > 0) & (last > 0)
        for a, b in zip(first[both], last[both]):
            uf.union(int(a), int(b))
    roots: dict[int, int] = {}
    flat = labels.ravel()
    comp_of = np.zeros_like(flat)
    for lab in range(1, nlab + 1):
        roots.setdefault(uf.find(lab), len(roots) + 1)
    for lab in range(1, nlab + 1):
        comp_of[flat == lab] = roots[uf.find(lab)]
    return [np.flatnonzero(comp_of == c) for c in range(1, len(roots) + 1)]


def _masked_centroid(u: Field, flat_idx: np.ndarray) -> np.ndarray:
    grid = u.grid
    w = np.zeros(grid.npoints)
    w[flat_idx] = u.values[flat_idx] ** 2
    total = float(w.sum())
    ws = w.reshape(grid.shape)
    out = np.empty(grid.dim)
    for axis in range(grid.dim):
        other = tuple(a for a in range(grid.dim) if a != axis)
        w_axis = ws.sum(axis=other) if other else ws
        theta = 2.0 * np.pi * grid.axes[axis] / grid.box_lengths[axis]
        z = complex(np.sum(w_axis * np.exp(1j * theta)))
        if abs(z) / total < 1e-12:
            raise DegenerateCentroidError(
                f"bump component has no usable center along axis {axis}"
            )
        out[axis] = (float(np.angle(z)) % (2 * np.pi)) * grid.box_lengths[axis] / (
            2 * np.pi
        )
    return out


def _periodic_radius(grid, center: np.ndarray) -> np.ndarray:
    r2 = np.zeros(grid.shape)
    for axis, x in enumerate(grid.coords):
        L = grid.box_lengths[axis]
        d = np.abs(x - center[axis])
        d = np.minimum(d, L - d)
        r2 = r2 + d**2
    return np.sqrt(r2)


def bump_decomposition(
    u: Field,
    problem: Problem,
    threshold_frac: float = 0.02,
    sep_min_periods: float = 4.0,
    taper_periods: float = 2.0,
    min_bump_norm: float = 1e-3,
) -> ProfileDecomposition:
    """Split a field into well-separated lattice bumps plus remainder.

    Cells above threshold_frac of the sup norm are grouped into periodic
    connected components; components closer than sep_min_periods periods
    merge.  Each kept bump is windowed with a radial cosine-squared taper,
    scored with the defect-free energy at its original location, then
    recentered by whole period cells for storage.  Components whose mass
    stays below min_bump_norm count as remainder, mirroring the norm floor
    below which no nontrivial critical point exists.
    """
    grid = u.grid
    period = problem.potential.period
    peak = float(np.max(np.abs(u.values)))
    if peak == 0.0:
        raise FieldError("zero field has no bump decomposition")
    mask = np.abs(u.shaped) >= threshold_frac * peak
    comps = _periodic_components(mask)

    centers = [_masked_centroid(u, idx) for idx in comps]
    sep_min = sep_min_periods * period
    lengths = np.asarray(grid.box_lengths)

    # merge close components until all pairwise separations clear sep_min
    merged = True
    while merged and len(comps) > 1:
        merged = False
        for i in range(len(comps)):
            for j in range(i + 1, len(comps)):
                d = np.linalg.norm(periodic_delta(centers[i], centers[j], lengths))
                if d < sep_min:
                    comps[i] = np.concatenate([comps[i], comps[j]])
                    del comps[j]
                    centers[i] = _masked_centroid(u, comps[i])
                    del centers[j]
                    merged = True
                    break
            if merged:
                break

    per_problem = problem if problem.vloc_is_zero else zero_defect(problem)
    cellvol = grid.cell_volume
    taper = taper_periods * period

    kept: list[Bump] = []
    windows: list[np.ndarray] = []
    for idx, center in zip(comps, centers):
        comp_mass = math.sqrt(float(np.sum(u.values[idx] ** 2)) * cellvol)
        if comp_mass < min_bump_norm:
            continue
        r = _periodic_radius(grid, center)
        r0 = float(np.max(r.ravel()[idx]))
        w = np.zeros(grid.shape)
        w[r <= r0] = 1.0
        ramp = (r > r0) & (r < r0 + taper)
        w[ramp] = np.cos(0.5 * np.pi * (r[ramp] - r0) / taper) ** 2
        profile_vals = u.shaped * w
        windows.append(profile_vals)
        profile = Field(profile_vals, grid)
        e_per = energy(profile, per_problem).total
        mass = math.sqrt(float(np.sum(profile_vals**2)) * cellvol)
        # store the profile recentered by whole period cells
        cells = []
        for axis in range(grid.dim):
            h = grid.spacing[axis]
            cpp = problem.cells_per_period[axis]
            off = grid.box_lengths[axis] / 2.0 - center[axis]
            cells.append(int(round(off / (cpp * h))) * cpp)
        stored = translate(profile, tuple(cells))
        kept.append(
            Bump(
                center=tuple(float(c) for c in center),
                profile=stored,
                energy_per=e_per,
                mass=mass,
            )
        )

    kept_sorted = sorted(
        range(len(kept)), key=lambda i: kept[i].mass, reverse=True
    )
    bumps = tuple(kept[i] for i in kept_sorted)

    rem = u.shaped.copy()
    for w in windows:
        rem = rem - w
    remainder_norm = math.sqrt(float(np.sum(rem**2)) * cellvol)

    # worst single-period-cell mass of the remainder
    lions = 0.0
    if grid.dim == 1:
        cpp = problem.cells_per_period[0]
        tiles = rem.reshape(-1, cpp)
        lions = float(np.max(np.sum(tiles**2, axis=1)) * cellvol)
    else:
        c0, c1 = problem.cells_per_period
        m0 = grid.points_per_axis // c0
        m1 = grid.points_per_axis // c1
        tiles = rem.reshape(m0, c0, m1, c1)
        lions = float(np.max(np.sum(tiles**2, axis=(1, 3))) * cellvol)

    return ProfileDecomposition(
        bumps=bumps, remainder_norm=remainder_norm, lions_remainder=lions
    )


def residual_check(u: Field, problem: Problem) -> float:
    """Quadrature L2 norm of the strong-form equation residual."""
    return lp_norm(pde_residual(u, problem), 2.0)
