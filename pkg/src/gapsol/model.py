"""Model specification and hypothesis validation.

A model couples a potential V = V_per + V_loc (periodic lattice part plus a
localized defect) with a nonlinearity f(x, u) - Gamma(x)|u|^{q-2}u, where f
is superlinear with focusing weight K and Gamma >= 0 is the defocusing
weight.  sample_model binds specs to a grid and enforces the structural
invariants; validate_hypotheses probes the standing growth and monotonicity
assumptions on finite ranges and reports witnesses instead of raising.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Callable, Optional

import numpy as np
from scipy import integrate as _sci_integrate

from .errors import ModelError
from .grid import Field, GridSpec

_PERIODICITY_TOL = 1e-12


@dataclass(frozen=True)
class CoefficientSpec:
    """Periodic scalar coefficient on the lattice.

    kinds:
      constant   value everywhere
      cosine     mean + modulation * sum_i cos(2 pi x_i / period)
      table      periodic linear interpolant of samples over one period cell
      file       full-box field loaded from the binary field format
    """

    kind: str = "constant"
    value: float = 0.0
    mean: float = 0.0
    modulation: float = 0.0
    table: Optional[tuple] = None
    path: Optional[str] = None

    def __post_init__(self):
        if self.kind not in ("constant", "cosine", "table", "file"):
            raise ModelError(f"unknown coefficient kind {self.kind!r}")
        if self.kind == "table" and self.table is None:
            raise ModelError("table coefficient needs samples")
        if self.kind == "file" and not self.path:
            raise ModelError("file coefficient needs a path")

    @staticmethod
    def constant(value: float) -> "CoefficientSpec":
        return CoefficientSpec(kind="constant", value=float(value))

    @staticmethod
    def cosine(mean: float, modulation: float) -> "CoefficientSpec":
        return CoefficientSpec(
            kind="cosine", mean=float(mean), modulation=float(modulation)
        )

    @staticmethod
    def from_table(samples) -> "CoefficientSpec":
        arr = np.asarray(samples, dtype=float)
        if arr.ndim not in (1, 2):
            raise ModelError("table must be 1-d or 2-d")
        return CoefficientSpec(
            kind="table", table=tuple(map(tuple, arr)) if arr.ndim == 2 else tuple(arr)
        )

    @staticmethod
    def from_file(path) -> "CoefficientSpec":
        return CoefficientSpec(kind="file", path=str(path))

    @property
    def is_zero(self) -> bool:
        """Provably zero from the declared parameters; file contents never qualify."""
        if self.kind == "constant":
            return self.value == 0.0
        if self.kind == "cosine":
            return self.mean == 0.0 and self.modulation == 0.0
        if self.kind == "table":
            return bool(np.all(np.asarray(self.table) == 0.0))
        return False

    def sample(self, grid: GridSpec, period: float) -> np.ndarray:
        if self.kind == "constant":
            return np.full(grid.shape, self.value)
        if self.kind == "cosine":
            out = np.full(grid.shape, self.mean)
            for x in grid.coords:
                out = out + self.modulation * np.cos(2.0 * np.pi * x / period)
            return out
        if self.kind == "table":
            return self._sample_table(grid, period)
        from .fieldio import read_field

        u = read_field(self.path)
        if u.grid != grid:
            raise ModelError(
                f"coefficient file {self.path} has grid {u.grid}, expected {grid}"
            )
        return u.shaped

    def _sample_table(self, grid: GridSpec, period: float) -> np.ndarray:
        tab = np.asarray(self.table, dtype=float)
        if tab.ndim != grid.dim:
            raise ModelError(
                f"table rank {tab.ndim} does not match grid dim {grid.dim}"
            )
        # fractional position of each grid point inside its period cell
        fracs = [
            (x / period) % 1.0 * tab.shape[axis]
            for axis, x in enumerate(grid.coords)
        ]
        if grid.dim == 1:
            i0 = np.floor(fracs[0]).astype(int) % tab.shape[0]
            w = fracs[0] - np.floor(fracs[0])
            i1 = (i0 + 1) % tab.shape[0]
            return (1.0 - w) * tab[i0] + w * tab[i1]
        i0 = np.floor(fracs[0]).astype(int) % tab.shape[0]
        j0 = np.floor(fracs[1]).astype(int) % tab.shape[1]
        wi = fracs[0] - np.floor(fracs[0])
        wj = fracs[1] - np.floor(fracs[1])
        i1 = (i0 + 1) % tab.shape[0]
        j1 = (j0 + 1) % tab.shape[1]
        return (
            (1 - wi) * (1 - wj) * tab[i0, j0]
            + wi * (1 - wj) * tab[i1, j0]
            + (1 - wi) * wj * tab[i0, j1]
            + wi * wj * tab[i1, j1]
        )


@dataclass(frozen=True)
class DefectSpec:
    """Localized potential perturbation.

    gaussian: amplitude * exp(-|x - center|^2 / width^2); amplitude < 0 is an
    attractive well, amplitude > 0 a repulsive barrier.  center defaults to
    the box center.  The sampled defect must decay below the declared
    tolerance within one period cell of the box boundary.
    """

    kind: str = "zero"
    amplitude: float = 0.0
    width: float = 1.0
    center: Optional[tuple] = None
    path: Optional[str] = None

    def __post_init__(self):
        if self.kind not in ("zero", "gaussian", "file"):
            raise ModelError(f"unknown defect kind {self.kind!r}")
        if self.kind == "gaussian":
            if not (self.width > 0 and math.isfinite(self.width)):
                raise ModelError(f"gaussian defect width must be > 0, got {self.width}")
            if not math.isfinite(self.amplitude):
                raise ModelError("gaussian defect amplitude must be finite")
        if self.kind == "file" and not self.path:
            raise ModelError("file defect needs a path")

    @staticmethod
    def zero() -> "DefectSpec":
        return DefectSpec(kind="zero")

    @staticmethod
    def gaussian(amplitude: float, width: float, center=None) -> "DefectSpec":
        return DefectSpec(
            kind="gaussian",
            amplitude=float(amplitude),
            width=float(width),
            center=None if center is None else tuple(float(c) for c in center),
        )

    def sample(self, grid: GridSpec) -> np.ndarray:
        if self.kind == "zero":
            return np.zeros(grid.shape)
        if self.kind == "gaussian":
            center = self.center
            if center is None:
                center = tuple(L / 2.0 for L in grid.box_lengths)
            if len(center) != grid.dim:
                raise ModelError(
                    f"defect center has {len(center)} components, grid dim {grid.dim}"
                )
            r2 = np.zeros(grid.shape)
            for axis, x in enumerate(grid.coords):
                L = grid.box_lengths[axis]
                d = np.abs(x - center[axis])
                d = np.minimum(d, L - d)
                r2 = r2 + d**2
            return self.amplitude * np.exp(-r2 / self.width**2)
        from .fieldio import read_field

        u = read_field(self.path)
        if u.grid != grid:
            raise ModelError(
                f"defect file {self.path} has grid {u.grid}, expected {grid}"
            )
        return u.shaped


@dataclass(frozen=True)
class PotentialSpec:
    """V = V_per + V_loc with V_per periodic of the declared period."""

    period: float
    vper: CoefficientSpec
    defect: DefectSpec = field(default_factory=DefectSpec.zero)
    loc_decay_tol: float = 1e-10

    def __post_init__(self):
        if not (self.period > 0 and math.isfinite(self.period)):
            raise ModelError(f"period must be positive and finite, got {self.period}")
        if not (self.loc_decay_tol > 0):
            raise ModelError("loc_decay_tol must be positive")


def critical_exponent(dim: int) -> float:
    """Sobolev-critical power: 2N/(N-2) for N >= 3, +inf below."""
    if dim >= 3:
        return 2.0 * dim / (dim - 2.0)
    return math.inf


def check_subcritical(p: float, q: float, dim: int) -> None:
    if not (2.0 <= q < p):
        raise ModelError(f"need 2 <= q < p, got q={q}, p={p}")
    crit = critical_exponent(dim)
    if p >= crit:
        raise ModelError(
            f"p={p} is not subcritical in dimension {dim} (critical power {crit})"
        )


@dataclass(frozen=True, eq=False)
class NonlinearitySpec:
    """Right-hand side f(x, u) - Gamma(x)|u|^{q-2}u.

    kinds:
      power       f = K(x)|u|^{p-2}u, usually with Gamma = 0
      dual_power  same f, named for emphasis when Gamma is active
      custom      user callables f(coords, u) and antiderivative F(coords, u),
                  numpy-broadcasting in u; p and q still declare the intended
                  growth exponents used for bracketing and growth constants

    q = 2 with nonzero Gamma is rejected outright: the concave term is then
    linear and belongs in the potential, not the nonlinearity.
    """

    kind: str = "power"
    p: float = 4.0
    q: float = 2.0
    kcoef: CoefficientSpec = field(default_factory=lambda: CoefficientSpec.constant(1.0))
    gamma: CoefficientSpec = field(default_factory=lambda: CoefficientSpec.constant(0.0))
    f: Optional[Callable] = None
    F: Optional[Callable] = None

    def __post_init__(self):
        if self.kind not in ("power", "dual_power", "custom"):
            raise ModelError(f"unknown nonlinearity kind {self.kind!r}")
        if not (math.isfinite(self.p) and math.isfinite(self.q)):
            raise ModelError("exponents must be finite")
        if not (2.0 <= self.q < self.p):
            raise ModelError(f"need 2 <= q < p, got q={self.q}, p={self.p}")
        if self.kind == "custom":
            if self.f is None or self.F is None:
                raise ModelError("custom nonlinearity needs both f and F")
        elif self.f is not None or self.F is not None:
            raise ModelError("callables are only allowed for kind='custom'")
        if self.q == 2.0 and not self.gamma.is_zero:
            raise ModelError(
                "q = 2 makes the concave term linear; fold it into the "
                "potential instead of Gamma"
            )


@dataclass(frozen=True, eq=False)
class Problem:
    """Model bound to a grid: sampled coefficients plus the defining specs."""

    grid: GridSpec
    potential: PotentialSpec
    nonlinearity: NonlinearitySpec
    vper: Field
    vloc: Field
    gamma: Field
    kcoef: Field
    cells_per_period: tuple[int, ...]

    @cached_property
    def vtot(self) -> Field:
        return self.vper + self.vloc

    @cached_property
    def gamma_is_zero(self) -> bool:
        return bool(np.all(self.gamma.values == 0.0))

    @cached_property
    def vloc_is_zero(self) -> bool:
        return bool(np.all(self.vloc.values == 0.0))


def _roll_defect(arr: np.ndarray, cells: int, axis: int) -> np.ndarray:
    return np.abs(np.roll(arr, cells, axis=axis) - arr)


def _check_periodic(name: str, arr: np.ndarray, cells_per_period) -> None:
    sup = float(np.max(np.abs(arr)))
    tol = _PERIODICITY_TOL * max(1.0, sup)
    for axis, cells in enumerate(cells_per_period):
        defect = float(np.max(_roll_defect(arr, cells, axis)))
        if defect > tol:
            raise ModelError(
                f"{name} is not periodic on the grid: shift defect {defect:.3e} "
                f"on axis {axis} exceeds {tol:.3e}"
            )


def _boundary_shell_mask(grid: GridSpec, period: float) -> np.ndarray:
    mask = np.zeros(grid.shape, dtype=bool)
    for axis, x in enumerate(grid.coords):
        L = grid.box_lengths[axis]
        mask |= (x < period) | (x >= L - period)
    return mask


def sample_model(
    potential: PotentialSpec,
    nonlinearity: NonlinearitySpec,
    grid: GridSpec,
) -> Problem:
    """Bind specs to a grid, sampling coefficients and checking invariants.

    Requires each box length to be an integer number of periods and each
    period to be an integer number of grid cells, so that period shifts act
    exactly on sampled fields.  With power-of-two grids this means the
    period count per axis must itself be a power of two.
    """
    period = potential.period
    cells = []
    for axis, L in enumerate(grid.box_lengths):
        m = L / period
        if abs(m - round(m)) > 1e-9 * max(1.0, m):
            raise ModelError(
                f"box length {L} on axis {axis} is not an integer multiple "
                f"of the period {period}"
            )
        m = int(round(m))
        if grid.points_per_axis % m != 0:
            raise ModelError(
                f"{m} periods on axis {axis} do not divide "
                f"{grid.points_per_axis} grid points; choose a power-of-two "
                f"period count"
            )
        cells.append(grid.points_per_axis // m)

    check_subcritical(nonlinearity.p, nonlinearity.q, grid.dim)

    vper = potential.vper.sample(grid, period)
    vloc = potential.defect.sample(grid)
    gamma = nonlinearity.gamma.sample(grid, period)
    kcoef = nonlinearity.kcoef.sample(grid, period)

    _check_periodic("V_per", vper, cells)
    _check_periodic("Gamma", gamma, cells)
    _check_periodic("K", kcoef, cells)

    shell = _boundary_shell_mask(grid, period)
    shell_max = float(np.max(np.abs(vloc[shell])))
    if shell_max > potential.loc_decay_tol:
        raise ModelError(
            f"V_loc does not decay: boundary-shell max {shell_max:.3e} exceeds "
            f"tolerance {potential.loc_decay_tol:.1e}; enlarge the box"
        )

    gmin = float(np.min(gamma))
    if gmin < 0.0:
        idx = np.unravel_index(int(np.argmin(gamma)), grid.shape)
        raise ModelError(f"Gamma negative ({gmin:.3e}) at grid index {idx}")
    if nonlinearity.q == 2.0 and float(np.max(np.abs(gamma))) != 0.0:
        raise ModelError("q = 2 requires Gamma identically zero")

    kmin = float(np.min(kcoef))
    if kmin <= 0.0:
        idx = np.unravel_index(int(np.argmin(kcoef)), grid.shape)
        raise ModelError(f"inf K must be positive; K = {kmin:.3e} at {idx}")

    return Problem(
        grid=grid,
        potential=potential,
        nonlinearity=nonlinearity,
        vper=Field(vper, grid),
        vloc=Field(vloc, grid),
        gamma=Field(gamma, grid),
        kcoef=Field(kcoef, grid),
        cells_per_period=tuple(cells),
    )


def zero_defect(problem: Problem) -> Problem:
    """The purely periodic companion model on the same grid."""
    per_potential = replace(problem.potential, defect=DefectSpec.zero())
    return sample_model(per_potential, problem.nonlinearity, problem.grid)


def with_defect_amplitude(problem: Problem, amplitude: float) -> Problem:
    if problem.potential.defect.kind != "gaussian":
        raise ModelError("amplitude sweeps need a gaussian defect")
    new_defect = replace(problem.potential.defect, amplitude=float(amplitude))
    return sample_model(
        replace(problem.potential, defect=new_defect), problem.nonlinearity, problem.grid
    )


def with_gamma_amplitude(problem: Problem, amplitude: float) -> Problem:
    nl = problem.nonlinearity
    if nl.gamma.kind != "constant":
        raise ModelError("gamma sweeps need a constant Gamma coefficient")
    new_nl = replace(nl, gamma=CoefficientSpec.constant(float(amplitude)))
    return sample_model(problem.potential, new_nl, problem.grid)


# -- nonlinearity application -------------------------------------------------

def _f_values(nl: NonlinearitySpec, kcoef: np.ndarray, coords, u: np.ndarray):
    if nl.kind == "custom":
        return np.asarray(nl.f(coords, u), dtype=float)
    return kcoef * np.abs(u) ** (nl.p - 2.0) * u


def _F_values(nl: NonlinearitySpec, kcoef: np.ndarray, coords, u: np.ndarray):
    if nl.kind == "custom":
        return np.asarray(nl.F(coords, u), dtype=float)
    return kcoef * np.abs(u) ** nl.p / nl.p


def apply_f(problem: Problem, u: Field) -> Field:
    """Focusing part f(x, u) evaluated pointwise."""
    nl = problem.nonlinearity
    vals = _f_values(nl, problem.kcoef.shaped, problem.grid.coords, u.shaped)
    return Field(vals, problem.grid)


def apply_F(problem: Problem, u: Field) -> Field:
    """Primitive of f in u, F(x, 0) = 0."""
    nl = problem.nonlinearity
    vals = _F_values(nl, problem.kcoef.shaped, problem.grid.coords, u.shaped)
    return Field(vals, problem.grid)


def apply_g(problem: Problem, u: Field) -> Field:
    """Full nonlinearity g = f - Gamma |u|^{q-2} u."""
    out = apply_f(problem, u)
    if problem.gamma_is_zero:
        return out
    q = problem.nonlinearity.q
    uu = u.values
    conc = problem.gamma.values * np.abs(uu) ** (q - 2.0) * uu
    return Field(out.values - conc, problem.grid)


def apply_G(problem: Problem, u: Field) -> Field:
    """Primitive of g in u: F - Gamma |u|^q / q."""
    out = apply_F(problem, u)
    if problem.gamma_is_zero:
        return out
    q = problem.nonlinearity.q
    conc = problem.gamma.values * np.abs(u.values) ** q / q
    return Field(out.values - conc, problem.grid)


# -- hypothesis validation ----------------------------------------------------

@dataclass(frozen=True)
class ProbeConfig:
    """Finite probe ranges standing in for asymptotic hypotheses."""

    u_min: float = 1e-6
    u_max: float = 1e3
    per_decade: int = 8
    max_x_per_axis: int = 64
    f2_tol: float = 1e-3
    f3_floor: float = 1e3
    growth_eps: tuple[float, ...] = (0.1, 0.01)


@dataclass(frozen=True)
class HypothesisCheck:
    name: str
    passed: bool
    witness: str
    data: dict


@dataclass(frozen=True)
class HypothesisReport:
    checks: tuple[HypothesisCheck, ...]
    notes: tuple[str, ...] = ()
    spectral_floor: Optional[float] = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> HypothesisCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def failures(self) -> list[HypothesisCheck]:
        return [c for c in self.checks if not c.passed]

    def to_jsonable(self) -> dict:
        # numpy scalars leak in from the probe sweeps; np.bool_ is not a
        # bool subclass so json.dumps rejects it
        def py(v):
            if isinstance(v, np.bool_):
                return bool(v)
            if isinstance(v, np.generic):
                return v.item()
            if isinstance(v, dict):
                return {k: py(x) for k, x in v.items()}
            if isinstance(v, (list, tuple)):
                return [py(x) for x in v]
            return v

        return {
            "passed": bool(self.passed),
            "spectral_floor": py(self.spectral_floor),
            "notes": list(self.notes),
            "checks": [
                {
                    "name": c.name,
                    "passed": bool(c.passed),
                    "witness": c.witness,
                    "data": py(c.data),
                }
                for c in self.checks
            ],
        }


def _probe_x_indices(problem: Problem, max_per_axis: int):
    """Grid indices covering one period cell, strided for cost."""
    idxs = []
    for cpp in problem.cells_per_period:
        stride = max(1, int(math.ceil(cpp / max_per_axis)))
        idxs.append(np.arange(0, cpp, stride))
    return idxs


def validate_hypotheses(
    problem: Problem, probes: ProbeConfig = ProbeConfig()
) -> HypothesisReport:
    """Probe the standing hypotheses on finite ranges.

    Never raises for a violated hypothesis; every outcome is a report entry
    with a witness.  The probe set is deterministic: grid points of one
    period cell crossed with logarithmically spaced amplitudes.
    """
    nl = problem.nonlinearity
    grid = problem.grid
    p, q = nl.p, nl.q
    checks: list[HypothesisCheck] = []
    notes: list[str] = []

    idxs = _probe_x_indices(problem, probes.max_x_per_axis)
    sel = np.ix_(*idxs) if grid.dim == 2 else (idxs[0],)
    kx = problem.kcoef.shaped[sel].ravel()
    gx = problem.gamma.shaped[sel].ravel()
    coords_x = tuple(c[sel].ravel()[:, None] for c in grid.coords)

    ndec = math.log10(probes.u_max / probes.u_min)
    nu = int(round(probes.per_decade * ndec)) + 1
    amps = np.geomspace(probes.u_min, probes.u_max, nu)

    def fmat(u_row: np.ndarray) -> np.ndarray:
        # (n_x, n_u) matrix of f(x_i, u_j)
        return _f_values(nl, kx[:, None], coords_x, u_row[None, :])

    def Fmat(u_row: np.ndarray) -> np.ndarray:
        return _F_values(nl, kx[:, None], coords_x, u_row[None, :])

    f_pos, f_neg = fmat(amps), fmat(-amps)
    F_pos, F_neg = Fmat(amps), Fmat(-amps)

    # potential admissibility: periodic lattice part, decaying defect
    vper = problem.vper.shaped
    sup = float(np.max(np.abs(vper)))
    per_defect = max(
        float(np.max(_roll_defect(vper, cells, axis)))
        for axis, cells in enumerate(problem.cells_per_period)
    )
    ok = per_defect <= _PERIODICITY_TOL * max(1.0, sup)
    checks.append(
        HypothesisCheck(
            "vper_periodic",
            ok,
            f"period-shift defect {per_defect:.3e}, sup |V_per| = {sup:.3e}",
            {"shift_defect": per_defect, "sup": sup},
        )
    )

    shell = _boundary_shell_mask(grid, problem.potential.period)
    shell_max = float(np.max(np.abs(problem.vloc.shaped[shell])))
    ok = shell_max <= problem.potential.loc_decay_tol
    checks.append(
        HypothesisCheck(
            "vloc_localized",
            ok,
            f"boundary-shell max {shell_max:.3e} vs tol "
            f"{problem.potential.loc_decay_tol:.1e}",
            {"shell_max": shell_max, "tol": problem.potential.loc_decay_tol},
        )
    )

    gmin = float(np.min(problem.gamma.values))
    checks.append(
        HypothesisCheck(
            "gamma_admissible",
            gmin >= 0.0,
            f"min Gamma = {gmin:.3e}",
            {"min": gmin, "max": float(np.max(problem.gamma.values))},
        )
    )

    kmin = float(np.min(problem.kcoef.values))
    checks.append(
        HypothesisCheck(
            "kcoef_positive",
            kmin > 0.0,
            f"inf K = {kmin:.3e}",
            {"min": kmin},
        )
    )

    # exponent window: 2 <= q < p always, p subcritical when it binds
    crit = critical_exponent(grid.dim)
    ok = 2.0 <= q < p and p < crit
    checks.append(
        HypothesisCheck(
            "exponent_range",
            ok,
            f"q = {q}, p = {p}, critical power = {crit}",
            {"q": q, "p": p, "critical": crit},
        )
    )
    if not math.isfinite(crit):
        notes.append(
            "subcritical bound is vacuous in dimension <= 2; "
            "no upper restriction on p applies"
        )

    # superlinearity at zero: sup_x |f(x, u)| / |u| small at the smallest probe
    r0 = max(
        float(np.max(np.abs(f_pos[:, 0]))) / amps[0],
        float(np.max(np.abs(f_neg[:, 0]))) / amps[0],
    )
    checks.append(
        HypothesisCheck(
            "f_zero_limit",
            r0 <= probes.f2_tol,
            f"max |f(x,u)|/|u| = {r0:.3e} at |u| = {amps[0]:.1e}",
            {"ratio": r0, "at": float(amps[0]), "tol": probes.f2_tol},
        )
    )

    # polynomial envelope: the fitted constant must come out finite
    env = np.maximum(np.abs(f_pos), np.abs(f_neg)) / (
        1.0 + amps[None, :] ** (p - 1.0)
    )
    c_fit = float(np.max(env))
    checks.append(
        HypothesisCheck(
            "f_growth_envelope",
            math.isfinite(c_fit),
            f"|f(x,u)| <= c (1 + |u|^{p - 1:g}) with c = {c_fit:.6g}",
            {"c_fit": c_fit, "exponent": p - 1.0},
        )
    )

    # superlinear mass at infinity: min_x F / |u|^q large and growing on the
    # top decade of probes
    top = amps >= probes.u_max / 10.0
    ratios = np.minimum(F_pos, F_neg) / amps[None, :] ** q
    rmin = ratios.min(axis=0)[top]
    grows = bool(np.all(np.diff(rmin) >= 0.0) and rmin[-1] > rmin[0])
    ok = grows and rmin[-1] >= probes.f3_floor
    checks.append(
        HypothesisCheck(
            "f_superlinear_at_infinity",
            ok,
            f"min_x F/|u|^{q:g} reaches {rmin[-1]:.4g} at |u| = {probes.u_max:.1e} "
            f"(floor {probes.f3_floor:.1e}, growing = {grows})",
            {"ratio_top": float(rmin[-1]), "floor": probes.f3_floor, "growing": grows},
        )
    )

    # fiber monotonicity: u -> f(x,u)/|u|^{q-1} strictly increasing on each
    # half-line, every probed x
    ratio_pos = f_pos / amps[None, :] ** (q - 1.0)
    ratio_neg = (f_neg / amps[None, :] ** (q - 1.0))[:, ::-1]
    margin = min(
        float(np.min(np.diff(ratio_pos, axis=1))),
        float(np.min(np.diff(ratio_neg, axis=1))),
    )
    if margin > 0.0:
        witness = f"smallest increment {margin:.3e} across probes"
        data = {"margin": margin}
    else:
        # report the onset: the failing probe pair of smallest magnitude
        dpos = np.diff(ratio_pos, axis=1)
        dneg = np.diff(ratio_neg, axis=1)
        best = None
        cols = np.where(np.any(dpos <= 0.0, axis=0))[0]
        if cols.size:
            j = int(cols[0])
            best = (float(amps[j]), float(amps[j]), float(amps[j + 1]), "positive")
        cols = np.where(np.any(dneg <= 0.0, axis=0))[0]
        if cols.size:
            rev = amps[::-1]
            j = int(cols[-1])
            cand = (float(rev[j + 1]), float(-rev[j]), float(-rev[j + 1]), "negative")
            if best is None or cand[0] < best[0]:
                best = cand
        _, u_lo, u_hi, side = best
        witness = (
            f"ratio f/|u|^{q - 1:g} fails to increase between u = {u_lo:.6g} "
            f"and u = {u_hi:.6g} on the {side} half-line"
        )
        data = {"margin": margin, "u_lo": u_lo, "u_hi": u_hi}
    checks.append(
        HypothesisCheck("fiber_ratio_increasing", margin > 0.0, witness, data)
    )

    # consequence check: f(x,u) u >= q F(x,u) >= 0 on all probes
    fu = np.concatenate([f_pos * amps[None, :], f_neg * (-amps[None, :])], axis=1)
    qF = q * np.concatenate([F_pos, F_neg], axis=1)
    slack = float(np.min(fu - qF))
    floor = float(np.min(qF))
    tol = 1e-12 * max(1.0, float(np.max(np.abs(fu))))
    ok = slack >= -tol and floor >= -tol
    checks.append(
        HypothesisCheck(
            "fu_dominates_qF",
            ok,
            f"min f(x,u)u - qF = {slack:.3e}, min qF = {floor:.3e}",
            {"slack": slack, "min_qF": floor},
        )
    )

    # split-growth constants for g = f - Gamma |u|^{q-2} u
    g_pos = f_pos - gx[:, None] * amps[None, :] ** (q - 1.0)
    g_neg = f_neg + gx[:, None] * amps[None, :] ** (q - 1.0)
    gabs = np.maximum(np.abs(g_pos), np.abs(g_neg))
    constants = {}
    for eps in probes.growth_eps:
        excess = np.maximum(gabs - eps * amps[None, :], 0.0)
        constants[str(eps)] = float(np.max(excess / amps[None, :] ** (p - 1.0)))
    ok = all(math.isfinite(v) for v in constants.values())
    checks.append(
        HypothesisCheck(
            "growth_split_constants",
            ok,
            f"|g| <= eps |u| + C_eps |u|^{p - 1:g} with C = {constants}",
            {"r_growth": p, "constants": constants},
        )
    )

    if nl.kind == "custom":
        checks.append(_custom_consistency_check(problem, coords_x))

    return HypothesisReport(checks=tuple(checks), notes=tuple(notes))


def _custom_consistency_check(problem: Problem, coords_x) -> HypothesisCheck:
    """Quadrature check that F is the u-antiderivative of f with F(x,0) = 0."""
    nl = problem.nonlinearity
    n_x = coords_x[0].shape[0]
    picks = sorted({0, n_x // 3, (2 * n_x) // 3})
    worst = 0.0
    worst_at = None
    for ix in picks:
        x = tuple(np.asarray(c[ix, 0]) for c in coords_x)
        for target in (0.5, 1.0, 3.0, -0.5, -1.0, -3.0):
            val, _ = _sci_integrate.quad(
                lambda s: float(nl.f(x, np.float64(s))), 0.0, target, limit=200
            )
            ref = float(nl.F(x, np.float64(target)))
            err = abs(val - ref) / max(1.0, abs(ref))
            if err > worst:
                worst, worst_at = err, (ix, target)
    ok = worst <= 1e-8
    return HypothesisCheck(
        "custom_fF_consistent",
        ok,
        f"max quadrature mismatch {worst:.3e} at {worst_at}",
        {"max_mismatch": worst},
    )
