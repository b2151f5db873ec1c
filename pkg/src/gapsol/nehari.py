"""Energy functional, natural constraint, and the metric gradient.

The energy is J(u) = 1/2 ||u||^2 - int G(x, u) with G the primitive of the
full nonlinearity and ||.|| the inner product induced by -Laplacian + V.
Nontrivial critical points live on the set where J'(u)(u) = 0; each ray
through a nonzero field crosses it exactly once under the standing
hypotheses, at the unique positive root of the fiber derivative
psi(t) = J'(tu)(u).  Minimizing over the constraint set is done elsewhere;
this module supplies the certified ray projection, the fiber scan, the
strong-form residual, and the gradient in the energy metric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.sparse.linalg import LinearOperator, cg

from .errors import (
    BracketFailureError,
    FieldError,
    HypothesisViolationError,
    LinearSolveError,
    ProjectionError,
)
from .grid import (
    Field,
    inner_h1v,
    inner_l2,
    integrate,
    laplacian,
    random_smooth_field,
)
from .model import Problem, apply_F, apply_g

BRACKET_LO = 2.0**-20
BRACKET_CAP = 2.0**40
BISECT_REL_WIDTH = 1e-14


@dataclass(frozen=True)
class EnergyBreakdown:
    """J split into its defining pieces; total = quadratic - nonlinear_F + gamma_term."""

    quadratic: float
    nonlinear_F: float
    gamma_term: float
    total: float


@dataclass(frozen=True)
class NehariPoint:
    """A field certified to sit on the constraint set."""

    u: Field
    t_applied: float
    energy: EnergyBreakdown
    nehari_residual: float
    grad_norm: Optional[float] = None


@dataclass(frozen=True)
class FiberScan:
    ts: np.ndarray
    psi_values: np.ndarray
    energy_values: np.ndarray
    sign_changes: int


def energy(u: Field, problem: Problem) -> EnergyBreakdown:
    quad = 0.5 * inner_h1v(u, u, problem.vtot)
    nlF = integrate(apply_F(problem, u))
    if problem.gamma_is_zero:
        gam = 0.0
    else:
        q = problem.nonlinearity.q
        gam = float(
            np.sum(problem.gamma.values * np.abs(u.values) ** q)
            * u.grid.cell_volume
            / q
        )
    return EnergyBreakdown(
        quadratic=quad, nonlinear_F=nlF, gamma_term=gam, total=quad - nlF + gam
    )


def pde_residual(u: Field, problem: Problem) -> Field:
    """Strong form -Laplacian u + V u - g(x, u), the L2 representation of J'(u)."""
    lap = laplacian(u)
    gvals = apply_g(problem, u).values
    return Field(-lap.values + problem.vtot.values * u.values - gvals, u.grid)


def solve_energy_inverse(
    problem: Problem, rhs: Field, lin_tol: float = 1e-10
) -> Field:
    """Apply (-Laplacian + V)^{-1} by preconditioned conjugate gradients.

    The preconditioner inverts the mean-coefficient surrogate in Fourier
    space.  The returned field carries an explicit residual certificate;
    failure to certify raises instead of returning a silently bad gradient.
    """
    grid = problem.grid
    b = rhs.values
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return Field(np.zeros(grid.npoints), grid)
    ksq = grid.laplacian_symbol
    v = problem.vtot.values

    def matvec(x: np.ndarray) -> np.ndarray:
        xs = x.reshape(grid.shape)
        return np.fft.ifftn(ksq * np.fft.fftn(xs)).real.ravel() + v * x

    shift = max(float(np.mean(v)), 1e-2)
    denom = ksq + shift

    def psolve(r: np.ndarray) -> np.ndarray:
        return np.fft.ifftn(np.fft.fftn(r.reshape(grid.shape)) / denom).real.ravel()

    n = grid.npoints
    op = LinearOperator((n, n), matvec=matvec)
    pre = LinearOperator((n, n), matvec=psolve)
    x, info = cg(
        op, b, rtol=lin_tol, atol=0.0, M=pre, maxiter=10 * grid.points_per_axis
    )
    relres = float(np.linalg.norm(matvec(x) - b)) / bnorm
    if info != 0 or relres > 100.0 * lin_tol:
        raise LinearSolveError(
            f"energy-operator solve stalled: info={info}, relative residual "
            f"{relres:.3e} vs tolerance {lin_tol:.1e}"
        )
    return Field(x, grid)


def riesz_gradient(u: Field, problem: Problem, lin_tol: float = 1e-10) -> Field:
    """Gradient of J at u in the energy inner product."""
    return solve_energy_inverse(problem, pde_residual(u, problem), lin_tol)


def gradient_norm(u: Field, problem: Problem, lin_tol: float = 1e-10) -> float:
    r = pde_residual(u, problem)
    g = solve_energy_inverse(problem, r, lin_tol)
    return math.sqrt(max(inner_l2(r, g), 0.0))


class _Ray:
    """Reductions of J and psi along t -> t u, scalar for built-in kinds."""

    def __init__(self, u: Field, problem: Problem):
        if not np.any(u.values):
            raise FieldError("zero field has no fiber")
        self.u = u
        self.problem = problem
        self.a = inner_h1v(u, u, problem.vtot)
        if self.a <= 0.0:
            raise ProjectionError(
                f"energy quadratic form is {self.a:.3e} on a nonzero field; "
                "the spectral floor must be positive"
            )
        nl = problem.nonlinearity
        self.q = nl.q
        cellvol = u.grid.cell_volume
        if problem.gamma_is_zero:
            self.gamma_int = 0.0
        else:
            self.gamma_int = float(
                np.sum(problem.gamma.values * np.abs(u.values) ** self.q) * cellvol
            )
        self.builtin = nl.kind != "custom"
        if self.builtin:
            self.p = nl.p
            self.k_int = float(
                np.sum(problem.kcoef.values * np.abs(u.values) ** self.p) * cellvol
            )

    def psi(self, t: float) -> float:
        base = t * self.a + t ** (self.q - 1.0) * self.gamma_int
        if self.builtin:
            return base - t ** (self.p - 1.0) * self.k_int
        from .model import apply_f

        tu = Field(t * self.u.values, self.u.grid)
        f_tu_u = float(
            np.sum(apply_f(self.problem, tu).values * self.u.values)
            * self.u.grid.cell_volume
        )
        return base - f_tu_u

    def dpsi(self, t: float) -> Optional[float]:
        if not self.builtin:
            return None
        return (
            self.a
            + (self.q - 1.0) * t ** (self.q - 2.0) * self.gamma_int
            - (self.p - 1.0) * t ** (self.p - 2.0) * self.k_int
        )

    def energy_at(self, t: float) -> EnergyBreakdown:
        quad = 0.5 * t * t * self.a
        gam = t**self.q * self.gamma_int / self.q
        if self.builtin:
            nlF = t**self.p * self.k_int / self.p
        else:
            tu = Field(t * self.u.values, self.u.grid)
            nlF = integrate(apply_F(self.problem, tu))
        return EnergyBreakdown(
            quadratic=quad, nonlinear_F=nlF, gamma_term=gam, total=quad - nlF + gam
        )


def psi(t: float, u: Field, problem: Problem) -> float:
    """Fiber derivative J'(tu)(u) at ray parameter t > 0."""
    if not (t > 0.0 and math.isfinite(t)):
        raise ValueError(f"ray parameter must be positive and finite, got {t}")
    return _Ray(u, problem).psi(t)


def _fiber_root(ray: _Ray) -> float:
    t_lo, f_lo = BRACKET_LO, ray.psi(BRACKET_LO)
    if not f_lo > 0.0:
        raise BracketFailureError(
            f"fiber derivative is {f_lo:.3e} at t = {t_lo:.2e}; "
            "the ray has no admissible crossing"
        )
    t_hi = 1.0
    f_hi = ray.psi(t_hi)
    while f_hi > 0.0:
        t_lo, f_lo = t_hi, f_hi
        t_hi *= 2.0
        if t_hi > BRACKET_CAP:
            raise BracketFailureError(
                f"fiber derivative stayed positive up to t = {BRACKET_CAP:.2e}; "
                "effective superlinearity fails at this resolution"
            )
        f_hi = ray.psi(t_hi)
    if f_hi == 0.0:
        return t_hi
    while (t_hi - t_lo) > BISECT_REL_WIDTH * t_hi:
        mid = 0.5 * (t_lo + t_hi)
        if mid <= t_lo or mid >= t_hi:
            break
        if ray.psi(mid) > 0.0:
            t_lo = mid
        else:
            t_hi = mid
    root = 0.5 * (t_lo + t_hi)
    d = ray.dpsi(root)
    if d is not None and d < 0.0:
        polished = root - ray.psi(root) / d
        if (
            math.isfinite(polished)
            and polished > 0.0
            and abs(ray.psi(polished)) < abs(ray.psi(root))
        ):
            root = polished
    return root


def project(
    u: Field,
    problem: Problem,
    nehari_tol: float = 1e-10,
    norm_floor: float = 1e-6,
) -> NehariPoint:
    """Scale u onto the constraint set and certify the result.

    The returned point satisfies |J'(v)(v)| <= nehari_tol * ||v||^2 and
    ||v|| >= norm_floor; anything less raises.
    """
    ray = _Ray(u, problem)
    t = _fiber_root(ray)
    resid = t * ray.psi(t)
    vnorm_sq = t * t * ray.a
    if abs(resid) > nehari_tol * vnorm_sq:
        raise ProjectionError(
            f"constraint residual {resid:.3e} exceeds {nehari_tol:.1e} * "
            f"||v||^2 = {nehari_tol * vnorm_sq:.3e}"
        )
    if math.sqrt(vnorm_sq) < norm_floor:
        raise ProjectionError(
            f"projected field has norm {math.sqrt(vnorm_sq):.3e}, below the "
            f"floor {norm_floor:.1e}"
        )
    v = Field(t * u.values, u.grid)
    return NehariPoint(
        u=v,
        t_applied=t,
        energy=ray.energy_at(t),
        nehari_residual=resid,
    )


def fiber_scan(
    u: Field,
    problem: Problem,
    t_lo: float = 1e-2,
    t_hi: float = 1e2,
    count: int = 200,
) -> FiberScan:
    """Sample psi and J along the ray on a log-spaced parameter grid."""
    if not (t_lo > 0.0 and t_hi > t_lo):
        raise ValueError(f"need 0 < t_lo < t_hi, got [{t_lo}, {t_hi}]")
    if count < 2:
        raise ValueError(f"need at least 2 scan points, got {count}")
    ray = _Ray(u, problem)
    ts = np.geomspace(t_lo, t_hi, count)
    psis = np.array([ray.psi(float(t)) for t in ts])
    js = np.array([ray.energy_at(float(t)).total for t in ts])
    signs = np.sign(psis)
    signs = signs[signs != 0.0]
    changes = int(np.count_nonzero(np.diff(signs))) if signs.size else 0
    return FiberScan(ts=ts, psi_values=psis, energy_values=js, sign_changes=changes)


def small_sphere_radius(
    problem: Problem,
    n_probes: int = 100,
    seed: int = 2024,
    r_start: float = 1.0,
    r_min: float = 2.0**-40,
) -> float:
    """Largest probed radius r with J >= ||u||^2 / 4 on the whole r-sphere.

    Probes are random band-limited fields normalized in the energy norm.
    Halves the radius until every probe clears the bound.
    """
    rng = np.random.default_rng(seed)
    probes = []
    for _ in range(n_probes):
        w = random_smooth_field(problem.grid, rng)
        nrm = math.sqrt(max(inner_h1v(w, w, problem.vtot), 0.0))
        if nrm == 0.0:
            continue
        probes.append(Field(w.values / nrm, problem.grid))
    r = r_start
    while r >= r_min:
        ok = True
        for e in probes:
            val = energy(Field(r * e.values, problem.grid), problem).total
            if val < 0.25 * r * r:
                ok = False
                break
        if ok:
            return r
        r *= 0.5
    raise HypothesisViolationError(
        f"no radius above {r_min:.1e} kept J >= ||u||^2/4 on the probe sphere"
    )
