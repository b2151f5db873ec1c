"""TOML run configuration.

Every key is checked: unknown keys are hard errors naming the full key
path, types are validated, and model-level rejections (bad exponents,
q = 2 with an active concave term) surface with the offending section
attached.  Paths in the file resolve relative to the file's directory.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError, ModelError
from .grid import GridSpec
from .minimizer import GaussianInit, SolverOptions
from .model import CoefficientSpec, DefectSpec, NonlinearitySpec, PotentialSpec


@dataclass(frozen=True)
class SpectrumSection:
    tol: float = 1e-8
    margin: float = 1e-6
    max_iters: int = 5000


@dataclass(frozen=True)
class SweepSection:
    parameter: str
    values: tuple[float, ...]
    warm_start: bool = True


@dataclass(frozen=True)
class FiberSection:
    t_lo: float = 1e-2
    t_hi: float = 1e2
    count: int = 200
    field_file: Optional[str] = None


@dataclass(frozen=True)
class DecaySection:
    window: Optional[tuple[float, float]] = None
    field_file: Optional[str] = None


@dataclass(frozen=True)
class NonexistSection:
    offsets: tuple[tuple[int, ...], ...] = ()


@dataclass(frozen=True)
class DecomposeSection:
    threshold_frac: float = 0.02
    sep_min_periods: float = 4.0
    taper_periods: float = 2.0
    min_bump_norm: float = 1e-3
    field_file: Optional[str] = None


@dataclass(frozen=True)
class RunConfig:
    grid: GridSpec
    potential: PotentialSpec
    nonlinearity: NonlinearitySpec
    solver: SolverOptions
    seed: int
    output_dir: Optional[str]
    spectrum: SpectrumSection
    sweep: Optional[SweepSection]
    fiber: FiberSection
    decay: DecaySection
    nonexist: Optional[NonexistSection]
    decompose: DecomposeSection
    raw_text: str


class _Section:
    """Typed key access with unknown-key detection."""

    def __init__(self, name: str, data: dict):
        self.name = name
        self.data = data
        self.used: set[str] = set()

    def _path(self, key: str) -> str:
        return f"{self.name}.{key}" if self.name else key

    def has(self, key: str) -> bool:
        return key in self.data

    def raw(self, key: str, default: Any = None) -> Any:
        self.used.add(key)
        return self.data.get(key, default)

    def number(self, key: str, default: Optional[float] = None) -> Optional[float]:
        val = self.raw(key, default)
        if val is None:
            return None
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise ConfigError(f"{self._path(key)} must be a number, got {val!r}")
        return float(val)

    def integer(self, key: str, default: Optional[int] = None) -> Optional[int]:
        val = self.raw(key, default)
        if val is None:
            return None
        if isinstance(val, bool) or not isinstance(val, int):
            raise ConfigError(f"{self._path(key)} must be an integer, got {val!r}")
        return int(val)

    def string(self, key: str, default: Optional[str] = None) -> Optional[str]:
        val = self.raw(key, default)
        if val is None:
            return None
        if not isinstance(val, str):
            raise ConfigError(f"{self._path(key)} must be a string, got {val!r}")
        return val

    def boolean(self, key: str, default: Optional[bool] = None) -> Optional[bool]:
        val = self.raw(key, default)
        if val is None:
            return None
        if not isinstance(val, bool):
            raise ConfigError(f"{self._path(key)} must be a boolean, got {val!r}")
        return val

    def array(self, key: str, default: Any = None) -> Any:
        val = self.raw(key, default)
        if val is None:
            return None
        if not isinstance(val, list):
            raise ConfigError(f"{self._path(key)} must be an array, got {val!r}")
        return val

    def finish(self) -> None:
        unknown = sorted(set(self.data) - self.used)
        if unknown:
            paths = ", ".join(self._path(k) for k in unknown)
            raise ConfigError(f"unknown key(s): {paths}")


def _resolve(path: Optional[str], base_dir: Optional[Path]) -> Optional[str]:
    if path is None:
        return None
    p = Path(path)
    if not p.is_absolute() and base_dir is not None:
        p = base_dir / p
    return str(p)


def _coefficient(
    sec: _Section, prefix: str, default_value: float, base_dir: Optional[Path]
) -> CoefficientSpec:
    """Build K or Gamma from key families <prefix>_value / _mean+_modulation /
    _table / _file; at most one family may appear."""
    key = lambda s: f"{prefix}_{s}"
    families = []
    if sec.has(key("value")):
        families.append("constant")
    if sec.has(key("mean")) or sec.has(key("modulation")):
        families.append("cosine")
    if sec.has(key("table")):
        families.append("table")
    if sec.has(key("file")):
        families.append("file")
    if len(families) > 1:
        raise ConfigError(
            f"{sec.name}.{prefix}_*: conflicting coefficient families {families}"
        )
    if not families:
        return CoefficientSpec.constant(default_value)
    fam = families[0]
    if fam == "constant":
        return CoefficientSpec.constant(sec.number(key("value")))
    if fam == "cosine":
        return CoefficientSpec.cosine(
            sec.number(key("mean"), 0.0), sec.number(key("modulation"), 0.0)
        )
    if fam == "table":
        return CoefficientSpec.from_table(sec.array(key("table")))
    return CoefficientSpec.from_file(_resolve(sec.string(key("file")), base_dir))


def _grid_section(sec: _Section) -> GridSpec:
    dim = sec.integer("dim", 1)
    box = sec.raw("box_length")
    if box is None:
        raise ConfigError("grid.box_length is required")
    n = sec.integer("points_per_axis")
    if n is None:
        raise ConfigError("grid.points_per_axis is required")
    sec.finish()
    try:
        return GridSpec(dim, box, n)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"grid: {exc}") from exc


def _potential_section(sec: _Section, base_dir: Optional[Path]) -> PotentialSpec:
    period = sec.number("period")
    if period is None:
        raise ConfigError("potential.period is required")
    kind = sec.string("kind", "constant")
    if kind == "constant":
        vper = CoefficientSpec.constant(sec.number("value", 0.0))
    elif kind == "cosine":
        vper = CoefficientSpec.cosine(
            sec.number("mean", 0.0), sec.number("modulation", 0.0)
        )
    elif kind == "table":
        arr = sec.array("table")
        if arr is None:
            raise ConfigError("potential.table is required for kind = 'table'")
        vper = CoefficientSpec.from_table(arr)
    elif kind == "file":
        f = sec.string("file")
        if f is None:
            raise ConfigError("potential.file is required for kind = 'file'")
        vper = CoefficientSpec.from_file(_resolve(f, base_dir))
    else:
        raise ConfigError(f"potential.kind {kind!r} is not one of "
                          "constant, cosine, table, file")

    dkind = sec.string("defect_kind", "zero")
    if dkind == "zero":
        defect = DefectSpec.zero()
    elif dkind == "gaussian":
        center = sec.array("defect_center")
        defect = DefectSpec.gaussian(
            sec.number("defect_amplitude", 0.0),
            sec.number("defect_width", 1.0),
            center=None if center is None else tuple(float(c) for c in center),
        )
    elif dkind == "file":
        f = sec.string("defect_file")
        if f is None:
            raise ConfigError("potential.defect_file is required for defect_kind = 'file'")
        defect = DefectSpec(kind="file", path=_resolve(f, base_dir))
    else:
        raise ConfigError(
            f"potential.defect_kind {dkind!r} is not one of zero, gaussian, file"
        )

    tol = sec.number("loc_decay_tol", 1e-10)
    sec.finish()
    return PotentialSpec(period=period, vper=vper, defect=defect, loc_decay_tol=tol)


def _nonlinearity_section(sec: _Section, base_dir: Optional[Path]) -> NonlinearitySpec:
    kind = sec.string("kind", "power")
    if kind not in ("power", "dual_power"):
        raise ConfigError(
            f"nonlinearity.kind {kind!r} is not one of power, dual_power "
            "(custom callables are API-only)"
        )
    p = sec.number("p", 4.0)
    q = sec.number("q", 2.0)
    kcoef = _coefficient(sec, "k", 1.0, base_dir)
    gamma = _coefficient(sec, "gamma", 0.0, base_dir)
    sec.finish()
    return NonlinearitySpec(kind=kind, p=p, q=q, kcoef=kcoef, gamma=gamma)


def _solver_section(sec: _Section, base_dir: Optional[Path], seed: int) -> SolverOptions:
    init_kind = sec.string("init", "gaussian")
    if init_kind == "gaussian":
        center = sec.array("init_center")
        init = GaussianInit(
            width=sec.number("init_width"),
            amplitude=sec.number("init_amplitude", 1.0),
            center=None if center is None else tuple(float(c) for c in center),
            center_jitter=sec.number("init_center_jitter", 0.0),
        )
    elif init_kind == "file":
        f = sec.string("init_file")
        if f is None:
            raise ConfigError("solver.init_file is required for init = 'file'")
        init = _resolve(f, base_dir)
    else:
        raise ConfigError(f"solver.init {init_kind!r} is not one of gaussian, file")

    kwargs = dict(
        tol_grad=sec.number("tol_grad", 1e-8),
        tol_energy=sec.number("tol_energy", 1e-12),
        max_iters=sec.integer("max_iters", 20000),
        step0=sec.number("step0", 1.0),
        armijo_c=sec.number("armijo_c", 1e-4),
        backtrack=sec.number("backtrack", 0.5),
        max_step=sec.number("max_step", 1e12),
        drift_frac=sec.number("drift_frac", 0.25),
        nehari_tol=sec.number("nehari_tol", 1e-10),
        norm_floor=sec.number("norm_floor", 1e-6),
        lin_tol=sec.number("lin_tol", 1e-10),
        stall_window=sec.integer("stall_window", 50),
        init=init,
        seed=seed,
    )
    if sec.has("recenter_every"):
        kwargs["recenter_every"] = sec.integer("recenter_every")
    sec.finish()
    try:
        return SolverOptions(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"solver: {exc}") from exc


def _nonexist_section(sec: _Section, dim: int) -> NonexistSection:
    arr = sec.array("offsets")
    if arr is None:
        raise ConfigError("nonexist.offsets is required")
    offsets = []
    for item in arr:
        if isinstance(item, list):
            off = tuple(int(v) for v in item)
        else:
            off = (int(item),) * dim
        if len(off) != dim:
            raise ConfigError(f"nonexist.offsets entry {item!r} has wrong dimension")
        offsets.append(off)
    sec.finish()
    return NonexistSection(offsets=tuple(offsets))


def parse_config(text: str, base_dir: Optional[Path] = None) -> RunConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"TOML syntax error: {exc}") from exc

    top = _Section("", data)
    seed = top.integer("seed", 0)
    output_dir = top.string("output_dir")

    known_sections = {
        "grid", "potential", "nonlinearity", "solver", "spectrum",
        "sweep", "fiber", "decay", "nonexist", "decompose",
    }

    def section(name: str) -> _Section:
        raw = top.raw(name, {})
        if not isinstance(raw, dict):
            raise ConfigError(f"{name} must be a table")
        return _Section(name, raw)

    grid = _grid_section(section("grid"))
    try:
        potential = _potential_section(section("potential"), base_dir)
        nonlinearity = _nonlinearity_section(section("nonlinearity"), base_dir)
    except ModelError as exc:
        raise ModelError(f"invalid model: {exc}") from exc
    solver = _solver_section(section("solver"), base_dir, seed)

    sp = section("spectrum")
    spectrum = SpectrumSection(
        tol=sp.number("tol", 1e-8),
        margin=sp.number("margin", 1e-6),
        max_iters=sp.integer("max_iters", 5000),
    )
    sp.finish()

    sweep = None
    if top.has("sweep"):
        sw = section("sweep")
        parameter = sw.string("parameter")
        if parameter not in ("gamma_amplitude", "defect_amplitude"):
            raise ConfigError(
                f"sweep.parameter must be gamma_amplitude or defect_amplitude, "
                f"got {parameter!r}"
            )
        values = sw.array("values")
        if not values:
            raise ConfigError("sweep.values must be a nonempty array")
        sweep = SweepSection(
            parameter=parameter,
            values=tuple(float(v) for v in values),
            warm_start=sw.boolean("warm_start", True),
        )
        sw.finish()

    fb = section("fiber")
    fiber = FiberSection(
        t_lo=fb.number("t_lo", 1e-2),
        t_hi=fb.number("t_hi", 1e2),
        count=fb.integer("count", 200),
        field_file=_resolve(fb.string("field_file"), base_dir),
    )
    fb.finish()

    dc = section("decay")
    win = dc.array("window")
    if win is not None:
        if len(win) != 2:
            raise ConfigError("decay.window must be [r_lo, r_hi]")
        win = (float(win[0]), float(win[1]))
    decay = DecaySection(
        window=win, field_file=_resolve(dc.string("field_file"), base_dir)
    )
    dc.finish()

    nonexist = None
    if top.has("nonexist"):
        nonexist = _nonexist_section(section("nonexist"), grid.dim)

    dd = section("decompose")
    decompose = DecomposeSection(
        threshold_frac=dd.number("threshold_frac", 0.02),
        sep_min_periods=dd.number("sep_min_periods", 4.0),
        taper_periods=dd.number("taper_periods", 2.0),
        min_bump_norm=dd.number("min_bump_norm", 1e-3),
        field_file=_resolve(dd.string("field_file"), base_dir),
    )
    dd.finish()

    unknown = sorted(set(data) - top.used - {"seed", "output_dir"})
    unknown = [k for k in unknown if k not in known_sections]
    if unknown:
        raise ConfigError(f"unknown key(s): {', '.join(unknown)}")

    return RunConfig(
        grid=grid,
        potential=potential,
        nonlinearity=nonlinearity,
        solver=solver,
        seed=seed,
        output_dir=output_dir,
        spectrum=spectrum,
        sweep=sweep,
        fiber=fiber,
        decay=decay,
        nonexist=nonexist,
        decompose=decompose,
        raw_text=text,
    )


def load_config(path) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from exc
    return parse_config(text, base_dir=p.parent)


def with_seed(cfg: RunConfig, seed: int) -> RunConfig:
    return replace(cfg, seed=seed, solver=replace(cfg.solver, seed=seed))
