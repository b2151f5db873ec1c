"""Command-line front end.

Subcommands: validate, spectrum, solve, sweep, fiber, decay, compare,
nonexist, decompose.  Each run writes into its own directory: a copy of
the config, JSON reports, CSV histories/curves with %.17g floats, binary
fields, and finally an atomically written manifest.json with checksums of
everything else.  Exit codes: 0 success, 1 hypothesis or spectrum refusal
(including semantic model rejections), 2 solver non-convergence, 3 I/O,
configuration, and bad-argument errors (unusable decay windows included).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from . import __version__
from .config import RunConfig, load_config, parse_config, with_seed
from .diagnostics import (
    bump_decomposition,
    compare_cper,
    decay_fit,
    radial_shell_profile,
    translate_energy_curve,
)
from .errors import (
    ConfigError,
    ConvergenceError,
    FieldFormatError,
    GapsolError,
    HypothesisViolationError,
    ModelError,
)
from .fieldio import read_field, write_field
from .grid import Field
from .minimizer import (
    SolveReport,
    certify,
    initial_field,
    solve_ground_state,
    sweep as run_sweep,
)
from .model import (
    Problem,
    sample_model,
    validate_hypotheses,
    with_defect_amplitude,
    with_gamma_amplitude,
    zero_defect,
)
from .nehari import fiber_scan, small_sphere_radius
from .spectrum import assert_positive_spectrum, min_eigenvalue

COMMANDS = (
    "validate",
    "spectrum",
    "solve",
    "sweep",
    "fiber",
    "decay",
    "compare",
    "nonexist",
    "decompose",
)

EXIT_OK = 0
EXIT_REFUSED = 1
EXIT_NOT_CONVERGED = 2
EXIT_BAD_INPUT = 3


def _fmt(x: float) -> str:
    return "%.17g" % x


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) if isinstance(v, float) else str(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(
    outdir: Path,
    command: str,
    cfg: RunConfig,
    wall_time: float,
    extra: Optional[dict] = None,
) -> None:
    files = {}
    for p in sorted(outdir.rglob("*")):
        if p.is_file() and p.name != "manifest.json":
            rel = p.relative_to(outdir).as_posix()
            files[rel] = {"sha256": _sha256(p), "bytes": p.stat().st_size}
    manifest = {
        "version": __version__,
        "command": command,
        "config_sha256": hashlib.sha256(cfg.raw_text.encode()).hexdigest(),
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "wall_time": wall_time,
        "files": files,
    }
    if extra:
        manifest.update(extra)
    tmp = outdir / "manifest.json.tmp"
    _write_json(tmp, manifest)
    os.replace(tmp, outdir / "manifest.json")


def _history_rows(rep: SolveReport):
    k = len(rep.energy_history)
    cent = rep.centroid_history
    for i in range(k):
        row = [i, float(rep.energy_history[i])]
        if i < len(rep.grad_norm_history):
            row.append(float(rep.grad_norm_history[i]))
        else:
            row.append(float("nan"))
        if i < len(cent):
            row.extend(float(c) for c in cent[i])
        yield row


def _write_solve_outputs(outdir: Path, rep: SolveReport, prefix: str = "") -> None:
    dim = rep.centroid_history.shape[1] if rep.centroid_history.size else 1
    header = ["iter", "energy", "grad_norm"] + [f"centroid_{i}" for i in range(dim)]
    _write_csv(outdir / f"{prefix}history.csv", header, _history_rows(rep))
    _write_json(outdir / f"{prefix}report.json", rep.to_jsonable())
    write_field(outdir / f"{prefix}field.bin", rep.final.u)


def _load_field_or_solve(
    cfg: RunConfig, problem: Problem, field_file: Optional[str], outdir: Path
) -> tuple[Field, int, Optional[SolveReport]]:
    """Field for field-consuming commands: from file, or by solving first."""
    if field_file:
        return read_field(field_file), EXIT_OK, None
    cert = certify(problem, margin=cfg.spectrum.margin, eig_tol=cfg.spectrum.tol)
    rep = solve_ground_state(problem, cfg.solver, cert)
    _write_solve_outputs(outdir, rep)
    code = EXIT_OK if rep.converged else EXIT_NOT_CONVERGED
    return rep.final.u, code, rep


def _cmd_validate(cfg: RunConfig, problem: Problem, outdir: Path) -> int:
    report = validate_hypotheses(problem)
    srep = min_eigenvalue(
        problem.vtot, tol=cfg.spectrum.tol, max_iters=cfg.spectrum.max_iters
    )
    report = replace(report, spectral_floor=srep.lambda_min)
    floor_ok = srep.lambda_min >= cfg.spectrum.margin
    payload = {
        "hypotheses": report.to_jsonable(),
        "spectrum": srep.to_jsonable(),
        "spectral_floor_ok": floor_ok,
        "margin": cfg.spectrum.margin,
    }
    if report.passed and floor_ok:
        payload["small_sphere_radius"] = small_sphere_radius(problem)
    _write_json(outdir / "validate.json", payload)
    for check in report.checks:
        status = "ok" if check.passed else "FAILED"
        print(f"  {check.name}: {status} ({check.witness})")
    print(f"  spectral floor {srep.lambda_min:.6g} (margin {cfg.spectrum.margin:.1e})")
    return EXIT_OK if (report.passed and floor_ok) else EXIT_REFUSED


def _cmd_spectrum(cfg: RunConfig, problem: Problem, outdir: Path) -> int:
    srep = min_eigenvalue(
        problem.vtot, tol=cfg.spectrum.tol, max_iters=cfg.spectrum.max_iters
    )
    _write_json(outdir / "spectrum.json", srep.to_jsonable())
    write_field(outdir / "eigenvector.bin", srep.eigenvector)
    print(
        f"  lambda_min = {srep.lambda_min:.12g}  residual = {srep.eigen_residual:.3e}"
        f"  iterations = {srep.iterations}"
    )
    try:
        assert_positive_spectrum(srep, cfg.spectrum.margin)
    except HypothesisViolationError as exc:
        print(f"  refused: {exc}")
        return EXIT_REFUSED
    return EXIT_OK


def _cmd_solve(cfg: RunConfig, problem: Problem, outdir: Path) -> int:
    cert = certify(problem, margin=cfg.spectrum.margin, eig_tol=cfg.spectrum.tol)
    rep = solve_ground_state(problem, cfg.solver, cert)
    _write_solve_outputs(outdir, rep)
    print(
        f"  converged = {rep.converged}  c = {rep.c_estimate:.12g}  "
        f"iterations = {rep.iterations}  grad_norm = {rep.final.grad_norm:.3e}"
    )
    return EXIT_OK if rep.converged else EXIT_NOT_CONVERGED


def _make_swept_problem(problem: Problem, parameter: str, value: float) -> Problem:
    if parameter == "defect_amplitude":
        return with_defect_amplitude(problem, value)
    return with_gamma_amplitude(problem, value)


def _entry_dirname(value: float) -> str:
    return "value_" + _fmt(value).replace("-", "m").replace(".", "p")


def _sweep_worker(args: tuple) -> tuple[float, Optional[str], Optional[dict]]:
    text, base_dir, value, outdir_str = args
    cfg = parse_config(text, Path(base_dir) if base_dir else None)
    problem = sample_model(cfg.potential, cfg.nonlinearity, cfg.grid)
    try:
        swept = _make_swept_problem(problem, cfg.sweep.parameter, value)
        rep = solve_ground_state(swept, cfg.solver)
    except GapsolError as exc:
        return value, f"{type(exc).__name__}: {exc}", None
    sub = Path(outdir_str) / _entry_dirname(value)
    sub.mkdir(parents=True, exist_ok=True)
    _write_solve_outputs(sub, rep)
    return value, None, {
        "converged": rep.converged,
        "c_estimate": rep.c_estimate,
        "iterations": rep.iterations,
    }


def _cmd_sweep(
    cfg: RunConfig, problem: Problem, outdir: Path, jobs: int, base_dir: Optional[Path]
) -> int:
    if cfg.sweep is None:
        raise ConfigError("sweep command needs a [sweep] section")
    rows = []
    any_error = False
    any_unconverged = False
    if jobs > 1:
        # independent restarts in worker processes; no warm starting
        work = [
            (cfg.raw_text, str(base_dir) if base_dir else "", v, str(outdir))
            for v in cfg.sweep.values
        ]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_worker, work))
        for value, err, summary in results:
            if err is not None:
                any_error = True
                rows.append([value, "", float("nan"), 0, err])
            else:
                if not summary["converged"]:
                    any_unconverged = True
                rows.append(
                    [value, summary["converged"], summary["c_estimate"],
                     summary["iterations"], ""]
                )
    else:
        problems = []
        for v in cfg.sweep.values:
            problems.append((v, _make_swept_problem(problem, cfg.sweep.parameter, v)))
        entries = run_sweep(problems, cfg.solver, warm_start=cfg.sweep.warm_start)
        for entry in entries:
            if entry.error is not None:
                any_error = True
                rows.append([entry.label, "", float("nan"), 0, entry.error])
                continue
            rep = entry.report
            if not rep.converged:
                any_unconverged = True
            sub = outdir / _entry_dirname(entry.label)
            sub.mkdir(parents=True, exist_ok=True)
            _write_solve_outputs(sub, rep)
            rows.append([entry.label, rep.converged, rep.c_estimate, rep.iterations, ""])
    _write_csv(
        outdir / "summary.csv",
        ["value", "converged", "c_estimate", "iterations", "error"],
        rows,
    )
    for row in rows:
        print(f"  value {row[0]}: converged={row[1]} c={row[2]} {row[4]}")
    if any_error:
        return EXIT_REFUSED
    return EXIT_NOT_CONVERGED if any_unconverged else EXIT_OK


def _cmd_fiber(cfg: RunConfig, problem: Problem, outdir: Path) -> int:
    certify(problem, margin=cfg.spectrum.margin, eig_tol=cfg.spectrum.tol)
    if cfg.fiber.field_file:
        u = read_field(cfg.fiber.field_file)
    else:
        u = initial_field(problem, cfg.solver)
    scan = fiber_scan(u, problem, cfg.fiber.t_lo, cfg.fiber.t_hi, cfg.fiber.count)
    _write_csv(
        outdir / "fiber.csv",
        ["t", "psi", "energy"],
        zip(
            (float(t) for t in scan.ts),
            (float(v) for v in scan.psi_values),
            (float(v) for v in scan.energy_values),
        ),
    )
    _write_json(outdir / "fiber.json", {"sign_changes": scan.sign_changes})
    print(f"  {cfg.fiber.count} points, sign changes: {scan.sign_changes}")
    return EXIT_OK


def _cmd_decay(cfg: RunConfig, problem: Problem, outdir: Path) -> int:
    u, code, _ = _load_field_or_solve(cfg, problem, cfg.decay.field_file, outdir)
    radii, shell = radial_shell_profile(u)
    _write_csv(outdir / "decay.csv", ["radius", "shell_max"],
               zip((float(r) for r in radii), (float(s) for s in shell)))
    fit = decay_fit(u, window=cfg.decay.window)
    _write_json(
        outdir / "decay.json",
        {
            "alpha_hat": fit.alpha_hat,
            "c_hat": fit.c_hat,
            "r_squared": fit.r_squared,
            "window": list(fit.window),
            "n_samples": fit.n_samples,
            "reliable": fit.reliable,
        },
    )
    print(
        f"  alpha = {fit.alpha_hat:.6g}  r^2 = {fit.r_squared:.6f}  "
        f"window = [{fit.window[0]:.3g}, {fit.window[1]:.3g}]  "
        f"reliable = {fit.reliable}"
    )
    return code


def _cmd_compare(cfg: RunConfig, problem: Problem, outdir: Path) -> int:
    rep = compare_cper(problem, cfg.solver)
    _write_json(outdir / "compare.json", rep.to_jsonable())
    _write_solve_outputs(outdir, rep.full, prefix="full_")
    _write_solve_outputs(outdir, rep.per, prefix="periodic_")
    print(
        f"  c = {rep.c:.12g}  c_per = {rep.c_per:.12g}  gap = {rep.gap:.6g}  "
        f"V_loc sign: {rep.vloc_sign}"
    )
    return EXIT_OK if (rep.converged and rep.converged_per) else EXIT_NOT_CONVERGED


def _cmd_nonexist(cfg: RunConfig, problem: Problem, outdir: Path) -> int:
    if cfg.nonexist is None:
        raise ConfigError("nonexist command needs a [nonexist] section")
    per_problem = zero_defect(problem)
    cert = certify(per_problem, margin=cfg.spectrum.margin, eig_tol=cfg.spectrum.tol)
    certify(problem, margin=cfg.spectrum.margin, eig_tol=cfg.spectrum.tol)
    rep_per = solve_ground_state(per_problem, cfg.solver, cert)
    _write_solve_outputs(outdir, rep_per, prefix="periodic_")
    curve = translate_energy_curve(rep_per.final.u, problem, cfg.nonexist.offsets)
    dim = problem.grid.dim
    header = [f"offset_{i}" for i in range(dim)] + ["t_applied", "energy"]
    _write_csv(
        outdir / "nonexist.csv",
        header,
        ([*e.offset, e.t_applied, e.energy] for e in curve),
    )
    _write_json(
        outdir / "nonexist.json",
        {
            "c_per": rep_per.c_estimate,
            "entries": [
                {"offset": list(e.offset), "t_applied": e.t_applied, "energy": e.energy}
                for e in curve
            ],
        },
    )
    for e in curve:
        print(f"  offset {e.offset}: J = {e.energy:.12g} (t = {e.t_applied:.6g})")
    return EXIT_OK if rep_per.converged else EXIT_NOT_CONVERGED


def _cmd_decompose(cfg: RunConfig, problem: Problem, outdir: Path) -> int:
    u, code, _ = _load_field_or_solve(cfg, problem, cfg.decompose.field_file, outdir)
    dec = bump_decomposition(
        u,
        problem,
        threshold_frac=cfg.decompose.threshold_frac,
        sep_min_periods=cfg.decompose.sep_min_periods,
        taper_periods=cfg.decompose.taper_periods,
        min_bump_norm=cfg.decompose.min_bump_norm,
    )
    bump_files = []
    for i, bump in enumerate(dec.bumps):
        name = f"bump_{i:02d}.bin"
        write_field(outdir / name, bump.profile)
        bump_files.append(name)
    _write_json(
        outdir / "decompose.json",
        {
            "ell": dec.ell,
            "remainder_norm": dec.remainder_norm,
            "lions_remainder": dec.lions_remainder,
            "bumps": [
                {
                    "center": list(b.center),
                    "mass": b.mass,
                    "energy_per": b.energy_per,
                    "file": f,
                }
                for b, f in zip(dec.bumps, bump_files)
            ],
        },
    )
    print(
        f"  ell = {dec.ell}  remainder = {dec.remainder_norm:.3e}  "
        f"worst cell mass = {dec.lions_remainder:.3e}"
    )
    return code


def _resolve_outdir(args, cfg: RunConfig) -> Path:
    if args.output:
        return Path(args.output)
    if cfg.output_dir:
        return Path(cfg.output_dir)
    root = Path(os.environ.get("GAPSOL_RUNS", "runs"))
    stem = Path(args.config).stem
    return root / f"{stem}-{args.command}"


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="gapsol",
        description="Ground states of lattice nonlinear Schrodinger models "
        "by constrained energy minimization.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("-c", "--config", required=True, help="TOML run configuration")
        p.add_argument("-o", "--output", default=None, help="run directory")
        p.add_argument("-j", "--jobs", type=int, default=1, help="parallel sweep workers")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
    args = parser.parse_args(argv)

    t0 = time.perf_counter()
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = with_seed(cfg, args.seed)
        outdir = _resolve_outdir(args, cfg)
        outdir.mkdir(parents=True, exist_ok=True)
        (outdir / "config.toml").write_text(cfg.raw_text)
        print(f"gapsol {args.command} -> {outdir}")
        problem = sample_model(cfg.potential, cfg.nonlinearity, cfg.grid)
        if args.command == "validate":
            code = _cmd_validate(cfg, problem, outdir)
        elif args.command == "spectrum":
            code = _cmd_spectrum(cfg, problem, outdir)
        elif args.command == "solve":
            code = _cmd_solve(cfg, problem, outdir)
        elif args.command == "sweep":
            code = _cmd_sweep(cfg, problem, outdir, args.jobs, Path(args.config).parent)
        elif args.command == "fiber":
            code = _cmd_fiber(cfg, problem, outdir)
        elif args.command == "decay":
            code = _cmd_decay(cfg, problem, outdir)
        elif args.command == "compare":
            code = _cmd_compare(cfg, problem, outdir)
        elif args.command == "nonexist":
            code = _cmd_nonexist(cfg, problem, outdir)
        else:
            code = _cmd_decompose(cfg, problem, outdir)
        _write_manifest(outdir, args.command, cfg, time.perf_counter() - t0)
        return code
    except (HypothesisViolationError, ModelError) as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    except ConvergenceError as exc:
        print(f"did not converge: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except (ConfigError, FieldFormatError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except GapsolError as exc:
        print(f"failed: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED


if __name__ == "__main__":
    sys.exit(main())
