import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from tqdm import tqdm

from acms import AcmsSession, EdgeModeCache, LocalSetup
from experiments.cases import ROW_ERRORS, ReferenceCache, acms_record, build_case, cell_spec, failed_record, target_h, transmission_lines
from experiments.oracle_suite import run_oracle_suite
from experiments.views import ExperimentConfig
from femcore import build_space
from geometry import build_decomposition, mesh_domain
from postprocess import (
    SweepRecord,
    export_field,
    fit_loglog_slope,
    line_energy,
    onset_index,
    sample_line,
    write_summary_csv,
    write_sweep_csv,
)
from problem import HelmholtzProblem
from reference import solve_fem_direct
from utils.errors import ConfigurationError

logger = logging.getLogger(__name__)


@dataclass
class CommandResult:
    records: list[SweepRecord] = field(default_factory=list)
    summaries: dict[str, list[dict]] = field(default_factory=dict)
    files: list[Path] = field(default_factory=list)
    failures: list[str] = field(default_factory=list)


def _problem(config: ExperimentConfig) -> HelmholtzProblem:
    return HelmholtzProblem.from_config(config.problem)


def _progress(values, desc: str):
    return tqdm(values, desc=desc, leave=False, disable=len(values) < 2)


def cmd_convergence(config: ExperimentConfig, out_dir: Path, threads: int = 1) -> CommandResult:
    """Error and timings for every (decomposition, p, I_E, kappa) combination."""
    result = CommandResult()
    base = _problem(config)
    h = target_h(config)
    for cps in config.geometry.cells_per_subdomain:
        mesh, graph = build_case(config.geometry, cps, config.discretization.h, config.discretization.refinements)
        references = ReferenceCache(config, mesh, graph, threads)
        for p, modes in config.discretization.pairs():
            space = build_space(mesh, p, graph)
            session = AcmsSession(space, modes, threads, config.solver)
            for kappa in _progress(config.kappas(), f"J={mesh.decomposition.J} p={p} I_E={modes}"):
                problem = base.with_omega(kappa)
                try:
                    solution = session.run(problem)
                    error = references.error(space, solution.fem_coefficients, problem)
                    result.records.append(acms_record(kappa, h, modes, space, solution, err_rel=error))
                except ROW_ERRORS as e:
                    result.records.append(failed_record(kappa, h, modes, space, e))
    result.files.append(write_sweep_csv(result.records, out_dir / config.output.sweep_csv))
    return result


def cmd_mode_sweep(config: ExperimentConfig, out_dir: Path, threads: int = 1) -> CommandResult:
    """Error against I_E per kappa, with the onset of monotone decay and the post-onset slope."""
    result = CommandResult()
    base = _problem(config)
    h = target_h(config)
    modes_list = config.discretization.modes
    onsets, slopes = [], []
    for cps in config.geometry.cells_per_subdomain:
        mesh, graph = build_case(config.geometry, cps, config.discretization.h, config.discretization.refinements)
        references = ReferenceCache(config, mesh, graph, threads)
        J = mesh.decomposition.J
        for p in config.discretization.p:
            space = build_space(mesh, p, graph)
            cache = EdgeModeCache()
            for kappa in config.kappas():
                problem = base.with_omega(kappa)
                floor = None
                if config.reference.floor_factor is not None and config.reference.strategy != "none":
                    try:
                        direct = solve_fem_direct(space, problem, config.reference.solver, config.caps.direct_solve, threads=threads)
                        floor = config.reference.floor_factor * references.error(space, direct.coefficients, problem)
                    except ROW_ERRORS as e:
                        logger.warning(f"no FEM error floor for kappa={kappa} p={p}: {e}")
                errors = []
                for modes in _progress(modes_list, f"J={J} p={p} kappa={kappa:g}"):
                    session = AcmsSession(space, modes, threads, config.solver, cache)
                    try:
                        solution = session.run(problem)
                        error = references.error(space, solution.fem_coefficients, problem)
                        result.records.append(acms_record(kappa, h, modes, space, solution, err_rel=error))
                    except ROW_ERRORS as e:
                        error = None
                        result.records.append(failed_record(kappa, h, modes, space, e))
                    errors.append(math.nan if error is None else error)

                valid = [k for k, e in enumerate(errors) if np.isfinite(e) and e > 0]
                ie = [modes_list[k] for k in valid]
                errs = [errors[k] for k in valid]
                onset = onset_index(ie, errs, floor) if len(valid) == len(errors) else None
                onsets.append({"kappa": kappa, "p": p, "J": J, "onset_IE": None if onset is None else ie[onset], "floor": floor})
                slope = None
                if onset is not None:
                    tail = [(m, e) for m, e in zip(ie[onset:], errs[onset:]) if floor is None or e >= floor]
                    if len(tail) >= 3:
                        slope = fit_loglog_slope(*zip(*tail))
                slopes.append({"series": "err_vs_IE", "kappa": kappa, "p": p, "J": J, "slope": slope})
                logger.info(f"kappa={kappa:g} p={p} J={J}: onset I_E={onsets[-1]['onset_IE']}, slope={slope}")

    result.files.append(write_sweep_csv(result.records, out_dir / config.output.sweep_csv))
    result.summaries = {"onsets": onsets, "slopes": slopes}
    result.files.append(write_summary_csv(onsets, out_dir / "onsets.csv"))
    result.files.append(write_summary_csv(slopes, out_dir / "slopes.csv"))
    return result


def _median_timings(space, modes: int, problem: HelmholtzProblem, repetitions: int, threads: int, solver: str, setup: LocalSetup):
    runs = [AcmsSession(space, modes, threads, solver, setup=setup).run(problem) for _ in range(repetitions)]
    timings = {name: float(np.median([run.timings[name] for run in runs])) for name in ("t_bas", "t_ass", "t_sol")}
    return runs[-1], timings


def _slope_rows(series: str, xs: list[float], records: list[SweepRecord]) -> list[dict]:
    rows = []
    for quantity in ("t_bas", "t_ass", "t_sol", "t_tot"):
        ys = [getattr(record, quantity) for record in records]
        slope = None
        if len(xs) >= 3 and all(y > 0 for y in ys):
            slope = fit_loglog_slope(xs, ys)
        else:
            logger.warning(f"no {quantity} slope for series {series}: need 3 positive timings")
        rows.append({"series": series, "quantity": quantity, "slope": slope})
    return rows


def cmd_scaling(config: ExperimentConfig, out_dir: Path, threads: int = 1) -> CommandResult:
    """Timings against I_E on a fixed grid and against J at fixed I_E, with fitted log-log slopes."""
    result = CommandResult()
    block = config.scaling
    problem = _problem(config)
    geometry = config.geometry
    p = config.discretization.p[0]

    n = block.subdomains_per_side
    mesh, graph = mesh_domain(build_decomposition(n, n, side_length=geometry.side_length), _plain(config), config.discretization.h)
    space = build_space(mesh, p, graph)
    # subdomain factorizations do not depend on I_E and stay out of the timed phases
    setup = AcmsSession(space, 1, threads, config.solver).prepare(problem)
    by_modes = []
    for modes in _progress(sorted(block.modes), "I_E series"):
        solution, timings = _median_timings(space, modes, problem, block.repetitions, threads, config.solver, setup)
        record = acms_record(problem.kappa, config.discretization.h, modes, space, solution)
        by_modes.append(SweepRecord.with_timings(timings, **_counts(record)))

    by_grid = []
    for n in _progress(sorted(block.grid_sizes), "J series"):
        mesh, graph = mesh_domain(build_decomposition(n, n, side_length=geometry.side_length), _plain(config), block.grid_h)
        space = build_space(mesh, block.grid_p, graph)
        setup = AcmsSession(space, 1, threads, config.solver).prepare(problem)
        solution, timings = _median_timings(space, block.fixed_modes, problem, block.repetitions, threads, config.solver, setup)
        record = acms_record(problem.kappa, block.grid_h, block.fixed_modes, space, solution)
        by_grid.append(SweepRecord.with_timings(timings, **_counts(record)))

    result.records = by_modes + by_grid
    slopes = _slope_rows("vs_IE", [r.IE for r in by_modes], by_modes) + _slope_rows("vs_J", [r.J for r in by_grid], by_grid)
    result.summaries = {"slopes": slopes}
    result.files.append(write_sweep_csv(result.records, out_dir / config.output.sweep_csv))
    result.files.append(write_summary_csv(slopes, out_dir / "slopes.csv"))
    return result


def _plain(config: ExperimentConfig):
    return cell_spec(config.geometry.model_copy(update={"pore": None, "layout": "uniform"}))


def _counts(record: SweepRecord) -> dict:
    return {name: getattr(record, name) for name in ("kappa", "p", "h", "IE", "J", "NA", "NF")}


def cmd_crystal(config: ExperimentConfig, out_dir: Path, threads: int = 1) -> CommandResult:
    """Frequency sweep on the waveguide crystal: E_in and E_out per kappa, fields at flagged kappas."""
    result = CommandResult()
    block = config.crystal
    base = _problem(config)
    h = target_h(config)
    p, modes = config.discretization.pairs()[0]
    mesh, graph = build_case(config.geometry, config.geometry.cells_per_subdomain[0], config.discretization.h, config.discretization.refinements)
    space = build_space(mesh, p, graph)
    session = AcmsSession(space, modes, threads, config.solver)
    lines = transmission_lines(mesh, block.gamma_half_width)

    for kappa in _progress(config.kappas(), "kappa sweep"):
        problem = base.with_omega(kappa)
        try:
            solution = session.run(problem)
        except ROW_ERRORS as e:
            result.records.append(failed_record(kappa, h, modes, space, e))
            continue
        u = solution.fem_coefficients
        e_in = line_energy(space, u, lines.x_in, *lines.y_range)
        e_out = line_energy(space, u, lines.x_out, *lines.y_range)
        result.records.append(acms_record(kappa, h, modes, space, solution, E_in=e_in, E_out=e_out))
        logger.info(f"kappa={kappa:.4f}: E_in={e_in:.4e} E_out={e_out:.4e}")

        if any(abs(kappa - k) <= 1e-12 * max(1.0, abs(k)) for k in block.export_kappas):
            suffix = "vtk" if config.output.export_format == "vtk_legacy" else "csv"
            tag = f"kappa_{kappa:.4f}"
            result.files.append(
                export_field(space, u, out_dir / f"field_{tag}.{suffix}", config.output.export_format, config.output.raster_size)
            )
            ys, abs_in = sample_line(space, u, lines.x_in, *lines.profile_range, n=block.profile_samples)
            _, abs_out = sample_line(space, u, lines.x_out, *lines.profile_range, n=block.profile_samples)
            rows = [{"y": y, "abs_in": a, "abs_out": b} for y, a, b in zip(ys, abs_in, abs_out)]
            result.files.append(write_summary_csv(rows, out_dir / f"profile_{tag}.csv"))

    result.files.insert(0, write_sweep_csv(result.records, out_dir / config.output.sweep_csv))
    return result


def cmd_oracle_check(config: ExperimentConfig, out_dir: Path, threads: int = 1) -> CommandResult:
    result = CommandResult()
    checks = run_oracle_suite(config, threads)
    rows = [check.row() for check in checks]
    result.summaries = {"checks": rows}
    result.failures = [f"{check.name} (seed {check.seed}): {check.value:.3e} > {check.tolerance:.1e}" for check in checks if not check.passed]
    result.files.append(write_summary_csv(rows, out_dir / "oracle_check.csv"))
    return result


COMMANDS: dict[str, Callable[[ExperimentConfig, Path, int], CommandResult]] = {
    "convergence": cmd_convergence,
    "mode_sweep": cmd_mode_sweep,
    "scaling": cmd_scaling,
    "crystal": cmd_crystal,
    "oracle_check": cmd_oracle_check,
}


def run_command(config: ExperimentConfig, out_dir: Path, threads: int = 1) -> CommandResult:
    if config.command not in COMMANDS:
        raise ConfigurationError(f"unknown command '{config.command}'")
    out_dir.mkdir(parents=True, exist_ok=True)
    return COMMANDS[config.command](config, out_dir, threads)
