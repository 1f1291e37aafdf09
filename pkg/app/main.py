"""Command-line entry point: `python -m app.main <subcommand> [--config PATH] [--out DIR]`.

Subcommands: validate, simulate, optimize, check-gradient, check-adjoint, convergence.
Exit codes: 0 ok, 2 configuration error, 3 assumption-validation failure, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .config import get_config, set_quiet
from .errors import AssumptionError, ChbError, ConfigError, NumericalError
from .optimizer import (
    CHECK_COLUMNS,
    ITERATE_COLUMNS,
    Bounds,
    OcpProblem,
    adjoint_residual_study,
    build_targets,
    dot_product_test,
    smooth_control_direction,
    solve_ocp,
    taylor_test,
    variational_inequality_check,
)
from .potentials import ValidationReport, grid_check, validate_assumptions
from .run_config import RunConfig, load_run_config
from .sensitivity import adjoint_sweep, continuous_adjoint_residual
from .solver import DIAGNOSTIC_COLUMNS, PhysicsModel, run_forward
from .solver.probes import brinkman_mms_study, stability_probe, temporal_convergence
from .storage import RunStorage, generate_unique_run_name, read_series
from .utils.patterns import CONTROL_SERIES, control_series, initial_phase

logger = logging.getLogger(__name__)

SNAPSHOT_COLUMNS = ["index", "step", "t", "u_index"]

Handler = Callable[[RunConfig, Optional[RunStorage]], int]


# ---- shared setup ----------------------------------------------------------------

def validation_report(model: PhysicsModel) -> ValidationReport:
    tables = model.tables
    report = validate_assumptions(tables.potential, tables.mobility, model.kernel, model.eta, model.nu)
    report.checks.append(grid_check(model.grid, model.kernel))
    return report


def prepare_run(cfg: RunConfig, storage: Optional[RunStorage] = None) -> Tuple[PhysicsModel, np.ndarray, int, float]:
    """Model, phi0 and the time grid; refuses to run when an assumption fails."""
    model = PhysicsModel.from_config(cfg)
    report = validation_report(model)
    if storage is not None:
        storage.save_json("validation", report)
    if not report.passed:
        names = ", ".join(c.name for c in report.failures())
        raise AssumptionError(f"Assumption validation failed: {names}")
    phi0 = initial_phase(cfg.initial, model.grid, cfg.seed)
    n_steps, dt = model.time_grid(cfg.time.T, cfg.time.dt)
    logger.info("Time grid: %d steps of dt=%.6g up to T=%g", n_steps, dt, cfg.time.T)
    return model, phi0, n_steps, dt


def build_problem(cfg: RunConfig, model: PhysicsModel, phi0: np.ndarray, n_steps: int,
                  dt: float) -> Tuple[OcpProblem, Optional[np.ndarray]]:
    targets, U_true = build_targets(cfg, model, phi0, n_steps, dt)
    opt = cfg.optimizer
    bounds = Bounds.box(model.grid, opt.lower, opt.upper)
    problem = OcpProblem(model=model, phi0=phi0, n_steps=n_steps, dt=dt, targets=targets, bounds=bounds,
                         options=opt, kkt_tol=cfg.tolerances.kkt_tol)
    return problem, U_true


# ---- subcommands -------------------------------------------------------------------

def cmd_validate(cfg: RunConfig, storage: Optional[RunStorage]) -> int:
    model = PhysicsModel.from_config(cfg)
    report = validation_report(model)
    if storage is not None:
        storage.save_json("validation", report)
    for c in report.checks:
        logger.info("%-12s %s margin=%s %s", c.name, "pass" if c.passed else "FAIL", c.margin, c.detail)
    return 0 if report.passed else AssumptionError.exit_code


def cmd_simulate(cfg: RunConfig, storage: RunStorage) -> int:
    storage.save_config(cfg)
    model, phi0, n_steps, dt = prepare_run(cfg, storage)
    grid = model.grid
    forcing = control_series(cfg.forcing, grid, n_steps)
    every = cfg.time.snapshot_every
    counters = {"phi": 0, "u": 0}

    with storage.open_csv("diagnostics", DIAGNOSTIC_COLUMNS) as diag, \
            storage.open_csv("snapshots", SNAPSHOT_COLUMNS) as snaps:

        def on_step(n, state, report, stats):
            diag.write(report.row(stats))
            if n % every and n != n_steps:
                return
            u_index = ""
            storage.save_series_entry("phi", counters["phi"], grid, state.phi, subdir="snapshots")
            if n >= 1:
                # u that carried phi^{n-1} to phi^n
                storage.save_series_entry("u", counters["u"], grid, state.u, subdir="snapshots")
                u_index = counters["u"]
                counters["u"] += 1
            snaps.write({"index": counters["phi"], "step": n, "t": state.t, "u_index": u_index})
            counters["phi"] += 1
            if n:
                logger.info("Snapshot at step %d/%d (t=%.4g)", n, n_steps, state.t)

        result = run_forward(model, phi0, n_steps, dt, forcing=forcing, on_step=on_step)

    storage.save_field("final_phi", grid, result.final.phi)
    storage.save_field("final_u", grid, result.final.u)
    free = np.array([r.free_energy for r in result.reports])
    summary = {
        "n_steps": n_steps,
        "dt": dt,
        "initial": result.reports[0].model_dump(),
        "final": result.reports[-1].model_dump(),
        "mass_drift": abs(result.reports[-1].mass - result.reports[0].mass),
        "max_free_energy_increase": float(max(np.max(np.diff(free)), 0.0)),
    }
    storage.save_json("energy_report", summary)
    storage.render_script("plot_diagnostics", {
        "run_name": storage.root.name,
        "script_name": "plot_diagnostics.py",
        "csv_name": "diagnostics.csv",
        "figure_name": "diagnostics.png",
        "title": f"{cfg.physics.potential.kind.value} potential, {grid.nx}x{grid.ny}, {n_steps} steps",
        "panels": [
            {"column": "mass", "label": "mass"},
            {"column": "free_energy", "label": "free energy"},
            {"column": "diss_mu", "label": "|sqrt(m) grad mu|^2"},
            {"column": "max_abs_phi", "label": "max |phi|"},
        ],
    })
    return 0


def cmd_optimize(cfg: RunConfig, storage: RunStorage) -> int:
    storage.save_config(cfg)
    model, phi0, n_steps, dt = prepare_run(cfg, storage)
    grid = model.grid
    problem, U_true = build_problem(cfg, model, phi0, n_steps, dt)

    initial = None
    if cfg.optimizer.initial_control is not None:
        initial = read_series(cfg.optimizer.initial_control, CONTROL_SERIES, grid, vector=True)
        logger.info("Resuming from the control in %s", cfg.optimizer.initial_control)

    with storage.open_csv("optimization_log", ITERATE_COLUMNS) as log:
        result = solve_ocp(problem, initial_control=initial, on_iterate=lambda it: log.write(it.row()))

    ev = result.final
    traj = ev.forward.trajectory
    try:
        storage.save_series(CONTROL_SERIES, grid, result.control)
        storage.save_series("xi", grid, result.adjoint.xi, subdir="adjoint")
        storage.save_series("v", grid, result.adjoint.v, subdir="adjoint")
        storage.save_series("phi", grid, traj.phi_series(), subdir="states")
        storage.save_series("u", grid, traj.u_series(), subdir="states")
        residual = continuous_adjoint_residual(model, traj, result.adjoint, problem.targets)
    finally:
        ev.close()

    vi = variational_inequality_check(problem, result.control, result.gradient, samples=100, seed=cfg.seed)
    first = result.iterates[0]
    summary = {
        "status": result.status,
        "iterations": result.iterates[-1].iteration,
        "cost": ev.breakdown.model_dump(),
        "initial_cost": first.cost,
        "initial_kkt": result.initial_kkt,
        "kkt_residual": result.kkt_residual,
        "kkt_relative": result.kkt_residual / result.initial_kkt if result.initial_kkt > 0 else 0.0,
        "variational_inequality": vi.model_dump(),
        "variational_inequality_passed": vi.passed,
        "adjoint_residual": residual.printed,
    }
    if U_true is not None:
        summary["true_control_cost"] = problem.cost(U_true)
    storage.save_json("optimization", summary)
    storage.render_script("plot_optimization", {
        "run_name": storage.root.name,
        "script_name": "plot_optimization.py",
        "csv_name": "optimization_log.csv",
        "figure_name": "optimization.png",
        "title": f"Projected gradient, {grid.nx}x{grid.ny}, {n_steps} steps",
        "kkt_target": repr(problem.kkt_tol * result.initial_kkt),
    })
    if result.status == "line_search_failed":
        return NumericalError.exit_code
    return 0


def _check_problem(cfg: RunConfig, storage: RunStorage) -> Tuple[OcpProblem, np.ndarray]:
    storage.save_config(cfg)
    model, phi0, n_steps, dt = prepare_run(cfg, storage)
    problem, _ = build_problem(cfg, model, phi0, n_steps, dt)
    base = problem.bounds.project(control_series(cfg.forcing, model.grid, n_steps))
    return problem, base


def cmd_check_gradient(cfg: RunConfig, storage: RunStorage) -> int:
    problem, base = _check_problem(cfg, storage)
    checks = cfg.checks
    if checks.direction == "zero":
        direction = np.zeros(problem.control_shape)
    else:
        direction = smooth_control_direction(problem, cfg.seed)
    report = taylor_test(problem, base, direction, checks.epsilons, checks.slope_range)
    storage.save_csv("taylor", CHECK_COLUMNS, (r.row() for r in report.rows))
    storage.save_json("taylor", report)
    if report.passed:
        logger.info("Gradient check passed (slope %s)", "skipped" if report.skipped else f"{report.slope:.3f}")
        return 0
    logger.error("Gradient check failed: slope %.3f outside %s", report.slope, checks.slope_range)
    return NumericalError.exit_code


def cmd_check_adjoint(cfg: RunConfig, storage: RunStorage) -> int:
    problem, base = _check_problem(cfg, storage)
    report = dot_product_test(problem, base, cfg.checks.seeds, tolerance=cfg.checks.dot_tol)
    storage.save_csv("dot_product", CHECK_COLUMNS, (r.row() for r in report.rows))

    ev = problem.evaluate(base)
    try:
        adj = adjoint_sweep(problem.model, ev.forward.trajectory, problem.targets)
        residual = continuous_adjoint_residual(problem.model, ev.forward.trajectory, adj, problem.targets)
    finally:
        ev.close()
    storage.save_json("adjoint_residual", residual)
    if report.passed:
        logger.info("Adjoint check passed (max rel err %.3e)", report.max_rel_err)
        return 0
    logger.error("Adjoint check failed: max rel err %.3e > %.1e", report.max_rel_err, report.tolerance)
    return NumericalError.exit_code


def cmd_convergence(cfg: RunConfig, storage: RunStorage) -> int:
    storage.save_config(cfg)
    if cfg.forcing.path is not None:
        raise ConfigError("The convergence study needs a time-independent builtin forcing pattern")
    model, phi0, n_steps, dt = prepare_run(cfg, storage)
    forcing = control_series(cfg.forcing, model.grid, n_steps)

    mms = brinkman_mms_study(nu=cfg.physics.nu, eta=cfg.physics.eta.value)
    storage.save_csv("brinkman_mms", ["n", "h", "u_error", "order"], mms)
    temporal = temporal_convergence(model, phi0, n_steps * dt, n_steps, levels=3, forcing=forcing[0])
    storage.save_csv("temporal", ["n_steps", "dt", "error", "order"], temporal)
    probe = stability_probe(model, phi0, n_steps, dt, forcing, seed=cfg.seed)
    storage.save_csv("stability", ["epsilon", "sup_phi_H", "u_L2V", "ratio"], probe["rows"])
    adjoint = adjoint_residual_study(cfg, levels=2)
    storage.save_csv("adjoint_residual", ["nx", "ny", "dt", "printed", "order_printed"], adjoint)
    storage.save_json("convergence", {
        "brinkman_order": mms[-1]["order"],
        "temporal_order": temporal[-1]["order"],
        "stability_slope_phi": probe["slope_phi"],
        "stability_slope_u": probe["slope_u"],
        "adjoint_residual_order": adjoint[-1]["order_printed"],
    })
    return 0


COMMANDS: Dict[str, Tuple[Handler, str]] = {
    "validate": (cmd_validate, "Check the structural assumptions of a configuration"),
    "simulate": (cmd_simulate, "Run the forward solver and write diagnostics and snapshots"),
    "optimize": (cmd_optimize, "Solve the optimal control problem by projected gradient descent"),
    "check-gradient": (cmd_check_gradient, "Taylor remainder test of the reduced gradient"),
    "check-adjoint": (cmd_check_adjoint, "Tangent/adjoint dot-product test and continuum adjoint residual"),
    "convergence": (cmd_convergence, "Grid and time-step refinement studies"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None, help="Run configuration (YAML); defaults apply if omitted")
    common.add_argument("--out", type=Path, default=None, help="Output directory (default: output/<command>-<stamp>)")
    common.add_argument("--seed", type=int, default=None, help="Override the configured RNG seed")
    common.add_argument("--quiet", action="store_true", help="Only log warnings and errors")

    parser = argparse.ArgumentParser(prog="chb", description="Nonlocal Cahn-Hilliard-Brinkman solver with "
                                                              "optimal control")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text)
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    cfg = load_run_config(args.config) if args.config is not None else RunConfig()
    if args.seed is not None:
        cfg.seed = args.seed
    return cfg


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    get_config()
    if args.quiet:
        set_quiet()

    handler, _ = COMMANDS[args.command]
    try:
        cfg = load_config(args)
        storage = None
        if args.out is not None:
            storage = RunStorage(args.out)
        elif args.command != "validate":
            storage = RunStorage(Path("output") / generate_unique_run_name(args.command))
        code = handler(cfg, storage)
    except ChbError as e:
        logger.error("%s failed: %s", args.command, e)
        return e.exit_code
    logger.info("%s finished with exit code %d", args.command, code)
    return code


if __name__ == "__main__":
    sys.exit(main())
