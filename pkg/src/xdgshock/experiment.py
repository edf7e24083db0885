"""Stationary normal shock experiment and its CSV artifacts."""
from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import RunConfig
from .euler import (
    GasModel,
    SmoothingParams,
    post_shock_state,
    pre_shock_state,
    primitive_from_conserved,
    smoothed_conserved,
    to_conserved,
)
from .errors import PlacementError
from .grid import build_grid
from .shockfit import LoopParams, PseudoTimeTrace, ShockProblem, cut_cell_p0, pseudo_time_loop
from .timestepper import SolverConfig
from .xdg import XdgField, l2_project, sample

log = logging.getLogger(__name__)

HISTORY_HEADER = ["l", "x_interface", "bracket_lo", "bracket_hi", "i_p0", "i_rho", "i_mom",
                  "direction", "euler_steps", "residual_norm"]
SOLUTION_HEADER = ["x", "species", "rho", "u", "p", "rho_p0"]
SUMMARY_HEADER = ["x_interface", "shock_pos", "error", "converged", "loop_converged", "pseudo_steps"]


def fmt(value: float) -> str:
    return f"{float(value):.16e}"


@dataclass
class ExperimentResult:
    config: RunConfig
    trace: PseudoTimeTrace
    error: float
    converged: bool


def build_problem(cfg: RunConfig, gas: GasModel | None = None) -> tuple[ShockProblem, XdgField]:
    gas = gas or GasModel()
    pre = pre_shock_state(cfg.mach, gas)
    post = post_shock_state(pre, cfg.mach, gas)
    U_pre = to_conserved(pre, gas).as_array()
    U_post = to_conserved(post, gas).as_array()
    grid = build_grid(cfg.domain[0], cfg.domain[1], cfg.cells)
    problem = ShockProblem(grid, cfg.degree, U_pre, U_post, gas)
    space = problem.space(cfg.interface_init)
    if cfg.init == "exact":
        def initial(x):
            return np.where(x < cfg.shock_pos, U_pre[:, None, None], U_post[:, None, None])
    else:
        sp = SmoothingParams(h=grid.h, degree=cfg.degree, c_tilde=cfg.smoothing)

        def initial(x):
            return smoothed_conserved(x, U_pre, U_post, cfg.shock_pos, sp)
    return problem, l2_project(initial, space)


def run(cfg: RunConfig) -> ExperimentResult:
    problem, initial = build_problem(cfg)
    solver = SolverConfig(dt=cfg.dt)
    params = LoopParams(tol_x=cfg.tol_x, max_pseudo_steps=cfg.max_pseudo_steps,
                        indicator=cfg.indicator, delta_agg=cfg.delta_agg, p0_mode=cfg.p0_mode)
    try:
        trace = pseudo_time_loop(problem, initial, cfg.interface_init, solver, params)
    except PlacementError as exc:
        if exc.trace is None or not exc.trace.steps:
            raise
        log.warning("%s", exc)
        trace = exc.trace
    error = abs(trace.final_position - cfg.shock_pos)
    # the bracket always holds x_s when every shift was right, so error <= tol_x then
    converged = trace.converged and error <= cfg.tol_x
    return ExperimentResult(cfg, trace, error, converged)


def write_history(path: Path, trace: PseudoTimeTrace) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HISTORY_HEADER)
        for s in trace.steps:
            r = s.indicators
            w.writerow([s.l, fmt(s.x_interface), fmt(s.bracket_lo), fmt(s.bracket_hi),
                        fmt(r.i_p0), fmt(r.i_rho), fmt(r.i_mom), s.direction,
                        s.steady.euler_steps, fmt(s.steady.residual_norm)])


def write_solution(path: Path, fld: XdgField, gas: GasModel, points: int, p0_mode: str) -> None:
    x, elem, U = sample(fld, points)
    W = primitive_from_conserved(U, gas, check=False)
    rho_p0 = np.array([cut_cell_p0(fld, k, p0_mode)[0] for k in range(fld.space.num_elements)])
    cells = fld.space.grid.cells
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SOLUTION_HEADER)
        for i in range(x.size):
            k = elem[i]
            w.writerow([fmt(x[i]), cells[k].species, fmt(W[0, i]), fmt(W[1, i]), fmt(W[2, i]),
                        fmt(rho_p0[k])])


def write_summary(path: Path, result: ExperimentResult) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_HEADER)
        w.writerow([fmt(result.trace.final_position), fmt(result.config.shock_pos), fmt(result.error),
                    int(result.converged), int(result.trace.converged), len(result.trace.steps)])


def write_config(path: Path, cfg: RunConfig) -> None:
    path.write_text(json.dumps(cfg.to_json(), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def run_experiment(cfg: RunConfig, gas: GasModel | None = None) -> ExperimentResult:
    """Run the pseudo-time loop and write config.json, history.csv, solution_l*.csv, summary.csv."""
    gas = gas or GasModel()
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    write_config(out / "config.json", cfg)
    result = run(cfg)
    write_history(out / "history.csv", result.trace)
    for s in result.trace.steps:
        write_solution(out / f"solution_l{s.l}.csv", s.field, gas, cfg.sample_points, cfg.p0_mode)
    write_summary(out / "summary.csv", result)
    log.info("final interface %.10f, error %.3e, converged=%s (%s)", result.trace.final_position,
             result.error, result.converged, result.trace.message)
    return result
