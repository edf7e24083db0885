"""Implicit Euler to steady state with Newton and a finite-difference Jacobian."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg

from .errors import (
    ConfigurationError,
    ConvergenceError,
    JacobianError,
    LinearSolveError,
    XdgShockError,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverConfig:
    dt: float = 0.1
    fd_epsilon: float = 1e-7
    newton_tol: float = 1e-10
    newton_max_iters: int = 50
    steady_tol: float = 1e-9
    max_euler_steps: int = 500
    batching: bool = True
    # failed implicit steps are retried with dt halved, at most this many times in a row
    max_dt_halvings: int = 12

    def __post_init__(self):
        if not (self.dt > 0 and self.fd_epsilon > 0 and self.newton_tol > 0 and self.steady_tol > 0):
            raise ConfigurationError("time step and tolerances must be positive")
        if self.newton_max_iters < 1 or self.max_euler_steps < 1:
            raise ConfigurationError("iteration caps must be >= 1")


@dataclass
class SteadyReport:
    euler_steps: int = 0
    residual_norm: float = float("inf")
    converged: bool = False
    newton_iterations: list[int] = field(default_factory=list)
    dt_reductions: int = 0
    message: str = ""


def fd_jacobian(residual_fn, U: np.ndarray, cfg: SolverConfig, dof_cell: np.ndarray | None = None,
                R0: np.ndarray | None = None) -> np.ndarray:
    """Forward-difference Jacobian of ``residual_fn`` at ``U``.

    ``dof_cell`` maps each DOF to its cell on a 1D chain whose residual stencil
    is the cell and its two face neighbours.  When given and batching is on,
    DOFs of cells at least three apart are perturbed in the same evaluation.
    """
    U = np.asarray(U, dtype=float)
    n = U.size
    if R0 is None:
        R0 = residual_fn(U)
    m = R0.size
    eps = cfg.fd_epsilon * np.maximum(1.0, np.abs(U))
    step = (U + eps) - U
    J = np.zeros((m, n))

    def evaluate(Up, dofs):
        try:
            return residual_fn(Up)
        except XdgShockError as exc:
            raise JacobianError(f"residual failed when perturbing DOF(s) {list(dofs)}: {exc}",
                                dof=int(dofs[0])) from exc

    if not (cfg.batching and dof_cell is not None):
        for k in range(n):
            Up = U.copy()
            Up[k] += eps[k]
            J[:, k] = (evaluate(Up, [k]) - R0) / step[k]
        return J

    dof_cell = np.asarray(dof_cell)
    ncell = int(dof_cell.max()) + 1
    cell_dofs = [np.flatnonzero(dof_cell == c) for c in range(ncell)]
    local = max(len(d) for d in cell_dofs)
    for color in range(3):
        cells = range(color, ncell, 3)
        for d in range(local):
            dofs = [cell_dofs[c][d] for c in cells if d < len(cell_dofs[c])]
            if not dofs:
                continue
            Up = U.copy()
            Up[dofs] += eps[dofs]
            Rp = evaluate(Up, dofs)
            for k in dofs:
                c = dof_cell[k]
                rows = np.concatenate(cell_dofs[max(c - 1, 0):min(c + 2, ncell)])
                J[rows, k] = (Rp[rows] - R0[rows]) / step[k]
    return J


def implicit_euler_step(U_n: np.ndarray, cfg: SolverConfig, residual_fn, mass_apply,
                        dof_cell: np.ndarray | None = None) -> tuple[np.ndarray, int]:
    """Solve ``M (U - U_n)/dt + R(U) = 0`` by Newton; returns ``(U, iterations)``."""
    U = np.array(U_n, dtype=float)

    def G(V):
        return mass_apply(V - U_n) / cfg.dt + residual_fn(V)

    g = G(U)
    for it in range(cfg.newton_max_iters + 1):
        gnorm = float(np.max(np.abs(g)))
        if gnorm <= cfg.newton_tol:
            return U, it
        if it == cfg.newton_max_iters:
            break
        J = fd_jacobian(G, U, cfg, dof_cell, R0=g)
        try:
            lu = scipy.linalg.lu_factor(J, check_finite=True)
            if np.any(np.diag(lu[0]) == 0.0):
                raise LinearSolveError("singular Newton matrix")
            delta = scipy.linalg.lu_solve(lu, -g)
        except (ValueError, np.linalg.LinAlgError) as exc:
            raise LinearSolveError(f"Newton linear solve failed: {exc}") from exc
        U = U + delta
        g = G(U)
    raise ConvergenceError(
        f"Newton did not converge in {cfg.newton_max_iters} iterations (|G|={gnorm:.3e})",
        residual=gnorm,
    )


def solve_to_steady(U0: np.ndarray, cfg: SolverConfig, residual_fn, mass_apply,
                    dof_cell: np.ndarray | None = None) -> tuple[np.ndarray, SteadyReport]:
    """March implicit Euler until ``max|R(U)| <= steady_tol``.

    A step that fails (invalid state in a Newton iterate, Newton stall) is
    retried with half the step size; the step size grows back to ``cfg.dt``
    after each success.  Failures do not raise; they end the march and are
    reported.
    """
    U = np.array(U0, dtype=float)
    report = SteadyReport()
    try:
        report.residual_norm = float(np.max(np.abs(residual_fn(U))))
    except XdgShockError as exc:
        report.message = str(exc)
        return U, report
    dt = cfg.dt
    halvings = 0
    while report.residual_norm > cfg.steady_tol:
        if report.euler_steps >= cfg.max_euler_steps:
            report.message = f"steady state not reached in {cfg.max_euler_steps} steps"
            return U, report
        step_cfg = cfg if dt == cfg.dt else replace(cfg, dt=dt)
        try:
            U_new, its = implicit_euler_step(U, step_cfg, residual_fn, mass_apply, dof_cell)
            res = float(np.max(np.abs(residual_fn(U_new))))
        except XdgShockError as exc:
            if halvings >= cfg.max_dt_halvings:
                report.message = str(exc)
                log.warning("implicit Euler step %d failed: %s", report.euler_steps + 1, exc)
                return U, report
            halvings += 1
            report.dt_reductions += 1
            dt *= 0.5
            log.debug("step %d failed (%s), retrying with dt=%g", report.euler_steps + 1, exc, dt)
            continue
        U = U_new
        report.residual_norm = res
        report.euler_steps += 1
        report.newton_iterations.append(its)
        halvings = 0
        dt = min(2.0 * dt, cfg.dt)
        log.debug("euler step %d: |R| = %.3e (%d Newton)", report.euler_steps,
                  report.residual_norm, its)
    report.converged = True
    return U, report
