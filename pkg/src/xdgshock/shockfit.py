"""Sub-cell correction of the shock interface.

Three indicators judge the interface position inside the cut background
cell; the sign of the driving one selects a bisection half of the current
bracket.  Each pseudo-step freezes the interface, drives the flow to a
steady state and then moves the interface.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, IndicatorError, PlacementError, XdgShockError
from .euler import GasModel, primitive_from_conserved
from .grid import SPECIES_A, SPECIES_B, BackgroundGrid, CutCellGrid, LevelSet, cut, near_band, well_placed
from .timestepper import SolverConfig, SteadyReport, solve_to_steady
from .xdg import DgOperator, XdgField, XdgSpace, p0_projection, transfer

log = logging.getLogger(__name__)

LEFT, RIGHT, CONVERGED = "left", "right", "converged"
INDICATORS = ("p0", "density", "momentum")


@dataclass(frozen=True)
class IndicatorReport:
    i_p0: float
    i_rho: float
    i_mom: float
    chosen: str = "p0"

    def __post_init__(self):
        if self.chosen not in INDICATORS:
            raise ConfigurationError(f"unknown indicator {self.chosen!r}")
        if not all(math.isfinite(v) for v in (self.i_p0, self.i_rho, self.i_mom)):
            raise IndicatorError(f"non-finite indicator value in {self}")

    def value(self, name: str | None = None) -> float:
        return {"p0": self.i_p0, "density": self.i_rho, "momentum": self.i_mom}[name or self.chosen]

    @property
    def driving(self) -> float:
        return self.value()


def _cut_pair(cg: CutCellGrid) -> tuple[int, int]:
    if cg.cut_elements is None:
        raise IndicatorError("no cut background cell")
    return cg.cut_elements


def cut_cell_p0(fld: XdgField, element: int, mode: str = "zeroth_mode") -> np.ndarray:
    """P0 value of one cut-cell.

    ``zeroth_mode`` keeps only the constant mode of the background-cell basis,
    i.e. the mean of the cut-cell polynomial over the whole background cell;
    ``cut_mean`` is the mean over the cut-cell itself.
    """
    if mode == "zeroth_mode":
        return fld.coeffs[element, :, 0].copy()
    if mode == "cut_mean":
        return p0_projection(fld, element)
    raise ConfigurationError(f"unknown P0 mode {mode!r}")


def near_band_density(fld: XdgField, width: int = 1) -> tuple[float, float]:
    """Upstream and downstream density read off the pure cells next to the cut cell."""
    cg = fld.space.grid
    band = near_band(cg, width)
    if not band.upstream or not band.downstream:
        raise IndicatorError("near band is missing one side of the cut cell")

    def mean(cells, species):
        return float(np.mean([p0_projection(fld, cg.element_index(j, species))[0] for j in cells]))

    return mean(band.upstream, SPECIES_A), mean(band.downstream, SPECIES_B)


def indicator_p0(fld: XdgField, band: tuple[float, float] | None = None, mode: str = "zeroth_mode",
                 width: int = 1) -> float:
    """Mean of the near-band densities minus the mean of the two cut-cell P0 densities."""
    kA, kB = _cut_pair(fld.space.grid)
    rho_pre, rho_post = band if band is not None else near_band_density(fld, width)
    rA = cut_cell_p0(fld, kA, mode)[0]
    rB = cut_cell_p0(fld, kB, mode)[0]
    return 0.5 * (rho_pre + rho_post) - 0.5 * (rA + rB)


def interface_traces(fld: XdgField) -> tuple[np.ndarray, np.ndarray]:
    """Conserved traces at the interface from the A and B cut-cells."""
    cg = fld.space.grid
    kA, kB = _cut_pair(cg)
    x = np.float64(cg.x_interface)
    return fld.element_values(kA, x), fld.element_values(kB, x)


def _cut_length(cg: CutCellGrid) -> float:
    a, b = cg.background.cell(cg.cut_cell_index)
    return b - a


def indicator_density_jump(fld: XdgField) -> float:
    UA, UB = interface_traces(fld)
    return float(UA[1] - UB[1]) / _cut_length(fld.space.grid)


def momentum_flux(U, gas: GasModel) -> float:
    W = primitive_from_conserved(np.asarray(U)[:, None], gas, check=False)[:, 0]
    return float(W[2] + W[0] * W[1] ** 2)


def indicator_momentum_jump(fld: XdgField, gas: GasModel) -> float:
    UA, UB = interface_traces(fld)
    return (momentum_flux(UA, gas) - momentum_flux(UB, gas)) / _cut_length(fld.space.grid)


def indicators(fld: XdgField, gas: GasModel, chosen: str = "p0", mode: str = "zeroth_mode",
               width: int = 1) -> IndicatorReport:
    return IndicatorReport(
        indicator_p0(fld, mode=mode, width=width),
        indicator_density_jump(fld),
        indicator_momentum_jump(fld, gas),
        chosen,
    )


def shift_direction(value: float, zero_tol: float = 1e-8) -> str:
    if not math.isfinite(value):
        raise IndicatorError(f"non-finite indicator value {value}")
    if abs(value) <= zero_tol:
        return CONVERGED
    return RIGHT if value > 0 else LEFT


@dataclass(frozen=True)
class BisectionState:
    bracket_lo: float
    bracket_hi: float
    x_current: float
    history: tuple = ()

    def __post_init__(self):
        if not self.bracket_lo < self.x_current < self.bracket_hi:
            raise ConfigurationError(
                f"position {self.x_current} outside bracket ({self.bracket_lo}, {self.bracket_hi})"
            )

    @property
    def width(self) -> float:
        return self.bracket_hi - self.bracket_lo

    def exhausted(self, tol: float) -> bool:
        return self.width <= tol


def bisection_update(bs: BisectionState, direction: str, report: IndicatorReport | None = None) -> BisectionState:
    if direction == LEFT:
        lo, hi = bs.bracket_lo, bs.x_current
    elif direction == RIGHT:
        lo, hi = bs.x_current, bs.bracket_hi
    else:
        raise ConfigurationError(f"bisection needs 'left' or 'right', got {direction!r}")
    return BisectionState(lo, hi, 0.5 * (lo + hi), bs.history + ((bs.x_current, report),))


@dataclass
class PseudoStep:
    l: int
    x_interface: float
    bracket_lo: float
    bracket_hi: float
    indicators: IndicatorReport
    steady: SteadyReport
    direction: str
    field: XdgField = field(repr=False)


@dataclass
class PseudoTimeTrace:
    steps: list[PseudoStep] = field(default_factory=list)
    final_position: float = float("nan")
    converged: bool = False
    message: str = ""

    @property
    def positions(self) -> list[float]:
        return [s.x_interface for s in self.steps]


@dataclass(frozen=True)
class LoopParams:
    tol_x: float = 1e-4
    max_pseudo_steps: int = 40
    indicator: str = "p0"
    delta_agg: float = 0.3
    indicator_zero_tol: float = 1e-8
    p0_mode: str = "zeroth_mode"
    band_width: int = 1

    def __post_init__(self):
        if self.indicator not in INDICATORS:
            raise ConfigurationError(f"unknown indicator {self.indicator!r}")
        if not (self.tol_x > 0 and self.max_pseudo_steps >= 1):
            raise ConfigurationError("tol_x must be positive and max_pseudo_steps >= 1")


class ShockProblem:
    """Background grid, gas and Dirichlet states shared by all pseudo-steps."""

    def __init__(self, grid: BackgroundGrid, degree: int, U_left, U_right, gas: GasModel):
        self.grid = grid
        self.degree = degree
        self.U_left = np.asarray(U_left, dtype=float)
        self.U_right = np.asarray(U_right, dtype=float)
        self.gas = gas

    def space(self, x_interface: float) -> XdgSpace:
        return XdgSpace(cut(self.grid, LevelSet(x_interface)), self.degree)

    def operator(self, space: XdgSpace) -> DgOperator:
        return DgOperator(space, self.U_left, self.U_right, self.gas)

    def steady(self, fld: XdgField, cfg: SolverConfig) -> tuple[XdgField, SteadyReport]:
        op = self.operator(fld.space)
        U, report = solve_to_steady(fld.coeffs.ravel(), cfg, op, op.mass_apply, op.dof_element)
        return XdgField(fld.space, U.reshape(op.shape)), report


def pseudo_time_loop(problem: ShockProblem, initial: XdgField, x0: float,
                     cfg: SolverConfig | None = None, params: LoopParams | None = None) -> PseudoTimeTrace:
    cfg = cfg or SolverConfig()
    params = params or LoopParams()
    trace = PseudoTimeTrace()
    cg0 = cut(problem.grid, LevelSet(x0))
    if cg0.cut_cell_index is None:
        raise ConfigurationError(f"initial interface {x0} lies on a grid node")
    lo, hi = problem.grid.cell(cg0.cut_cell_index)
    bs = BisectionState(lo, hi, x0)
    fld = initial

    for l in range(params.max_pseudo_steps):
        space = problem.space(bs.x_current)
        if not well_placed(space.grid, params.delta_agg):
            trace.final_position = bs.x_current
            trace.message = (f"interface {bs.x_current} violates volume fraction threshold "
                             f"{params.delta_agg}: {space.grid.volume_fractions()}")
            if l == 0:
                raise ConfigurationError(f"initial {trace.message}")
            raise PlacementError(trace.message, trace)
        if fld.space.grid != space.grid:
            fld = transfer(fld, space)
        fld, steady = problem.steady(fld, cfg)
        if not steady.converged:
            trace.message = f"steady solve failed at pseudo-step {l}: {steady.message}"
            trace.final_position = bs.x_current
            log.warning(trace.message)
            return trace
        try:
            report = indicators(fld, problem.gas, params.indicator, params.p0_mode, params.band_width)
        except XdgShockError as exc:
            trace.message = f"indicator evaluation failed at pseudo-step {l}: {exc}"
            trace.final_position = bs.x_current
            return trace
        direction = shift_direction(report.driving, params.indicator_zero_tol)
        step = PseudoStep(l, bs.x_current, bs.bracket_lo, bs.bracket_hi, report, steady, direction, fld)
        trace.steps.append(step)
        log.info("pseudo-step %d: x=%.10f I_p0=%+.6f I_rho=%+.6f I_m=%+.6f -> %s (%d Euler steps)",
                 l, bs.x_current, report.i_p0, report.i_rho, report.i_mom, direction, steady.euler_steps)
        if direction == CONVERGED:
            trace.final_position = bs.x_current
            trace.converged = True
            trace.message = "indicator vanished"
            return trace
        new = bisection_update(bs, direction, report)
        moved = abs(new.x_current - bs.x_current)
        bs = new
        if moved <= params.tol_x:
            trace.final_position = bs.x_current
            trace.converged = True
            trace.message = f"interface moved by {moved:.3e} <= tol_x"
            return trace

    trace.final_position = bs.x_current
    trace.message = f"no convergence within {params.max_pseudo_steps} pseudo-steps"
    return trace


__all__ = [
    "BisectionState",
    "IndicatorReport",
    "LoopParams",
    "PseudoStep",
    "PseudoTimeTrace",
    "ShockProblem",
    "bisection_update",
    "cut_cell_p0",
    "indicator_density_jump",
    "indicator_momentum_jump",
    "indicator_p0",
    "indicators",
    "interface_traces",
    "momentum_flux",
    "near_band_density",
    "pseudo_time_loop",
    "shift_direction",
]
