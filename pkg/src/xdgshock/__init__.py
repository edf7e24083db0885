"""Sub-cell accurate shock fitting with a one-dimensional extended DG solver."""
from .euler import (
    ConservedState,
    GasModel,
    PrimitiveState,
    SmoothingParams,
    physical_flux,
    post_shock_state,
    pre_shock_state,
    smoothed_initial_value,
    speed_of_sound_and_mach,
    to_conserved,
    to_primitive,
)
from .grid import LevelSet, build_grid, cut, near_band, well_placed
from .riemann import godunov_flux, solve_riemann
from .shockfit import LoopParams, ShockProblem, pseudo_time_loop
from .timestepper import SolverConfig
from .xdg import XdgField, XdgSpace, l2_project

__version__ = "0.1.0"

__all__ = [
    "ConservedState",
    "GasModel",
    "LevelSet",
    "LoopParams",
    "PrimitiveState",
    "ShockProblem",
    "SmoothingParams",
    "SolverConfig",
    "XdgField",
    "XdgSpace",
    "build_grid",
    "cut",
    "godunov_flux",
    "l2_project",
    "near_band",
    "physical_flux",
    "post_shock_state",
    "pre_shock_state",
    "pseudo_time_loop",
    "smoothed_initial_value",
    "solve_riemann",
    "speed_of_sound_and_mach",
    "to_conserved",
    "to_primitive",
    "well_placed",
]
