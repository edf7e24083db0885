"""Exact Riemann solver for the ideal-gas Euler equations and the Godunov flux.

Star-region pressure by Newton iteration on the pressure function, sampling
of the self-similar solution at ``x/t = 0``.  Everything is vectorised over
edges so that one call evaluates all interface fluxes of a grid.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, InvalidStateError, VacuumError
from .euler import (
    ConservedState,
    GasModel,
    PrimitiveState,
    flux_from_primitive,
    primitive_from_conserved,
)

PRESSURE_FLOOR = 1e-12
# stationary-wave tie-break: shocks with |speed| <= this sample their post-shock side
STATIONARY_EPS = 1e-12


@dataclass(frozen=True)
class RiemannSolution:
    p_star: float
    u_star: float
    left_wave: str
    right_wave: str
    # (head, tail) for rarefactions, (speed, speed) for shocks
    left_speeds: tuple[float, float]
    right_speeds: tuple[float, float]
    iterations: int = 0


def _pressure_function(p, rho, pk, a, gas):
    g = gas.gamma
    A = 2.0 / ((g + 1.0) * rho)
    B = (g - 1.0) / (g + 1.0) * pk
    shock = p > pk
    with np.errstate(invalid="ignore", divide="ignore"):
        sq = np.sqrt(A / (p + B))
        f_shock = (p - pk) * sq
        df_shock = sq * (1.0 - 0.5 * (p - pk) / (B + p))
        ratio = p / pk
        f_rare = 2.0 * a / (g - 1.0) * (ratio ** ((g - 1.0) / (2.0 * g)) - 1.0)
        df_rare = ratio ** (-(g + 1.0) / (2.0 * g)) / (rho * a)
    return np.where(shock, f_shock, f_rare), np.where(shock, df_shock, df_rare)


def _check_primitive(W, side):
    if np.any(~(W[0] > 0)) or np.any(~(W[2] > 0)):
        raise InvalidStateError(f"invalid {side} Riemann state", component=side)


def star_region(WL, WR, gas: GasModel, tol: float = 1e-14, max_iter: int = 100):
    """Star pressure and velocity for primitive arrays of shape ``(3, n)``.

    Iteration stops on a relative pressure change below ``tol``, never below
    8 eps since Newton can cycle between neighbouring doubles.
    Returns ``(p_star, u_star, iterations)``.
    """
    tol = max(tol, 8 * np.finfo(float).eps)
    WL = np.asarray(WL, dtype=float)
    WR = np.asarray(WR, dtype=float)
    _check_primitive(WL, "left")
    _check_primitive(WR, "right")
    g = gas.gamma
    rhoL, uL, pL = WL
    rhoR, uR, pR = WR
    aL = np.sqrt(g * pL / rhoL)
    aR = np.sqrt(g * pR / rhoR)
    du = uR - uL
    if np.any(2.0 * (aL + aR) / (g - 1.0) <= du):
        raise VacuumError("Riemann data generate vacuum")

    z = (g - 1.0) / (2.0 * g)
    p_tr = ((aL + aR - 0.5 * (g - 1.0) * du) / (aL / pL**z + aR / pR**z)) ** (1.0 / z)
    p = np.maximum(p_tr, PRESSURE_FLOOR)

    # converged entries are frozen so results do not depend on the other edges
    active = np.ones(p.shape, dtype=bool)
    it = 0
    while np.any(active):
        if it >= max_iter:
            fL, _ = _pressure_function(p, rhoL, pL, aL, gas)
            fR, _ = _pressure_function(p, rhoR, pR, aR, gas)
            res = float(np.max(np.abs(fL + fR + du)))
            raise ConvergenceError(
                f"star pressure did not converge in {max_iter} iterations", residual=res
            )
        it += 1
        pa = p[active]
        fL, dfL = _pressure_function(pa, rhoL[active], pL[active], aL[active], gas)
        fR, dfR = _pressure_function(pa, rhoR[active], pR[active], aR[active], gas)
        p_new = pa - (fL + fR + du[active]) / (dfL + dfR)
        p_new = np.where(p_new > 0, p_new, PRESSURE_FLOOR)
        change = 2.0 * np.abs(p_new - pa) / (p_new + pa)
        p[active] = p_new
        idx = np.flatnonzero(active)
        active[idx[change <= tol]] = False

    fL, _ = _pressure_function(p, rhoL, pL, aL, gas)
    fR, _ = _pressure_function(p, rhoR, pR, aR, gas)
    u = 0.5 * (uL + uR) + 0.5 * (fR - fL)
    return p, u, it


def sample_at_zero(WL, WR, p_star, u_star, gas: GasModel) -> np.ndarray:
    """Primitive state of the self-similar solution on the ray ``x/t = 0``."""
    g = gas.gamma
    g1 = g - 1.0
    gp = g + 1.0
    rhoL, uL, pL = WL
    rhoR, uR, pR = WR
    aL = np.sqrt(g * pL / rhoL)
    aR = np.sqrt(g * pR / rhoR)
    G6 = g1 / gp

    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        # left wave
        pratL = p_star / pL
        shockL = p_star > pL
        SL = uL - aL * np.sqrt(gp / (2 * g) * pratL + g1 / (2 * g))
        rho_starL = np.where(
            shockL, rhoL * (pratL + G6) / (G6 * pratL + 1.0), rhoL * pratL ** (1.0 / g)
        )
        a_starL = aL * pratL ** (g1 / (2 * g))
        SHL = uL - aL
        STL = u_star - a_starL
        cL = 2.0 / gp + G6 / aL * uL
        fanL = np.stack(
            [rhoL * cL ** (2.0 / g1), 2.0 / gp * (aL + 0.5 * g1 * uL), pL * cL ** (2.0 * g / g1)]
        )
        # right wave
        pratR = p_star / pR
        shockR = p_star > pR
        SR = uR + aR * np.sqrt(gp / (2 * g) * pratR + g1 / (2 * g))
        rho_starR = np.where(
            shockR, rhoR * (pratR + G6) / (G6 * pratR + 1.0), rhoR * pratR ** (1.0 / g)
        )
        a_starR = aR * pratR ** (g1 / (2 * g))
        SHR = uR + aR
        STR = u_star + a_starR
        cR = 2.0 / gp - G6 / aR * uR
        fanR = np.stack(
            [rhoR * cR ** (2.0 / g1), 2.0 / gp * (-aR + 0.5 * g1 * uR), pR * cR ** (2.0 * g / g1)]
        )

    starL = np.stack([rho_starL, u_star, p_star])
    starR = np.stack([rho_starR, u_star, p_star])
    WL = np.asarray(WL)
    WR = np.asarray(WR)

    left_side = u_star >= 0.0
    # left wave: pick W_L, star or fan
    left_is_L = np.where(shockL, SL > STATIONARY_EPS, SHL >= 0.0)
    left_is_fan = ~shockL & (SHL < 0.0) & (STL >= 0.0)
    right_is_R = np.where(shockR, SR < -STATIONARY_EPS, SHR <= 0.0)
    right_is_fan = ~shockR & (SHR > 0.0) & (STR <= 0.0)

    out_left = np.where(left_is_L, WL, np.where(left_is_fan, fanL, starL))
    out_right = np.where(right_is_R, WR, np.where(right_is_fan, fanR, starR))
    return np.where(left_side, out_left, out_right)


def godunov_flux_array(UL, UR, gas: GasModel) -> np.ndarray:
    """Godunov flux for conserved arrays of shape ``(3, n)``."""
    WL = primitive_from_conserved(UL, gas)
    WR = primitive_from_conserved(UR, gas)
    p, u, _ = star_region(WL, WR, gas)
    return flux_from_primitive(sample_at_zero(WL, WR, p, u, gas), gas)


def solve_riemann(left: PrimitiveState, right: PrimitiveState, gas: GasModel) -> RiemannSolution:
    WL = left.as_array()[:, None]
    WR = right.as_array()[:, None]
    p, u, it = star_region(WL, WR, gas)
    p, u = float(p[0]), float(u[0])
    g = gas.gamma
    s = gas.flux_scale
    aL = (g * left.p / left.rho) ** 0.5
    aR = (g * right.p / right.rho) ** 0.5
    if p > left.p:
        SL = left.u - aL * ((g + 1) / (2 * g) * p / left.p + (g - 1) / (2 * g)) ** 0.5
        lw, ls = "shock", (s * SL, s * SL)
    else:
        a_star = aL * (p / left.p) ** ((g - 1) / (2 * g))
        lw, ls = "rarefaction", (s * (left.u - aL), s * (u - a_star))
    if p > right.p:
        SR = right.u + aR * ((g + 1) / (2 * g) * p / right.p + (g - 1) / (2 * g)) ** 0.5
        rw, rs = "shock", (s * SR, s * SR)
    else:
        a_star = aR * (p / right.p) ** ((g - 1) / (2 * g))
        rw, rs = "rarefaction", (s * (right.u + aR), s * (u + a_star))
    return RiemannSolution(p, u, lw, rw, ls, rs, it)


def godunov_flux(left: ConservedState, right: ConservedState, gas: GasModel) -> np.ndarray:
    F = godunov_flux_array(left.as_array()[:, None], right.as_array()[:, None], gas)
    return F[:, 0]
