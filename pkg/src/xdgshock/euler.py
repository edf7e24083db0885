"""Ideal-gas Euler model: state algebra, flux, normal-shock relations.

Array helpers work on conserved/primitive data stacked along the first
axis, i.e. shape ``(3, ...)``; the dataclass wrappers are for scalar use.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, InvalidStateError, ShockDomainError


@dataclass(frozen=True)
class GasModel:
    gamma: float = 1.4
    mach_ref: float | None = None

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise ConfigurationError(f"gamma must exceed 1, got {self.gamma}")
        if self.mach_ref is None:
            object.__setattr__(self, "mach_ref", 1.0 / math.sqrt(self.gamma))
        if not self.mach_ref > 0.0:
            raise ConfigurationError(f"mach_ref must be positive, got {self.mach_ref}")

    @property
    def flux_scale(self) -> float:
        """Prefactor ``1/(gamma M_ref^2)``; exactly one for ``M_ref = 1/sqrt(gamma)``."""
        scale = 1.0 / (self.gamma * self.mach_ref**2)
        if math.isclose(scale, 1.0, rel_tol=8 * np.finfo(float).eps, abs_tol=0.0):
            return 1.0
        return scale


@dataclass(frozen=True)
class ConservedState:
    rho: float
    mom: float
    energy: float

    def as_array(self) -> np.ndarray:
        return np.array([self.rho, self.mom, self.energy], dtype=float)

    @classmethod
    def from_array(cls, a) -> "ConservedState":
        return cls(float(a[0]), float(a[1]), float(a[2]))


@dataclass(frozen=True)
class PrimitiveState:
    rho: float
    u: float
    p: float

    def as_array(self) -> np.ndarray:
        return np.array([self.rho, self.u, self.p], dtype=float)

    @classmethod
    def from_array(cls, a) -> "PrimitiveState":
        return cls(float(a[0]), float(a[1]), float(a[2]))


@dataclass(frozen=True)
class SmoothingParams:
    h: float
    degree: int
    c_tilde: float = 1.0

    def __post_init__(self):
        if not (self.c_tilde > 0 and self.h > 0 and self.degree >= 0):
            raise ConfigurationError(f"invalid smoothing parameters {self}")

    @property
    def width(self) -> float:
        return self.c_tilde * self.h / max(1, self.degree)


# -- array kernels ----------------------------------------------------------

def primitive_from_conserved(U, gas: GasModel, check: bool = True) -> np.ndarray:
    U = np.asarray(U, dtype=float)
    rho, mom, energy = U[0], U[1], U[2]
    if check and np.any(~(rho > 0)):
        raise InvalidStateError("non-positive density", component="rho")
    u = mom / rho
    p = (gas.gamma - 1.0) * (energy - 0.5 * mom * u)
    if check and np.any(~(p > 0)):
        raise InvalidStateError("non-positive pressure (internal energy)", component="p")
    return np.stack([rho, u, p])


def conserved_from_primitive(W, gas: GasModel) -> np.ndarray:
    W = np.asarray(W, dtype=float)
    rho, u, p = W[0], W[1], W[2]
    return np.stack([rho, rho * u, p / (gas.gamma - 1.0) + 0.5 * rho * u * u])


def flux_from_primitive(W, gas: GasModel) -> np.ndarray:
    rho, u, p = W[0], W[1], W[2]
    mom = rho * u
    energy = p / (gas.gamma - 1.0) + 0.5 * mom * u
    F = np.stack([mom, mom * u + p, u * (energy + p)])
    s = gas.flux_scale
    return F if s == 1.0 else s * F


def flux_from_conserved(U, gas: GasModel, check: bool = True) -> np.ndarray:
    U = np.asarray(U, dtype=float)
    W = primitive_from_conserved(U, gas, check=check)
    u, p = W[1], W[2]
    F = np.stack([U[1], U[1] * u + p, u * (U[2] + p)])
    s = gas.flux_scale
    return F if s == 1.0 else s * F


# -- scalar operations ------------------------------------------------------

def to_primitive(U: ConservedState, gas: GasModel) -> PrimitiveState:
    if not U.rho > 0:
        raise InvalidStateError(f"density must be positive, got {U.rho}", component="rho")
    u = U.mom / U.rho
    p = (gas.gamma - 1.0) * (U.energy - 0.5 * U.mom * u)
    if not p > 0:
        raise InvalidStateError(
            f"internal energy must be positive, got rho*e = {U.energy - 0.5 * U.mom * u}",
            component="energy",
        )
    return PrimitiveState(U.rho, u, p)


def to_conserved(W: PrimitiveState, gas: GasModel) -> ConservedState:
    if not (W.rho > 0 and W.p > 0):
        raise InvalidStateError(f"invalid primitive state {W}")
    return ConservedState.from_array(conserved_from_primitive(W.as_array(), gas))


def physical_flux(U: ConservedState, gas: GasModel) -> np.ndarray:
    """Convective flux ``(rho u, rho u^2 + p, u (rho E + p))`` times the reference prefactor."""
    W = to_primitive(U, gas)
    return flux_from_primitive(W.as_array(), gas)


def speed_of_sound_and_mach(W: PrimitiveState, gas: GasModel) -> tuple[float, float]:
    a = math.sqrt(gas.gamma * W.p / W.rho)
    return a, abs(W.u) / a


def pre_shock_state(mach_s: float, gas: GasModel, rho: float = 1.0, p: float = 1.0) -> PrimitiveState:
    """Upstream state moving at ``mach_s`` times its own sound speed."""
    return PrimitiveState(rho, math.sqrt(gas.gamma * p / rho) * mach_s, p)


def post_shock_state(pre: PrimitiveState, mach_s: float, gas: GasModel) -> PrimitiveState:
    if not mach_s >= 1.0:
        raise ShockDomainError(f"shock Mach number must be >= 1, got {mach_s}")
    g = gas.gamma
    m2 = mach_s * mach_s
    compression = (g + 1.0) * m2 / (2.0 + (g - 1.0) * m2)
    return PrimitiveState(
        compression * pre.rho,
        pre.u / compression,
        (1.0 + 2.0 * g / (g + 1.0) * (m2 - 1.0)) * pre.p,
    )


def smoothed_heaviside(x, x_s: float, sp: SmoothingParams):
    """Signed tanh ramp from 0 (upstream) to 1 (downstream)."""
    return 0.5 * (np.tanh((np.asarray(x, dtype=float) - x_s) / sp.width) + 1.0)


def smoothed_conserved(x, U_pre, U_post, x_s: float, sp: SmoothingParams) -> np.ndarray:
    """Blend of two conserved states, shape ``(3,) + x.shape``."""
    H = smoothed_heaviside(x, x_s, sp)
    U_pre = np.asarray(U_pre, dtype=float).reshape((3,) + (1,) * np.ndim(H))
    U_post = np.asarray(U_post, dtype=float).reshape((3,) + (1,) * np.ndim(H))
    return U_pre - H * (U_pre - U_post)


def smoothed_initial_value(
    x: float,
    pre: PrimitiveState,
    post: PrimitiveState,
    x_s: float,
    sp: SmoothingParams,
    gas: GasModel | None = None,
) -> PrimitiveState:
    gas = gas or GasModel()
    U = smoothed_conserved(
        x, to_conserved(pre, gas).as_array(), to_conserved(post, gas).as_array(), x_s, sp
    )
    return to_primitive(ConservedState.from_array(U), gas)
