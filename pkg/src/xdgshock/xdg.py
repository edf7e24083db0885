"""Broken polynomial space on a cut-cell grid and the DG operator on top of it.

Every non-empty cut-cell carries its own ``P+1`` modal coefficients per
field component.  The modes are Legendre polynomials of the *background*
cell's reference coordinate, restricted to the cut extent; mass matrices
are therefore dense and assembled by Gauss quadrature over the cut-cell.

Coefficient arrays have shape ``(num_elements, num_components, P + 1)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg
from numpy.polynomial import legendre

from .errors import AssemblyError, InvalidStateError, ResidualError, XdgShockError
from .euler import GasModel, flux_from_conserved
from .grid import SPECIES_A, CutCellGrid
from .riemann import godunov_flux_array


def gauss_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    return legendre.leggauss(n)


def legendre_table(xi, degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Values and xi-derivatives of Legendre modes 0..degree, shape ``xi.shape + (P+1,)``."""
    xi = np.asarray(xi, dtype=float)
    vals = np.empty(xi.shape + (degree + 1,))
    ders = np.empty_like(vals)
    eye = np.eye(degree + 1)
    for i in range(degree + 1):
        vals[..., i] = legendre.legval(xi, eye[i])
        ders[..., i] = legendre.legval(xi, legendre.legder(eye[i]))
    return vals, ders


class XdgSpace:
    """Basis, quadrature and mass matrices for every cut-cell of ``grid``."""

    def __init__(self, grid: CutCellGrid, degree: int, quad_points: int | None = None):
        if degree < 0:
            raise AssemblyError(f"polynomial degree must be >= 0, got {degree}")
        self.grid = grid
        self.degree = degree
        self.quad_points = quad_points or 2 * degree + 2
        bg = grid.background
        self._origin = np.array([bg.nodes[c.j] for c in grid.cells])
        self._scale = np.array([bg.nodes[c.j + 1] - bg.nodes[c.j] for c in grid.cells])
        self.lo = np.array([c.a for c in grid.cells])
        self.hi = np.array([c.b for c in grid.cells])
        if np.any(self.hi <= self.lo):
            raise AssemblyError("empty cut-cell in the element list")

        s, w = gauss_rule(self.quad_points)
        half = 0.5 * (self.hi - self.lo)
        self.xq = (0.5 * (self.hi + self.lo))[:, None] + half[:, None] * s[None, :]
        self.wq = half[:, None] * w[None, :]
        self.phi, dphi = self.basis(np.arange(self.num_elements)[:, None], self.xq)
        self.dphi = dphi
        self.phi_lo, _ = self.basis(np.arange(self.num_elements), self.lo)
        self.phi_hi, _ = self.basis(np.arange(self.num_elements), self.hi)

        self.mass = np.einsum("eq,eqi,eqj->eij", self.wq, self.phi, self.phi)
        self._chol = []
        for k, m in enumerate(self.mass):
            try:
                self._chol.append(scipy.linalg.cho_factor(m))
            except np.linalg.LinAlgError as exc:
                raise AssemblyError(f"singular mass matrix on cut-cell {k}") from exc

    @property
    def num_elements(self) -> int:
        return len(self.grid.cells)

    @property
    def num_modes(self) -> int:
        return self.degree + 1

    def basis(self, element, x):
        """Basis values and x-derivatives of ``element`` at physical points ``x``."""
        element = np.asarray(element)
        xi = 2.0 * (np.asarray(x, dtype=float) - self._origin[element]) / self._scale[element] - 1.0
        vals, ders = legendre_table(xi, self.degree)
        return vals, ders * (2.0 / self._scale[element])[..., None]

    def solve_mass(self, rhs: np.ndarray) -> np.ndarray:
        """Apply the inverse block mass matrix to ``rhs`` of shape ``(E, ncomp, P+1)``."""
        out = np.empty_like(rhs)
        for k, cf in enumerate(self._chol):
            out[k] = scipy.linalg.cho_solve(cf, rhs[k].T).T
        return out

    def apply_mass(self, coeffs: np.ndarray) -> np.ndarray:
        return np.einsum("eij,ecj->eci", self.mass, coeffs)

    def condition_numbers(self) -> np.ndarray:
        return np.array([np.linalg.cond(m) for m in self.mass])


@dataclass
class XdgField:
    space: XdgSpace
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.ndim != 3 or self.coeffs.shape[0] != self.space.num_elements \
                or self.coeffs.shape[2] != self.space.num_modes:
            raise XdgShockError(f"coefficient array of shape {self.coeffs.shape} does not fit the space")

    @property
    def num_components(self) -> int:
        return self.coeffs.shape[1]

    def copy(self) -> "XdgField":
        return XdgField(self.space, self.coeffs.copy())

    def element_values(self, k: int, x) -> np.ndarray:
        """Values on element ``k`` at points ``x`` (polynomial extended beyond its extent)."""
        vals, _ = self.space.basis(k, x)
        return np.einsum("...i,ci->c...", vals, self.coeffs[k])

    def quadrature_values(self) -> np.ndarray:
        return np.einsum("eqi,eci->ceq", self.space.phi, self.coeffs)


def l2_project(f, space: XdgSpace, quad_points: int | None = None) -> XdgField:
    """Cut-cell-wise L2 projection of ``f(x) -> (ncomp, *x.shape)`` or ``(*x.shape,)``."""
    if quad_points is None or quad_points == space.quad_points:
        xq, wq, phi = space.xq, space.wq, space.phi
    else:
        s, w = gauss_rule(quad_points)
        half = 0.5 * (space.hi - space.lo)
        xq = (0.5 * (space.hi + space.lo))[:, None] + half[:, None] * s[None, :]
        wq = half[:, None] * w[None, :]
        phi, _ = space.basis(np.arange(space.num_elements)[:, None], xq)
    vals = np.asarray(f(xq), dtype=float)
    if vals.ndim == 2:
        vals = vals[None]
    # weighted least squares on the quadrature points is the same projection, but
    # depends on sqrt(cond(M)) instead of cond(M) on thin cut-cells
    coeffs = np.empty((space.num_elements, vals.shape[0], space.num_modes))
    for k in range(space.num_elements):
        sw = np.sqrt(wq[k])
        coeffs[k] = np.linalg.lstsq(sw[:, None] * phi[k], (sw * vals[:, k]).T, rcond=None)[0].T
    return XdgField(space, coeffs)


def p0_projection(fld: XdgField, element: int) -> np.ndarray:
    """Mean of every component over one cut-cell."""
    sp = fld.space
    if not 0 <= element < sp.num_elements:
        raise XdgShockError(f"no such cut-cell {element}")
    vals = np.einsum("qi,ci->cq", sp.phi[element], fld.coeffs[element])
    return vals @ sp.wq[element] / (sp.hi[element] - sp.lo[element])


def evaluate(fld: XdgField, x: float, side: str = "right") -> np.ndarray:
    """Point value; at edges and the interface ``side`` ('left'/'right' or 'A'/'B') selects the limit."""
    k = fld.space.grid.locate(x, side)
    return fld.element_values(k, np.float64(x))


def jump(fld: XdgField, x: float) -> np.ndarray:
    """``psi^- - psi^+`` on inner edges and the interface, ``psi^-`` on the domain boundary."""
    grid = fld.space.grid
    left, right = grid.background.x_left, grid.background.x_right
    if x == left:
        return evaluate(fld, x, "right")
    if x == right:
        return evaluate(fld, x, "left")
    return evaluate(fld, x, "left") - evaluate(fld, x, "right")


def sample(fld: XdgField, points_per_element: int):
    """Equispaced samples on each cut-cell including both one-sided endpoints.

    Returns ``(x, element_index, values)`` with values of shape ``(ncomp, n)``.
    """
    sp = fld.space
    xs, ks, vs = [], [], []
    t = np.linspace(0.0, 1.0, max(points_per_element, 2))
    for k in range(sp.num_elements):
        x = sp.lo[k] + t * (sp.hi[k] - sp.lo[k])
        x[-1] = sp.hi[k]
        xs.append(x)
        ks.append(np.full(x.shape, k))
        vs.append(fld.element_values(k, x))
    return np.concatenate(xs), np.concatenate(ks), np.concatenate(vs, axis=1)


class DgOperator:
    """Semi-discrete residual ``R(U)`` with Godunov fluxes on every edge.

    ``R`` is such that ``M dU/dt + R(U) = 0``; per cut-cell and mode ``i``

        R_i = -int F(U_h) dphi_i/dx dx + Fhat(b) phi_i(b) - Fhat(a) phi_i(a).
    """

    def __init__(self, space: XdgSpace, bc_left, bc_right, gas: GasModel):
        self.space = space
        self.gas = gas
        self.bc_left = np.asarray(bc_left, dtype=float).reshape(3, 1)
        self.bc_right = np.asarray(bc_right, dtype=float).reshape(3, 1)
        self.shape = (space.num_elements, 3, space.num_modes)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @cached_property
    def dof_element(self) -> np.ndarray:
        """Element index of every flattened DOF."""
        return np.repeat(np.arange(self.shape[0]), self.shape[1] * self.shape[2])

    def _locate_invalid(self, Uq, U_lo, U_hi):
        for k in range(self.shape[0]):
            for arr in (Uq[:, k], U_lo[:, k:k + 1], U_hi[:, k:k + 1]):
                rho = arr[0]
                p = (self.gas.gamma - 1.0) * (arr[2] - 0.5 * arr[1] ** 2 / rho)
                if np.any(~(rho > 0)) or np.any(~(p > 0)):
                    return k
        return None

    def residual_coeffs(self, coeffs: np.ndarray) -> np.ndarray:
        sp = self.space
        Uq = np.einsum("eqi,eci->ceq", sp.phi, coeffs)
        U_lo = np.einsum("ei,eci->ce", sp.phi_lo, coeffs)
        U_hi = np.einsum("ei,eci->ce", sp.phi_hi, coeffs)
        try:
            Fq = flux_from_conserved(Uq, self.gas)
            left = np.concatenate([self.bc_left, U_hi], axis=1)
            right = np.concatenate([U_lo, self.bc_right], axis=1)
            Fhat = godunov_flux_array(left, right, self.gas)
        except InvalidStateError as exc:
            k = self._locate_invalid(Uq, U_lo, U_hi)
            raise ResidualError(f"invalid state in cut-cell {k}: {exc}", cell=k) from exc
        R = -np.einsum("eq,ceq,eqi->eci", sp.wq, Fq, sp.dphi)
        R += Fhat[:, 1:].T[:, :, None] * sp.phi_hi[:, None, :]
        R -= Fhat[:, :-1].T[:, :, None] * sp.phi_lo[:, None, :]
        return R

    def __call__(self, U: np.ndarray) -> np.ndarray:
        """Flat-vector interface used by the time stepper."""
        return self.residual_coeffs(U.reshape(self.shape)).ravel()

    def mass_apply(self, U: np.ndarray) -> np.ndarray:
        return self.space.apply_mass(U.reshape(self.shape)).ravel()

    def edge_fluxes(self, coeffs: np.ndarray) -> np.ndarray:
        sp = self.space
        U_lo = np.einsum("ei,eci->ce", sp.phi_lo, coeffs)
        U_hi = np.einsum("ei,eci->ce", sp.phi_hi, coeffs)
        left = np.concatenate([self.bc_left, U_hi], axis=1)
        right = np.concatenate([U_lo, self.bc_right], axis=1)
        return godunov_flux_array(left, right, self.gas)


def spatial_residual(fld: XdgField, bc_left, bc_right, gas: GasModel) -> XdgField:
    op = DgOperator(fld.space, bc_left, bc_right, gas)
    return XdgField(fld.space, op.residual_coeffs(fld.coeffs))


def transfer(old: XdgField, new_space: XdgSpace) -> XdgField:
    """L2 transfer onto a new cut-cell grid.

    Each new cut-cell is split at the old element boundaries; on every piece
    the donor is the old element holding the piece, so the old interface
    decides the donor species.
    """
    old_sp = old.space
    n = old_sp.degree + new_space.degree + 1
    s, w = gauss_rule(max(n, new_space.quad_points))
    old_bounds = np.asarray(old_sp.grid.bounds)
    ncomp = old.num_components
    coeffs = np.empty((new_space.num_elements, ncomp, new_space.num_modes))
    for k in range(new_space.num_elements):
        a, b = new_space.lo[k], new_space.hi[k]
        breaks = np.concatenate([[a], old_bounds[(old_bounds > a) & (old_bounds < b)], [b]])
        rows, rhs = [], []
        for lo, hi in zip(breaks[:-1], breaks[1:]):
            mid = 0.5 * (lo + hi)
            donor = old_sp.grid.locate(mid)
            x = mid + 0.5 * (hi - lo) * s
            sw = np.sqrt(0.5 * (hi - lo) * w)
            phi, _ = new_space.basis(k, x)
            rows.append(sw[:, None] * phi)
            rhs.append((sw * old.element_values(donor, x)).T)
        # weighted least squares over all pieces, as in l2_project
        coeffs[k] = np.linalg.lstsq(np.vstack(rows), np.vstack(rhs), rcond=None)[0].T
    return XdgField(new_space, coeffs)


def species_of(space: XdgSpace, element: int) -> str:
    return space.grid.cells[element].species


__all__ = [
    "DgOperator",
    "SPECIES_A",
    "XdgField",
    "XdgSpace",
    "evaluate",
    "jump",
    "l2_project",
    "p0_projection",
    "sample",
    "spatial_residual",
    "transfer",
]
