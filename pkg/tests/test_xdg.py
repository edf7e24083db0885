import numpy as np
import pytest
from scipy.integrate import quad

from xdgshock.euler import GasModel, SmoothingParams, smoothed_conserved
from xdgshock.grid import LevelSet, build_grid, cut
from xdgshock.xdg import (
    DgOperator,
    XdgField,
    XdgSpace,
    evaluate,
    jump,
    l2_project,
    p0_projection,
    sample,
    spatial_residual,
    transfer,
)

GAS = GasModel()
GRID = build_grid(0.0, 1.0, 10)


def space_at(x, degree=2):
    return XdgSpace(cut(GRID, LevelSet(x)), degree)


def step_field(space, U_pre, U_post, x_s):
    return l2_project(lambda x: np.where(x < x_s, U_pre[:, None, None], U_post[:, None, None]), space)


@pytest.mark.parametrize("degree", [0, 1, 2, 3])
def test_polynomial_reproduction(degree):
    sp = space_at(0.57, degree)
    coeffs = np.random.default_rng(degree).normal(size=degree + 1)

    def f(x):
        return np.polynomial.polynomial.polyval(x, coeffs)

    fld = l2_project(f, sp)
    x, k, vals = sample(fld, 7)
    assert np.max(np.abs(vals[0] - f(x))) <= 1e-12


def test_constant_reproduction_on_either_side_of_interface():
    fld = l2_project(lambda x: np.full_like(x, 3.25), space_at(0.57))
    for side in ("A", "B"):
        assert evaluate(fld, 0.57, side)[0] == pytest.approx(3.25, abs=1e-13)
    assert np.all(np.abs(jump(fld, 0.57)) <= 1e-13)


def test_p0_projection_against_quadrature_oracle():
    rng = np.random.default_rng(1)
    sp = space_at(0.57)
    fld = XdgField(sp, rng.normal(size=(sp.num_elements, 3, sp.num_modes)))
    for k in range(sp.num_elements):
        a, b = sp.lo[k], sp.hi[k]
        for c in range(3):
            ref = quad(lambda x: fld.element_values(k, np.array([x]))[c, 0], a, b, epsabs=1e-15)[0] / (b - a)
            assert abs(p0_projection(fld, k)[c] - ref) <= 1e-12


def test_p0_projection_linear_is_midpoint_value():
    sp = space_at(0.57)
    fld = l2_project(lambda x: 2.0 * x - 1.0, sp)
    kA, kB = sp.grid.cut_elements
    assert p0_projection(fld, kA)[0] == pytest.approx(2 * 0.535 - 1, abs=1e-13)
    assert p0_projection(fld, kB)[0] == pytest.approx(2 * 0.585 - 1, abs=1e-13)


def test_smoothed_density_mean(shock_states):
    U_pre, U_post = shock_states
    spar = SmoothingParams(h=0.1, degree=2)
    fld = l2_project(lambda x: smoothed_conserved(x, U_pre, U_post, 0.55, spar), space_at(0.57))
    k = fld.space.grid.element_index(4, "A")
    ref = quad(lambda x: smoothed_conserved(np.array(x), U_pre, U_post, 0.55, spar)[0], 0.4, 0.5,
               epsabs=1e-13, epsrel=1e-13)[0] / 0.1
    assert abs(p0_projection(fld, k)[0] - ref) <= 1e-3


def test_mass_matrices_spd_and_conditioning():
    conds = []
    for x in (0.55, 0.57, 0.59, 0.599):
        sp = space_at(x)
        for M in sp.mass:
            assert np.allclose(M, M.T, atol=1e-15)
            assert np.all(np.linalg.eigvalsh(M) > 0)
        kB = sp.grid.cut_elements[1]
        conds.append(sp.condition_numbers()[kB])
    assert conds == sorted(conds)


def test_free_stream_preservation(shock_states):
    U_pre, _ = shock_states
    sp = XdgSpace(cut(build_grid(0.0, 1.0, 10), LevelSet(0.5)), 2)
    fld = l2_project(lambda x: np.broadcast_to(U_pre[:, None, None], (3,) + x.shape), sp)
    R = spatial_residual(fld, U_pre, U_pre, GAS)
    assert np.max(np.abs(R.coeffs)) <= 1e-13


def test_exact_shock_is_fixed_point(shock_states):
    U_pre, U_post = shock_states
    fld = step_field(space_at(0.55), U_pre, U_post, 0.55)
    R = spatial_residual(fld, U_pre, U_post, GAS)
    assert np.max(np.abs(R.coeffs)) <= 1e-10


def test_misplaced_shock_excites_cut_cells(shock_states):
    U_pre, U_post = shock_states
    sp = space_at(0.57)
    fld = step_field(sp, U_pre, U_post, 0.57)
    # same piecewise-constant field with the wrong boundary data on the right
    fld_off = l2_project(lambda x: np.where(x < 0.55, U_pre[:, None, None], U_post[:, None, None]), sp)
    R = np.max(np.abs(spatial_residual(fld_off, U_pre, U_post, GAS).coeffs), axis=(1, 2))
    kA, kB = sp.grid.cut_elements
    assert R[kA] > 1e-3
    far = [k for k in range(sp.num_elements) if abs(k - kA) > 1 and abs(k - kB) > 1]
    assert np.max(R[far]) <= 1e-10
    assert np.max(np.abs(spatial_residual(fld, U_pre, U_post, GAS).coeffs)) <= 1e-10


def test_conservation_telescopes():
    rng = np.random.default_rng(5)
    sp = space_at(0.57)
    coeffs = np.zeros((sp.num_elements, 3, 3))
    coeffs[:, :, 0] = [1.0, 0.3, 2.5]
    coeffs[:, :, 1:] = 0.05 * rng.normal(size=(sp.num_elements, 3, 2))
    op = DgOperator(sp, [1.0, 0.2, 2.4], [1.1, 0.25, 2.6], GAS)
    R = op.residual_coeffs(coeffs)
    Fhat = op.edge_fluxes(coeffs)
    assert np.max(np.abs(R[:, :, 0].sum(axis=0) - (Fhat[:, -1] - Fhat[:, 0]))) <= 1e-12


def test_jump_values(shock_states):
    U_pre, U_post = shock_states
    fld = step_field(space_at(0.55), U_pre, U_post, 0.55)
    jmp = jump(fld, 0.55)
    assert abs(jmp[1]) <= 1e-12
    assert jmp[0] == pytest.approx(1 - 5.4 / 2.9, abs=1e-12)
    assert np.allclose(jump(fld, 0.0), U_pre, atol=1e-12)
    assert np.allclose(jump(fld, 1.0), U_post, atol=1e-12)
    smooth = l2_project(lambda x: 1.0 + 0.1 * x, space_at(0.55))
    assert np.all(np.abs(jump(smooth, 0.3)) <= 1e-13)


def test_transfer_conserves_integrals():
    rng = np.random.default_rng(9)
    old_sp = space_at(0.57)
    old = XdgField(old_sp, rng.normal(size=(old_sp.num_elements, 3, 3)))
    new = transfer(old, space_at(0.535))

    def total(fld):
        return sum(p0_projection(fld, k) * (fld.space.hi[k] - fld.space.lo[k])
                   for k in range(fld.space.num_elements))

    assert np.allclose(total(old), total(new), atol=1e-12)


def test_transfer_same_grid_is_identity():
    rng = np.random.default_rng(2)
    sp = space_at(0.57)
    old = XdgField(sp, rng.normal(size=(sp.num_elements, 3, 3)))
    assert np.allclose(transfer(old, space_at(0.57)).coeffs, old.coeffs, atol=1e-12)

