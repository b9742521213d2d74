"""Operator-lab tests: radial momentum, Hermiticity, kinetic identity, hydrogen."""

import math

import numpy as np
import pytest

from semiclab.errors import DivisionNearZero, GridTooCoarse
from semiclab.operators import (
    GridFunction,
    RadialGrid,
    SphericalGrid,
    apply_radial_momentum,
    hermiticity_residual,
    hydrogen_radial_levels,
    kinetic_discrepancy,
    kinetic_multiplier,
)


def radial_gaussians(n=400, r_max=12.0):
    grid = RadialGrid.offset(n, r_max)
    f = GridFunction.sample(lambda r: (1.0 + 0.2j) * math.exp(-((r - 5.0) ** 2)), grid)
    g = GridFunction.sample(lambda r: math.exp(-0.8 * (r - 6.0) ** 2), grid)
    return grid, f, g


# --- grids ------------------------------------------------------------------------

def test_offset_grids_exclude_origin_and_axis():
    rg = RadialGrid.offset(100, 10.0)
    assert rg.r[0] == pytest.approx(0.05)
    assert np.all(rg.r > 0)
    sg = SphericalGrid.offset(50, 60, 8.0)
    assert np.all(sg.r > 0)
    assert np.all((sg.theta > 0) & (sg.theta < np.pi))
    with pytest.raises(ValueError):
        RadialGrid(r=np.array([0.0, 1.0]), h=1.0)
    with pytest.raises(ValueError):
        SphericalGrid(r=np.array([1.0]), theta=np.array([0.0]), h_r=1.0, h_theta=0.1)


def test_grid_function_validation():
    rg = RadialGrid.offset(10, 1.0)
    with pytest.raises(ValueError):
        GridFunction(np.ones(9), rg)
    with pytest.raises(ValueError):
        GridFunction(np.full(10, np.nan), rg)
    gf = GridFunction(np.ones(10), rg)
    assert gf.norm() > 0


# --- radial momentum ------------------------------------------------------------------

def _interior(grid, lo=1.0, hi=11.0):
    return (grid.r > lo) & (grid.r < hi)


def test_radial_momentum_on_exponential_over_r():
    # f = exp(-r)/r is an eigenfunction: p_r f = i hbar f
    grid = RadialGrid.offset(1200, 12.0)
    f = GridFunction.sample(lambda r: math.exp(-r) / r, grid)
    out = apply_radial_momentum(f)
    mask = _interior(grid, 1.0, 10.0)
    err = np.abs(out.values - 1j * f.values)[mask]
    assert err.max() < 1e-8


def test_radial_momentum_on_constant():
    grid = RadialGrid.offset(1200, 12.0)
    c = 0.7 - 0.2j
    f = GridFunction(np.full(grid.r.size, c), grid)
    out = apply_radial_momentum(f)
    mask = _interior(grid, 1.0, 10.0)
    expected = -1j * c / grid.r
    err = np.abs(out.values - expected)[mask]
    assert err.max() < 1e-9


def test_radial_momentum_gaussian_matches_symbolic():
    # p_r f = -i (f' + f/r) with f' = -2 (r - 5) f for the Gaussian
    grid, f, _ = radial_gaussians(n=800)
    out = apply_radial_momentum(f)
    sym = -1j * (-2.0 * (grid.r - 5.0) * f.values + f.values / grid.r)
    mask = _interior(grid)
    assert np.abs(out.values - sym)[mask].max() < 2e-7  # h^4 scale at n=800


def test_radial_momentum_refinement_order():
    errs = []
    for n in (200, 400):
        grid = RadialGrid.offset(n, 12.0)
        f = GridFunction.sample(lambda r: math.exp(-((r - 5.0) ** 2)), grid)
        out = apply_radial_momentum(f)
        sym = -1j * (-2.0 * (grid.r - 5.0) * f.values + f.values / grid.r)
        errs.append(np.abs(out.values - sym).max())
    assert errs[0] / errs[1] == pytest.approx(16.0, rel=0.35)  # 4th order


def test_grid_too_coarse():
    grid = RadialGrid.offset(4, 1.0)
    f = GridFunction(np.ones(4), grid)
    with pytest.raises(GridTooCoarse):
        apply_radial_momentum(f, order=6)


# --- Hermiticity ------------------------------------------------------------------------

def test_dressed_form_residual_at_rounding_level():
    _, f, g = radial_gaussians()
    res = hermiticity_residual(lambda u: apply_radial_momentum(u), f, g)
    assert res < 1e-12


def test_real_multiplicative_operator_is_symmetric():
    grid, f, g = radial_gaussians()

    def vop(u):
        return GridFunction((1.0 / grid.r) * u.values, grid)

    assert hermiticity_residual(vop, f, g) < 1e-13


def test_expanded_form_fourth_order_decay():
    residuals = []
    ns = (100, 200, 400, 800)
    for n in ns:
        _, f, g = radial_gaussians(n=n)
        res = hermiticity_residual(
            lambda u: apply_radial_momentum(u, form="expanded"), f, g)
        residuals.append(res)
    slope = -np.polyfit(np.log(ns), np.log(residuals), 1)[0]
    assert slope == pytest.approx(4.0, abs=0.5)
    assert residuals[-1] < 5e-7  # fine-grid residual level (measured ~1e-7)


def test_naive_form_residual_does_not_vanish():
    plateau = []
    for n in (200, 400, 800):
        grid, f, g = radial_gaussians(n=n)
        res = hermiticity_residual(
            lambda u: apply_radial_momentum(u, form="naive"), f, g)
        # the defect converges to 2 |int f* g r dr|, not to zero
        target = 2.0 * abs(np.sum(grid.r * np.conj(f.values) * g.values) * grid.h)
        plateau.append((res, target))
    for res, target in plateau:
        assert res == pytest.approx(target, rel=1e-5)
        assert res > 1.0


# --- kinetic identity --------------------------------------------------------------------

def test_multiplier_reference_points():
    # exact values at theta = pi/2: +1/4 at r=1, +1/16 at r=2 (hbar = m = 1)
    grid = SphericalGrid(r=np.array([1.0, 2.0]), theta=np.array([np.pi / 2]),
                         h_r=1.0, h_theta=0.1)
    mult = kinetic_multiplier(grid)
    assert mult[0, 0] == pytest.approx(0.25, rel=1e-14)
    assert mult[1, 0] == pytest.approx(0.0625, rel=1e-14)


def _bump(R, TH):
    return np.exp(-(((R - 4.0) / 1.2) ** 2) - ((TH - np.pi / 2) / 0.28) ** 2)


def _decaying(R, TH):
    return (R**2 * np.exp(-R) * np.exp(-(((TH - np.pi / 2) / 0.33) ** 2))
            * (1.0 + 0.3 * np.cos(TH)))


def test_discrepancy_matches_multiplier_for_two_functions():
    grid = SphericalGrid.offset(200, 200, 10.0)
    for fn in (_bump, _decaying):
        f = GridFunction.sample(fn, grid)
        d = kinetic_discrepancy(f)
        assert d.max_rel_error < 1e-3


def test_discrepancy_ratio_is_function_independent():
    # the mismatch is a multiplicative operator: two unrelated test
    # functions must produce the same ratio field
    grid = SphericalGrid.offset(160, 160, 10.0)
    r1 = kinetic_discrepancy(GridFunction.sample(_bump, grid))
    r2 = kinetic_discrepancy(GridFunction.sample(_decaying, grid))
    both = r1.mask & r2.mask
    assert both.sum() > 1000
    diff = np.abs(r1.ratio[both] - r2.ratio[both]) / np.abs(r1.multiplier[both])
    assert diff.max() < 2e-3


def test_discrepancy_refinement_improves():
    errs = []
    for n in (100, 200):
        grid = SphericalGrid.offset(n, n, 10.0)
        errs.append(kinetic_discrepancy(GridFunction.sample(_bump, grid)).max_rel_error)
    assert errs[1] < errs[0] / 4.0


def test_discrepancy_masks_small_values():
    grid = SphericalGrid.offset(64, 64, 10.0)
    d = kinetic_discrepancy(GridFunction.sample(_bump, grid))
    assert 0.0 < d.masked_fraction < 1.0
    assert np.isnan(d.ratio[~d.mask]).all()
    with pytest.raises(DivisionNearZero):
        kinetic_discrepancy(GridFunction(np.zeros((64, 64)), grid))


# --- hydrogen ---------------------------------------------------------------------------

def test_hydrogen_levels_default_grid():
    levels = hydrogen_radial_levels(3)
    for n, tol in zip(range(1, 4), (1e-4, 1e-4, 5e-4)):
        assert levels[n - 1] == pytest.approx(-0.5 / n**2, abs=tol)


def test_hydrogen_refinement_and_rydberg_ratio():
    coarse = hydrogen_radial_levels(2, n_points=3000)
    fine = hydrogen_radial_levels(2, n_points=6000)
    assert abs(fine[0] + 0.5) < abs(coarse[0] + 0.5)
    assert fine[0] / fine[1] == pytest.approx(4.0, abs=1e-3)


def test_hydrogen_argument_validation():
    with pytest.raises(ValueError):
        hydrogen_radial_levels(0)
    with pytest.raises(GridTooCoarse):
        hydrogen_radial_levels(5, n_points=4)
