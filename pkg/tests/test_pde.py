import math

import numpy as np
import pytest
from scipy.integrate import quad

from modricci import pde
from modricci.errors import DimensionTooLow, EquationResidualTooLarge

from conftest import model_of


@pytest.fixture(scope="module")
def flat_grid():
    return pde.heat_kernel_radial(model_of("Euclidean", dimension=3))


@pytest.fixture(scope="module")
def hyp_grid():
    return pde.heat_kernel_radial(model_of("Hyperbolic"))


def _rel_error(grid, exact):
    T, R = np.meshgrid(grid.t_grid, grid.r_grid, indexing="ij")
    mask = (T >= 0.01) & (R <= 2.0)
    return float(np.max(np.abs(grid.G[mask] / exact(R[mask], T[mask]) - 1)))


def test_flat_heat_kernel(flat_grid):
    exact = lambda r, t: (4 * np.pi * t) ** -1.5 * np.exp(-r * r / (4 * t))
    assert _rel_error(flat_grid, exact) < 0.01


def test_flat_mass(flat_grid):
    assert np.all(np.abs(np.asarray(flat_grid.mass) - 1) < 1e-3)


def test_hyperbolic_heat_kernel(hyp_grid):
    def exact(r, t):
        ratio = np.where(r > 0, r / np.sinh(np.where(r > 0, r, 1.0)), 1.0)
        return (4 * np.pi * t) ** -1.5 * ratio * np.exp(-t - r * r / (4 * t))

    assert _rel_error(hyp_grid, exact) < 0.01


def test_flat_constants(flat_grid):
    c = pde.verify_heat_kernel_bounds(flat_grid, model_of("Euclidean", dimension=3))
    assert c.passed
    assert c.extras["C2"] == pytest.approx(0.25, rel=0.05)
    assert c.extras["C4"] == pytest.approx(4.0, rel=0.05)
    assert c.extras["C4"] >= 4.0 * (1 - 1e-9)
    assert c.extras["C1"] == pytest.approx((4 * math.pi) ** -1.5, rel=0.05)


def test_hyperbolic_constants_finite(hyp_grid):
    c = pde.verify_heat_kernel_bounds(hyp_grid, model_of("Hyperbolic"))
    assert c.passed and c.extras["finite_positive"]


def test_row_thinning_keeps_constants(hyp_grid):
    m = model_of("Hyperbolic")
    full = pde.verify_heat_kernel_bounds(hyp_grid, m)
    thin = pde.verify_heat_kernel_bounds(hyp_grid, m, max_rows=200)
    assert thin.lhs.size < full.lhs.size
    assert thin.extras == full.extras
    assert thin.min_margin == pytest.approx(full.min_margin, abs=1e-12)


def test_parabolic_gradient(hyp_grid):
    assert pde.verify_parabolic_gradient_estimate(model_of("Hyperbolic"), hyp_grid, 1.0, 0.5).passed


def test_poisson_flat():
    u = pde.solve_poisson_radial(model_of("Euclidean", dimension=3), 1.0, 1.0, 1 / 6)
    s = np.linspace(0, 1, 11)
    assert np.max(np.abs(u(s) - s * s / 6)) < 1e-12


def test_poisson_hyperbolic_two():
    m = model_of("Hyperbolic", dimension=2, lam=1.0)
    u = pde.solve_poisson_radial(m, 1.0, 1.0, 0.0)
    # u'(r) = (1/sinh r) int_0^r sinh = (cosh r - 1)/sinh r, u(1) = 0
    du = lambda r: (math.cosh(r) - 1) / math.sinh(r) if r > 0 else 0.0
    for r in (0.0, 0.3, 0.7):
        assert u(r) == pytest.approx(-quad(du, r, 1.0, epsabs=1e-14)[0], abs=1e-8)


def test_poisson_constant():
    u = pde.solve_poisson_radial(model_of("Hyperbolic", dimension=2, lam=1.0), 1.0, 0.0, 2.5)
    assert np.max(np.abs(u(np.linspace(0, 1, 11)) - 2.5)) < 1e-12


def test_green_flat():
    E = model_of("Euclidean", dimension=3)
    rho = np.array([0.25, 0.5, 1.0])
    g = pde.green_function_quadrature(E, 1.0, rho)
    assert np.allclose(g, (1 / (4 * np.pi)) * (1 / rho - 1), atol=1e-12)
    assert g[-1] == pytest.approx(0.0, abs=1e-14)
    assert pde.verify_green_bound(E, R=1.0).passed


def test_green_hyperbolic():
    assert pde.verify_green_bound(model_of("Hyperbolic"), R=0.5).passed


def test_green_needs_three():
    with pytest.raises(DimensionTooLow):
        pde.verify_green_bound(model_of("Euclidean", dimension=2))


def test_gradient_estimate_flat():
    E = model_of("Euclidean", dimension=3)
    u = lambda s, nu=0: (s * s / 6, s / 3, 1 / 3 + 0 * s)[nu]
    c = pde.verify_gradient_estimate(E, u, 1.0, 1.0)
    assert c.passed
    # sup over B(1/2) of |grad u|^2 = (1/6)^2
    assert c.lhs[0] == pytest.approx(1 / 36, rel=1e-9)


def test_gradient_estimate_constant():
    c = pde.verify_gradient_estimate(model_of("Euclidean", dimension=3), 2.0, 0.0, 1.0)
    assert c.lhs[0] == 0.0 and c.min_margin == pytest.approx(float(np.min(c.rhs)))


def test_max_principle_equality():
    c = pde.verify_max_principle(model_of("Euclidean", dimension=3), 2.0, 0.0, 1.0)
    assert c.lhs[0] == c.rhs[0] == 2.0


def test_residual_gate():
    E = model_of("Euclidean", dimension=3)
    u = lambda s, nu=0: (s * s / 6, s / 3, 1 / 3 + 0 * s)[nu]
    with pytest.raises(EquationResidualTooLarge):
        pde.verify_gradient_estimate(E, u, 2.0, 1.0)


@pytest.fixture(scope="module")
def cutoff():
    return pde.build_cutoff(model_of("Euclidean", dimension=2), r0=1.0)


def test_cutoff_properties(cutoff):
    c = pde.verify_cutoff(cutoff)
    assert c.passed
    assert cutoff.value_at_distance(0.0) == pytest.approx(1.0, abs=1e-6)
    assert cutoff.value_at_distance(2.0) == pytest.approx(0.0, abs=1e-6)
