import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad, solve_ivp

from modricci import radial as ra
from modricci.errors import UnsupportedKind
from modricci.models import KINDS, ModelSpec, build_model, catalog_spec

from conftest import model_of


def test_flat_profile():
    m = model_of("Euclidean", dimension=3)
    p = ra.radial_profile(m, s_max=1.0)
    s = p.s_grid[p.s_grid > 0]
    assert np.allclose(p.w[p.s_grid > 0], s**2)
    assert np.allclose(p.delta_s[p.s_grid > 0], 2.0 / s)
    assert p.cut_radius == math.inf


def test_hyperbolic_profile_against_jacobi_ode():
    m = model_of("Hyperbolic")
    s = np.linspace(0.05, 1.0, 12)
    sol = solve_ivp(lambda t, y: [y[1], y[0]], (0, 1.0), [0.0, 1.0], t_eval=s, rtol=1e-12, atol=1e-14)
    J = sol.y[0]
    p = ra.radial_profile(m, s_grid=s)
    assert np.allclose(p.w, J**2, rtol=1e-8)
    assert np.allclose(p.w, np.sinh(s) ** 2, rtol=1e-12)
    assert np.allclose(p.delta_s, 2.0 / np.tanh(s), rtol=1e-10)


def test_sphere_two_profile():
    m = model_of("Sphere", dimension=2, curvature=1.0)
    assert m.cut_radius == pytest.approx(math.pi)
    p = ra.radial_profile(m, s_grid=np.linspace(0.1, 3.0, 10))
    assert np.allclose(p.w, np.sin(p.s_grid))


def test_ball_volumes():
    assert ra.ball_volume(model_of("Euclidean", dimension=3), None, 1.0) == pytest.approx(4 * math.pi / 3, abs=1e-9)
    S2 = model_of("Sphere", dimension=2, curvature=1.0)
    assert ra.ball_volume(S2, None, math.pi) == pytest.approx(4 * math.pi, rel=1e-12)
    H2 = model_of("Hyperbolic", dimension=2, lam=1.0)
    oracle = 2 * math.pi * quad(math.sinh, 0, 1)[0]
    assert ra.ball_volume(H2, None, 1.0) == pytest.approx(oracle, rel=1e-12)
    assert oracle == pytest.approx(2 * math.pi * (math.cosh(1) - 1), rel=1e-14)


def test_hyperbolic_laplacian_margin():
    m = model_of("Hyperbolic")
    c = ra.verify_comparison(m, "LaplacianComparison", radii=[1.0])
    i = [k for k, s in enumerate(c.samples) if s == {"s": 1.0}][0]
    coth1 = (math.e**2 + 1) / (math.e**2 - 1)
    assert c.lhs[i] == pytest.approx(2 * coth1 - 2, abs=1e-9)
    assert c.rhs[i] == pytest.approx(2.0 / 3.0, abs=1e-12)
    assert c.margins[i] == pytest.approx(2.0 / 3.0 - 2 * coth1 + 2, abs=1e-9)


def test_hyperbolic_volume_element_abs():
    c = ra.verify_comparison(model_of("Hyperbolic"), "VolumeElementAbs", radii=[1.0])
    i = c.samples.index({"s": 1.0})
    assert c.lhs[i] == pytest.approx(math.sinh(1) ** 2, rel=1e-10)
    assert c.rhs[i] == pytest.approx(math.exp(2.0), rel=1e-12)


def test_flat_laplacian_equality():
    c = ra.verify_comparison(model_of("Euclidean", dimension=3), "LaplacianComparison")
    assert c.passed and np.max(np.abs(c.margins)) <= 1e-10


def test_singular_laplacian_against_quadrature():
    m = model_of("SingularFieldModel", K=0.1, alpha=0.5)
    c = ra.verify_comparison(m, "LaplacianComparison")
    assert c.passed
    # the field term integrates K s^-1/2 along the ray; the bound uses 4/(1-alpha) K s^-alpha
    s = 0.5
    mid = quad(lambda t: 0.1 * t**-0.5 * t**2, 0, s)[0] / s**2
    assert mid <= 4 / 0.5 * 0.1 * s**-0.5


def test_negative_control_fails():
    m = model_of("Hyperbolic")
    c = ra.verify_comparison(m, "LaplacianComparison", lam=1.0)
    assert not c.passed


@pytest.mark.parametrize("kind", KINDS)
def test_all_comparisons_pass(kind):
    m = build_model(catalog_spec(kind))
    for k in ra.COMPARISON_KINDS:
        if k == "Jensen":
            continue
        try:
            c = ra.verify_comparison(m, k)
        except UnsupportedKind:
            continue
        assert c.passed, (k, c.min_margin)


def test_flat_ratio_constant():
    c = ra.verify_volume_ratio_monotone(model_of("Euclidean", dimension=3))
    assert np.max(np.abs(c.margins)) <= 1e-10


def test_bishop_sphere():
    m = model_of("Sphere", dimension=2, curvature=1.0)
    c = ra.verify_volume_ratio_monotone(m)
    assert c.passed and c.min_margin > 0
    r = np.linspace(0.1, 1.0, 10)
    Q = 2 * math.pi * (1 - np.cos(r)) / r**2
    assert np.all(np.diff(Q) < 0)


def test_hyperbolic_ratio_constant_reported():
    c = ra.verify_volume_ratio_monotone(model_of("Hyperbolic", dimension=2, lam=1.0))
    assert c.passed
    assert 0 < c.extras["measured_C"] <= c.extras["C_volume_ratio"]


def test_soliton_kinds_need_soliton():
    with pytest.raises(UnsupportedKind):
        ra.verify_comparison(model_of("Euclidean"), "SolitonLaplacian")


def test_jensen():
    assert ra.verify_jensen(2000, seed=3).passed


@given(st.floats(0.05, 1.0), st.floats(0.05, 1.0))
def test_volume_monotone_in_radius(a, b):
    m = model_of("Hyperbolic")
    lo, hi = sorted((a, b))
    assert ra.ball_volume(m, None, lo) <= ra.ball_volume(m, None, hi) + 1e-14
