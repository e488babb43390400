import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from modricci import curvature as cu
from modricci.errors import SingularEvaluation, StepTooSmall
from modricci.models import KINDS, ModelSpec, build_model, catalog_spec

from conftest import model_of


def test_flat_tensor_vanishes():
    m = model_of("Euclidean", dimension=3)
    T = cu.modified_ricci(m, np.array([0.3, -0.2, 0.5]))
    assert np.max(np.abs(T.components)) == 0.0


def test_gaussian_soliton_is_lambda_g():
    m = model_of("GaussianSoliton")
    for x in ([0.3, 0.1], [2.0, -1.0], [0.0, 3.0]):
        T = cu.modified_ricci(m, np.array(x))
        assert np.max(np.abs(T.components - np.eye(2))) <= 1e-10


@pytest.mark.parametrize("kind", ["Hyperbolic", "WarpedCustom"])
def test_hyperbolic_ricci(kind):
    m = model_of(kind)
    x = m.point_at(0.7, np.array([0.0, 1.0, 0.0]))
    assert np.allclose(cu.ricci(m, x).eigenvalues(), -2.0, atol=1e-12)


def test_sphere_ricci():
    m = model_of("Sphere", dimension=3, curvature=1.0)
    x = m.point_at(1.1, np.array([0.0, 0.6, 0.8]))
    assert np.allclose(cu.ricci(m, x).eigenvalues(), 2.0, atol=1e-12)


@pytest.mark.parametrize("kind", KINDS)
def test_finite_difference_oracle(kind):
    m = build_model(catalog_spec(kind))
    x = cu.default_sample_point(m)
    res = cu.fd_convergence(m, x)
    assert res.error_h <= 1e-6
    if not res.exact:
        assert res.order >= 1.8


def test_flat_fd_exact():
    m = model_of("Euclidean", dimension=3)
    assert cu.finite_difference_check(m, np.array([0.3, 0.2, 0.1])) < 1e-9


def test_hyperbolic_two_order():
    m = build_model(ModelSpec("Hyperbolic", 2, lam=1.0, curvature=-1.0))
    res = cu.fd_convergence(m, np.array([0.3, 0.2]))
    assert 1.7 <= res.order <= 2.3
    assert res.constant > 0


def test_step_too_small():
    m = model_of("Hyperbolic")
    with pytest.raises(StepTooSmall):
        cu.finite_difference_check(m, np.array([0.3, 0.2, 0.1]), h=1e-8)


def test_singular_point_rejected():
    m = model_of("SingularFieldModel")
    with pytest.raises(SingularEvaluation):
        cu.modified_ricci(m, np.zeros(3))


def test_lower_bound_examples():
    S = model_of("Sphere", dimension=3, curvature=1.0)
    c = cu.verify_lower_bound(S, cu.sample_ball(S, 10))
    assert c.passed and c.min_margin == pytest.approx(2.0)
    H = model_of("Hyperbolic")
    c = cu.verify_lower_bound(H, cu.sample_ball(H, 10))
    assert c.passed and abs(c.min_margin) < 1e-12
    c = cu.verify_lower_bound(H, cu.sample_ball(H, 10), lam=1.0)
    assert not c.passed and c.min_margin == pytest.approx(-1.0)


def test_cigar_identity():
    m = model_of("CigarSoliton")
    s = np.linspace(0.0, 5.0, 1000)
    assert np.max(np.abs(cu.soliton_identity(m, s) - 1.0)) < 1e-10


@given(st.floats(0.05, 2.0), st.floats(0.0, 2 * math.pi))
def test_coordinate_tensor_matches_frame(s, th):
    m = model_of("Hyperbolic", dimension=2, lam=1.0)
    x = m.point_at(s, np.array([math.cos(th), math.sin(th)]))
    Tc = cu.coordinate_modified_ricci(m, x)
    g = m.metric(x)
    # for Ric = -g in two dimensions the coordinate tensor is -g
    assert np.allclose(Tc, -g, atol=1e-10)


@given(st.sampled_from(KINDS), st.floats(0.05, 0.9))
def test_eigenvalues_rotation_invariant(kind, s):
    m = build_model(catalog_spec(kind))
    e1 = np.zeros(m.n)
    e1[0] = 1.0
    e2 = np.ones(m.n) / math.sqrt(m.n)
    a = cu.modified_ricci(m, m.point_at(s, e1)).eigenvalues()
    b = cu.modified_ricci(m, m.point_at(s, e2)).eigenvalues()
    assert np.allclose(a, b, atol=1e-9)
