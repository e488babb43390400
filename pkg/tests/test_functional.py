import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.special import beta

from modricci import functional as fu
from modricci.errors import ExponentOutOfRange, RadiusAboveThreshold, UnsupportedDimension
from modricci.models import KINDS, build_model, catalog_spec

from conftest import model_of


def singular():
    return model_of("SingularFieldModel", K=1.0, alpha=0.5)


def test_lq_constant_in_r():
    c = fu.verify_lq_vector_bound(singular(), [None], [0.1, 0.5, 1.0], 2.0)
    assert c.passed
    assert np.allclose(c.lhs, math.sqrt(1.5), atol=1e-6)


def test_lq_closed_form():
    r = 0.5
    # (3/r^3) int_0^r s^-1 s^2 ds = 3/(2r)
    oracle = math.sqrt(3 / r**3 * quad(lambda s: s, 0, r)[0])
    assert fu.averaged_norm(singular(), lambda s: s**-0.5, None, r, 2.0).value == pytest.approx(oracle, rel=1e-10)


def test_lq_exponent_gate():
    with pytest.raises(ExponentOutOfRange):
        fu.verify_lq_vector_bound(singular(), [None], [0.5], 7.0)


def test_zero_field_norm():
    assert fu.averaged_norm(model_of("Euclidean"), lambda s: 0.0 * s, None, 0.5, 2.0).value == 0.0


def test_distance_power():
    E = model_of("Euclidean", dimension=3)
    assert fu.distance_power_integral(E, 1.0, 1.0) == pytest.approx(2 * math.pi, rel=1e-12)
    assert fu.distance_power_integral(E, 1.0, 0.0) == pytest.approx(4 * math.pi / 3, rel=1e-12)
    H2 = model_of("Hyperbolic", dimension=2, lam=1.0)
    oracle = 2 * math.pi * quad(lambda s: math.sinh(s) / s, 0, 1)[0]
    assert fu.distance_power_integral(H2, 1.0, 1.0) == pytest.approx(oracle, rel=1e-10)
    assert fu.verify_distance_power(H2, [0.5, 1.0], 1.0).passed


def test_half_volume_flat_three():
    E = model_of("Euclidean", dimension=3)
    d = brentq(lambda x: ((1 - 3 * x) / (1 + x)) ** 3 - 0.75, 1e-9, 1 / 3 - 1e-12)
    c = fu.verify_half_volume(E, [None], [0.5])
    assert c.passed
    assert c.lhs[0] == pytest.approx(d**3, rel=1e-8)


def test_half_volume_sphere():
    assert fu.verify_half_volume(model_of("Sphere", dimension=2, curvature=1.0), [None], [0.1]).passed


def test_half_volume_forced_delta_fails():
    c = fu.verify_half_volume(model_of("Euclidean", dimension=2), [None], [0.5], delta=0.8)
    assert not c.passed
    assert c.lhs[0] == pytest.approx(0.64)


def test_half_volume_above_threshold():
    E = model_of("Euclidean", dimension=3)
    with pytest.raises(RadiusAboveThreshold):
        fu.verify_half_volume(E, [None], [2.0 * fu.half_volume_radius(E)])


def test_sobolev_beta_oracle():
    E = model_of("Euclidean", dimension=3)
    _, _, l2_lhs, l2_grad = fu.sobolev_sides(E, None, 1.0, fu.bump(1))
    assert l2_lhs == pytest.approx((3 * beta(3, 7)) ** (1 / 3), abs=1e-8)
    assert l2_grad == pytest.approx(1.0, abs=1e-12)


def test_sobolev_zero():
    E = model_of("Euclidean", dimension=3)
    assert fu.sobolev_sides(E, None, 1.0, fu.zero_function()) == (0.0, 0.0, 0.0, 0.0)


def test_sobolev_l2_needs_three():
    with pytest.raises(UnsupportedDimension):
        fu.verify_sobolev(model_of("Euclidean", dimension=2), form="L2")


@pytest.mark.parametrize("kind", KINDS)
def test_sobolev_family(kind):
    m = build_model(catalog_spec(kind))
    c = fu.verify_sobolev(m, form="L1" if m.n == 2 else "both")
    assert c.passed


def test_hypersurface():
    for kind in ("Euclidean", "Hyperbolic", "Sphere"):
        assert fu.verify_hypersurface_bound(model_of(kind), None, [0.2, 0.5]).passed


@given(st.floats(0.05, 1.0), st.floats(0.0, 0.9))
def test_distance_power_scaling(r, gam):
    E = model_of("Euclidean", dimension=3)
    # flat: int_B d^-gam = |S^2| r^(3-gam)/(3-gam)
    exact = 4 * math.pi * r ** (3 - gam) / (3 - gam)
    assert fu.distance_power_integral(E, r, gam) == pytest.approx(exact, rel=1e-9)
