import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from modricci import convergence as cv
from modricci.errors import EndpointsTooClose, HypothesisViolated, RadiusAboveThreshold

from conftest import model_of


def unit(n, i=0, sign=1.0):
    e = np.zeros(n)
    e[i] = sign
    return e


@pytest.mark.parametrize("n", [2, 3, 4])
def test_sphere_quadrature_total(n):
    dirs, w = cv.sphere_quadrature(n, 8)
    area = 2 * math.pi ** (n / 2) / math.gamma(n / 2)
    assert w.sum() == pytest.approx(area, rel=1e-12)
    assert np.allclose(np.linalg.norm(dirs, axis=1), 1.0)


def test_ball_integral_flat():
    E = model_of("Euclidean", dimension=2)
    assert cv.ball_integral(E, None, 3.0, lambda p: np.ones(p.shape[:-1])) == pytest.approx(9 * math.pi, rel=1e-12)


@given(st.floats(0.05, 1.0), st.floats(0.0, 2 * math.pi), st.floats(0.05, 1.0), st.floats(0.0, 2 * math.pi))
def test_transport_preserves_distance(a, th, b, ph):
    from modricci.geometry import space_form_of
    for kind in ("Sphere", "Hyperbolic"):
        m = model_of(kind, dimension=2, **({"curvature": 1.0} if kind == "Sphere" else {"lam": 1.0}))
        x = m.point_at(a, np.array([math.cos(th), math.sin(th)]))
        y = cv.transport(m, x, b * np.array([math.cos(ph), math.sin(ph)]))
        sf = space_form_of(m)
        assert sf.distance(x, y) == pytest.approx(b, abs=1e-9)


def test_region_volume():
    E = model_of("Euclidean", dimension=3)
    assert cv.Region(None, 1.0, 0.5).volume(E) == pytest.approx(4 * math.pi / 3 * (1 - 0.125), rel=1e-10)


def test_sample_space_deterministic():
    S = model_of("Sphere", dimension=2, curvature=1.0)
    a = cv.sample_space(S, cv.Region(None, 0.5), 30, seed=4)
    b = cv.sample_space(S, cv.Region(None, 0.5), 30, seed=4)
    assert np.array_equal(a.D, b.D)


@pytest.fixture(scope="module")
def disk_report():
    E = model_of("Euclidean", dimension=2)
    return cv.segment_inequality_mc(E, None, 1.0, lambda p: np.ones(p.shape[:-1]), n_pairs=1_000_000, seed=0)


def test_segment_disk_mean(disk_report):
    assert abs(disk_report.mean_F - 128 / (45 * math.pi)) <= disk_report.mean_F_halfwidth
    assert disk_report.mean_F_halfwidth < 0.01 * disk_report.mean_F
    assert disk_report.ratio <= 1.0
    assert disk_report.certificate(1e-8, "flat").passed


def test_segment_estimator_unbiased():
    E = model_of("Euclidean", dimension=2)
    z = []
    for seed in range(20):
        rep = cv.segment_inequality_mc(E, None, 1.0, lambda p: np.ones(p.shape[:-1]), n_pairs=50_000, seed=seed)
        z.append((rep.mean_F - 128 / (45 * math.pi)) / (rep.mean_F_halfwidth / 1.96))
    # standardised errors: mean within 3 standard errors of 0, spread near 1
    assert abs(np.mean(z)) < 3 / math.sqrt(20)
    assert 0.5 < np.std(z) < 1.6


def test_segment_zero():
    E = model_of("Euclidean", dimension=2)
    rep = cv.segment_inequality_mc(E, None, 0.5, lambda p: np.zeros(p.shape[:-1]), n_pairs=10_000)
    assert rep.lhs_estimate == 0.0
    assert rep.certificate(1e-8, "flat").passed


def test_segment_sphere():
    S = model_of("Sphere", dimension=2, curvature=1.0)
    rep = cv.segment_inequality_mc(S, None, 0.5, lambda p: np.sum(p * p, axis=-1), n_pairs=100_000, seed=2)
    assert rep.certificate(1e-8, "sphere").passed


def test_flat_excess_closed_form():
    E = model_of("Euclidean", dimension=3)
    qp, qm = np.array([10.0, 0, 0]), np.array([-10.0, 0, 0])
    dat = cv.excess_data(E, np.array([0.0, 1.0, 0.0]), qp, qm, 0.1)
    assert dat.e_x == pytest.approx(2 * (math.sqrt(101) - 10), abs=1e-12)
    on_segment = cv.excess_data(E, np.array([3.0, 0.0, 0.0]), qp, qm, 0.1)
    assert on_segment.e_x == pytest.approx(0.0, abs=1e-12)


def test_excess_suites_pass():
    S = model_of("Sphere", dimension=2, curvature=1.0)
    assert cv.excess_suite(S, None, S.point_at(1.0, unit(2)), S.point_at(1.0, unit(2, 0, -1)), 0.1).passed
    H = model_of("Hyperbolic")
    D = 1 / math.sqrt(2)
    assert cv.excess_suite(H, None, H.point_at(D, unit(3)), H.point_at(D, unit(3, 0, -1)), 0.1).passed


def test_excess_gates():
    H = model_of("Hyperbolic")
    with pytest.raises(RadiusAboveThreshold):
        cv.excess_suite(H, None, H.point_at(0.5, unit(3)), H.point_at(0.5, unit(3, 0, -1)), 1.5)
    with pytest.raises(EndpointsTooClose):
        cv.excess_suite(H, None, H.point_at(0.05, unit(3)), H.point_at(0.05, unit(3, 0, -1)), 0.1)
    with pytest.raises(HypothesisViolated):
        cv.excess_suite(H, None, H.point_at(3.0, unit(3)), H.point_at(3.0, unit(3, 0, -1)), 0.1)


def test_excess_trend():
    assert cv.excess_trend().passed


def test_harmonic_constant_data():
    E = model_of("Euclidean", dimension=2)
    fit = cv.harmonic_fit(E, 0.1, lambda s, th: 0 * s + 3.0, lambda s, th: (0 * s, 0 * s))
    assert fit.triple == (0.0, 0.0, 0.0)


def test_harmonic_far_point():
    E = model_of("Euclidean", dimension=2)
    R = 0.1
    rep = cv.harmonic_approximation(E, None, R, np.array([1000 * R, 0.0]), np.array([-1000 * R, 0.0]))
    assert rep.passed
    # sup|h - b| = R^2/(4D) at the centre for D = 1000R; reported divided by R
    assert rep.extras["sup_diff"] == pytest.approx(1 / 4000, rel=1e-3)


def test_harmonic_hyperbolic_trend():
    assert cv.harmonic_trend().passed


def test_splitting_identity():
    E = model_of("Euclidean", dimension=3)
    rep = cv.splitting_report(E, None, 0.5, cv.coordinate_map(3))
    assert rep.epsilon_achieved <= 1e-8


def test_splitting_scaled():
    E = model_of("Euclidean", dimension=3)
    rep = cv.splitting_report(E, None, 0.5, cv.coordinate_map(3, scale=2.0))
    assert rep.values["gradient"] == pytest.approx(1.0)
    assert rep.binding == "orthogonality"
    assert not rep.certificate(0.5).passed


def test_splitting_sphere_quadratic():
    S = model_of("Sphere", dimension=2, curvature=1.0)
    h = cv.coordinate_map(2)
    a = cv.splitting_report(S, None, 0.2, h).epsilon_achieved
    b = cv.splitting_report(S, None, 0.1, h).epsilon_achieved
    assert 3.0 <= a / b <= 5.0


def test_cone_flat():
    E = model_of("Euclidean", dimension=3)
    assert abs(cv.volume_condition_delta(E, 0.5)) <= 1e-10
    c = cv.cone_comparison(E, 0.5)
    assert c["upper"] <= 2 * c["mesh"]


def test_cone_sphere_delta():
    S = model_of("Sphere", dimension=2, curvature=1.0)
    closed = 1 - 0.5 * (2 * math.pi * math.sin(1)) / (2 * math.pi * (1 - math.cos(1)))
    assert cv.volume_condition_delta(S, 1.0) == pytest.approx(closed, abs=1e-10)


def test_cone_suite_hyperbolic_ladder():
    H = model_of("Hyperbolic", dimension=2, lam=1.0)
    c = cv.cone_rigidity_suite(H, R=0.4, ladder=(0.4, 0.2, 0.1))
    assert c.passed


def test_volume_gh_trend():
    assert cv.volume_gh_trend().passed
