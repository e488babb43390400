"""Integral estimates: averaged L^q norms of V, distance power integrals,
half volume, isoperimetric ratios of sub-balls and Sobolev inequalities.

Functions of d(., O) averaged over a ball B(x, r) are integrated in polar
coordinates about O: the sphere S(O, t) meets B(x, r) in a spherical cap
whose angular fraction has a closed form in constant curvature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.special import betainc

from .certificate import BoundCertificate
from .constants import (
    DEFAULT_TOL,
    c_alpha,
    distance_power_constant,
    half_volume_delta,
    isoperimetric_constant,
    sobolev_constant_l1,
    sobolev_constant_l2,
    sphere_area as unit_sphere_area,
)
from .errors import (
    ExponentOutOfRange,
    GammaTooLarge,
    RadiusAboveThreshold,
    UnsupportedDimension,
    UnsupportedKind,
)
from .radial import ball_volume, lq_chain_constant, sphere_area, volume_ratio_constant


@dataclass
class AveragedNorm:
    center: tuple
    radius: float
    q: float
    value: float


# ---------------------------------------------------------------------------
# integrals of functions of d(., O)


def _cap_fraction(n, c):
    """Fraction of S^{n-1} where the cosine to a fixed axis is >= c."""
    c = float(np.clip(c, -1.0, 1.0))
    half = 0.5 * betainc((n - 1) / 2.0, 0.5, 1.0 - c * c)
    return half if c >= 0 else 1.0 - half


def _cap_cosine(model, d0, t, r):
    """Cosine threshold: the point at distance t from O with angle g to the
    direction of x lies in B(x, r) iff cos g >= returned value."""
    k = model.base_curvature
    if k == 0:
        return (d0 * d0 + t * t - r * r) / (2.0 * d0 * t)
    a = math.sqrt(abs(k))
    if k > 0:
        return (math.cos(a * r) - math.cos(a * d0) * math.cos(a * t)) / (math.sin(a * d0) * math.sin(a * t))
    return (math.cosh(a * d0) * math.cosh(a * t) - math.cosh(a * r)) / (math.sinh(a * d0) * math.sinh(a * t))


def integrate_radial_function(model, h, center, r, epsrel=1e-11):
    """Integral of h(d(y, O)) over B(center, r).

    ``h`` acts on distances to O and may have an integrable singularity at 0.
    """
    n = model.n
    S = unit_sphere_area(n)
    c = np.zeros(n) if center is None else np.asarray(center, dtype=float)
    d0 = float(model.distance_to_origin(c))
    w = lambda t: float(model.f(t)) ** (n - 1)
    if d0 == 0.0:
        val, _ = quad(lambda u: h(r * u) * w(r * u), 0.0, 1.0, epsabs=0.0, epsrel=epsrel, limit=400)
        return S * r * val
    if not model.is_space_form:
        raise UnsupportedKind(f"off-center integrals over {model.kind} are not available")
    lo, hi = max(d0 - r, 0.0), min(d0 + r, model.cut_radius)
    inner = 0.0
    if d0 < r:
        # whole spheres S(O, t) for t <= r - d0
        v, _ = quad(lambda t: h(t) * w(t), 0.0, r - d0, epsabs=0.0, epsrel=epsrel, limit=400)
        inner = S * v
        lo = r - d0

    def shell(t):
        return h(t) * w(t) * _cap_fraction(n, _cap_cosine(model, d0, t, r))

    v, _ = quad(shell, lo, hi, epsabs=0.0, epsrel=epsrel, limit=400)
    return inner + S * v


def averaged_norm(model, h, center, r, q):
    """(avg_{B(center, r)} |h(d(., O))|^q)^{1/q}."""
    vol = ball_volume(model, center, r)
    total = integrate_radial_function(model, lambda t: abs(h(t)) ** q, center, r)
    c = () if center is None else tuple(float(v) for v in center)
    return AveragedNorm(c, r, q, (total / vol) ** (1.0 / q))


def field_norm_profile(model):
    """t -> |V| at distance t from O."""
    if not model.has_field:
        return lambda t: 0.0
    return lambda t: abs(float(model.v_of_s(t)))


def verify_lq_vector_bound(model, centers, radii, q, tol=DEFAULT_TOL):
    """r^alpha ||V||*_{q,B(x,r)} <= C_L K on every (center, radius).

    The right side uses the chain constant for centers with d(x,O) <= 2r
    and the pointwise bound (constant 1) when d(x,O) > 2r.
    """
    sp = model.spec
    n, K, alpha, lam, rho = model.n, sp.K, sp.alpha, sp.lam, sp.rho
    if q <= 0 or (alpha > 0 and q >= n / alpha):
        raise ExponentOutOfRange(f"q={q} must lie in (0, n/alpha) = (0, {n / alpha if alpha else math.inf:g})")
    unit = ball_volume(model, None, 1.0)
    if unit < rho:
        raise ExponentOutOfRange(f"model is collapsed at unit scale: vol B(O,1) = {unit:g} < rho = {rho:g}")
    cl = lq_chain_constant(n, lam, K, alpha, rho, q)
    h = field_norm_profile(model)
    samples, lhs, rhs = [], [], []
    for c in centers:
        d0 = 0.0 if c is None else float(model.distance_to_origin(c))
        for r in radii:
            if r > 1.0:
                raise RadiusAboveThreshold(f"radius {r} above 1")
            val = r**alpha * averaged_norm(model, h, c, r, q).value
            samples.append({"center": None if c is None else list(map(float, c)), "r": float(r), "d0": d0})
            lhs.append(val)
            rhs.append((1.0 if d0 > 2 * r else cl) * K)
    return BoundCertificate("LqVectorBound", samples, lhs, rhs, tol, model.name,
                            {**model.params(), "q": q}, {"C_L": cl, "unit_ball_volume": unit})


def distance_power_integral(model, r, gam):
    """Integral of d(y, O)^-gam over B(O, r)."""
    if gam >= model.n:
        raise GammaTooLarge(f"gamma={gam} must be below n={model.n}")
    return integrate_radial_function(model, lambda t: t ** (-gam) if gam else 1.0, None, r)


def verify_distance_power(model, radii, gam, tol=DEFAULT_TOL):
    sp = model.spec
    n = model.n
    C = distance_power_constant(n, gam)
    lhs, rhs = [], []
    for r in radii:
        if r > 1.0:
            raise RadiusAboveThreshold(f"radius {r} above 1")
        lhs.append(distance_power_integral(model, r, gam))
        rhs.append(C * math.exp(c_alpha(sp.alpha) * sp.K * r ** (1 - sp.alpha) + sp.lam * r * r) * r ** (n - gam))
    return BoundCertificate("DistancePowerIntegral", [{"r": float(r)} for r in radii], lhs, rhs, tol,
                            model.name, {**model.params(), "gamma": gam}, {"C_n_gamma": C})


# ---------------------------------------------------------------------------
# half volume and the r0 threshold


def ratio_exponent_constant(model):
    """Constant C of the volume ratio bound exp(C (lam r^2 + K r^{1-alpha})).

    Bounded fields (alpha = 0) use the direct constant 2; otherwise the
    noncollapsed chain constant.
    """
    sp = model.spec
    chain = volume_ratio_constant(model.n, sp.lam, sp.K, sp.alpha, sp.rho)
    return min(chain, 2.0) if sp.alpha == 0 else chain


def half_volume_radius(model):
    """Largest r0 <= 1 with exp(C (lam r0^2 + K r0^{1-alpha})) <= 3/2."""
    sp = model.spec
    C = ratio_exponent_constant(model)
    g = lambda r: C * (sp.lam * r * r + sp.K * r ** (1.0 - sp.alpha)) - math.log(1.5)
    if g(1.0) <= 0:
        return 1.0
    return brentq(g, 1e-300, 1.0, xtol=1e-300, rtol=1e-14)


def verify_half_volume(model, centers, radii, delta=None, tol=DEFAULT_TOL):
    """vol(B(x, delta r))/vol(B(x, r)) <= 1/2 for r <= r0."""
    n = model.n
    delta = half_volume_delta(n) if delta is None else delta
    r0 = half_volume_radius(model)
    samples, lhs = [], []
    for c in centers:
        for r in radii:
            if r > r0 * (1 + 1e-12):
                raise RadiusAboveThreshold(f"radius {r:g} above r0 = {r0:g}")
            samples.append({"center": None if c is None else list(map(float, c)), "r": float(r)})
            lhs.append(ball_volume(model, c, delta * r) / ball_volume(model, c, r))
    return BoundCertificate("HalfVolume", samples, lhs, np.full(len(lhs), 0.5), tol, model.name,
                            {**model.params(), "delta": delta}, {"r0": r0})


def verify_hypersurface_bound(model, center, radii, tol=DEFAULT_TOL):
    """vol(B(x,r)) <= 2^{n+3} r vol(H cap B(x,2r)) with H the geodesic sphere
    splitting B(x, r) into halves of equal volume."""
    n = model.n
    lhs, rhs, samples = [], [], []
    for r in radii:
        V = ball_volume(model, center, r)
        rh = brentq(lambda t: ball_volume(model, center, t) - V / 2.0, 1e-12 * r, r, xtol=1e-14 * r)
        lhs.append(V)
        rhs.append(2.0 ** (n + 3) * r * sphere_area(model, center, rh))
        samples.append({"r": float(r), "r_half": rh})
    return BoundCertificate("HypersurfaceVolume", samples, lhs, rhs, tol, model.name, model.params())


# ---------------------------------------------------------------------------
# Sobolev and isoperimetric


@dataclass(frozen=True)
class TestFunction:
    """Radial function of u = d(., x)/r supported in u <= 1."""

    name: str
    f: object
    df: object  # derivative in u


def bump(p):
    return TestFunction(
        f"bump{p}",
        lambda u: max(1.0 - u, 0.0) ** p,
        lambda u: -p * max(1.0 - u, 0.0) ** (p - 1) if u < 1.0 else 0.0,
    )


def truncated_gaussian(width=1.0 / 3.0):
    e1 = math.exp(-0.5 / width**2)
    return TestFunction(
        "gaussian",
        lambda u: max(math.exp(-0.5 * u * u / width**2) - e1, 0.0),
        lambda u: -u / width**2 * math.exp(-0.5 * u * u / width**2) if u < 1.0 else 0.0,
    )


def zero_function():
    return TestFunction("zero", lambda u: 0.0, lambda u: 0.0)


TEST_FAMILY = {
    "bump1": bump(1),
    "bump2": bump(2),
    "bump3": bump(3),
    "gaussian": truncated_gaussian(),
    "zero": zero_function(),
}


def _ball_average(model, center, r, g):
    """avg over B(center, r) of g(u), u = d(., center)/r (radial about center)."""
    n = model.n
    c = np.zeros(n) if center is None else np.asarray(center, dtype=float)
    d0 = float(model.distance_to_origin(c))
    if d0 > 0 and not model.is_space_form:
        raise UnsupportedKind(f"Sobolev checks on {model.kind} are built around O")
    w = lambda u: float(model.f(r * u)) ** (n - 1)
    num, _ = quad(lambda u: g(u) * w(u), 0.0, 1.0, epsabs=0.0, epsrel=1e-12, limit=400)
    den, _ = quad(w, 0.0, 1.0, epsabs=0.0, epsrel=1e-13, limit=400)
    return num / den


def sobolev_sides(model, center, r, tf):
    """Both sides of the averaged L^1 and L^2 Sobolev inequalities, without constants.

    Returns (l1_lhs, l1_grad, l2_lhs, l2_grad) where the inequalities read
    l1_lhs <= C r l1_grad and l2_lhs <= C r^2 l2_grad.
    """
    n = model.n
    p1 = n / (n - 1.0)
    l1_lhs = _ball_average(model, center, r, lambda u: abs(tf.f(u)) ** p1) ** (1.0 / p1)
    l1_grad = _ball_average(model, center, r, lambda u: abs(tf.df(u))) / r
    if n > 2:
        p2 = 2.0 * n / (n - 2.0)
        l2_lhs = _ball_average(model, center, r, lambda u: abs(tf.f(u)) ** p2) ** (2.0 / p2)
        l2_grad = _ball_average(model, center, r, lambda u: tf.df(u) ** 2) / r**2
    else:
        l2_lhs = l2_grad = None
    return l1_lhs, l1_grad, l2_lhs, l2_grad


def verify_sobolev(model, center=None, r=None, test_functions=None, form="both", sub_balls=(0.25, 0.5, 0.75),
                   tol=DEFAULT_TOL):
    """Averaged Sobolev inequalities for the radial test family plus the
    isoperimetric ratio of concentric sub-balls.

    ``form`` is "L1", "L2" or "both".  The L^2 form needs n >= 3.
    """
    n = model.n
    if form == "L2" and n == 2:
        raise UnsupportedDimension("the L^2 Sobolev exponent 2n/(n-2) needs n >= 3")
    r0 = half_volume_radius(model)
    r = min(r0, 0.5) if r is None else r
    if r > r0 * (1 + 1e-12):
        raise RadiusAboveThreshold(f"radius {r:g} above r0 = {r0:g}")
    names = test_functions or ["bump1", "bump2", "bump3", "gaussian"]
    C1, C2, Ci = sobolev_constant_l1(n), sobolev_constant_l2(max(n, 3)), isoperimetric_constant(n)
    samples, lhs, rhs = [], [], []
    emp1, emp2 = 0.0, 0.0
    for name in names:
        tf = TEST_FAMILY[name] if isinstance(name, str) else name
        a1, g1, a2, g2 = sobolev_sides(model, center, r, tf)
        if form in ("L1", "both"):
            samples.append({"test": tf.name, "form": "L1"})
            lhs.append(a1)
            rhs.append(C1 * r * g1)
            if g1 > 0:
                emp1 = max(emp1, a1 / (r * g1))
        if form in ("L2", "both") and n > 2:
            samples.append({"test": tf.name, "form": "L2"})
            lhs.append(a2)
            rhs.append(C2 * r * r * g2)
            if g2 > 0:
                emp2 = max(emp2, a2 / (r * r * g2))
    volB = ball_volume(model, center, r)
    for a in sub_balls:
        ratio = volB ** (1.0 / n) * ball_volume(model, center, a * r) ** ((n - 1.0) / n) / sphere_area(model, center, a * r)
        samples.append({"test": f"subball{a:g}", "form": "isoperimetric"})
        lhs.append(ratio)
        rhs.append(Ci * r)
    extras = {"r0": r0, "C_L1": C1, "C_L2": C2 if n > 2 else None, "C_iso": Ci,
              "empirical_C_L1": emp1, "empirical_C_L2": emp2 if n > 2 else None}
    return BoundCertificate("Sobolev", samples, lhs, rhs, tol, model.name, {**model.params(), "r": r}, extras)
