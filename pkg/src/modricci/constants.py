"""Explicit constants used by the certificates.

Every constant that an inequality leaves implicit is pinned down here so
that certificates are reproducible.  ``CONSTANT_TABLE`` lists each entry with
a one line note on where its value comes from.
"""

import math

from scipy.optimize import brentq
from scipy.special import gamma as gamma_fn

EPS_MIN = 1e-10
DEFAULT_TOL = 1e-8
TOL_MASS = 1e-3
HEAT_SEED_TIME = 1e-4
COVER_EPSILON = 0.05
ODE_RTOL = 1e-10
QUAD_ABSTOL = 1e-9
LQ_PROBE_SCALE = 10.0


def c_alpha(alpha):
    """Constant in front of K s^-alpha in the Laplacian comparison.

    Each branch of the radial correction integral is at most
    2/(1-alpha) s^-alpha; doubling covers the case where the ray crosses
    the singular point.
    """
    if not 0.0 <= alpha < 1.0:
        raise ValueError(f"alpha must lie in [0, 1), got {alpha}")
    return 4.0 / (1.0 - alpha)


def sphere_area(n):
    """Area of the unit sphere S^{n-1} in R^n."""
    return 2.0 * math.pi ** (n / 2.0) / gamma_fn(n / 2.0)


def unit_ball_volume(n):
    return sphere_area(n) / n


def half_volume_delta(n):
    """Largest delta with ((1-3 delta)/(1+delta))^n >= 3/4."""
    g = lambda d: ((1.0 - 3.0 * d) / (1.0 + d)) ** n - 0.75
    return brentq(g, 0.0, 1.0 / 3.0, xtol=1e-14, rtol=1e-14)


def isoperimetric_constant(n):
    """C(n) with ID*_n(B(x,r)) <= C(n) r from the covering argument."""
    delta = half_volume_delta(n)
    return 10.0 ** (2 * n + 5) * (3.0 / (4.0 * delta**n)) ** (1.0 / n)


def sobolev_flat_l2(n):
    """Sharp averaged L^2 Sobolev constant of a Euclidean ball (n >= 3).

    Talenti's constant S_n^2 rescaled by |B_1|^{2/n} so that the inequality
    reads (avg |f|^{2n/(n-2)})^{(n-2)/n} <= C r^2 avg |grad f|^2.
    """
    s2 = (gamma_fn(n) / gamma_fn(n / 2.0)) ** (2.0 / n) / (math.pi * n * (n - 2))
    return s2 * unit_ball_volume(n) ** (2.0 / n)


def sobolev_flat_l1(n):
    """Sharp averaged L^1 Sobolev constant of a Euclidean ball."""
    return 1.0 / n


def sobolev_constant_l2(n):
    return sobolev_flat_l2(n) * isoperimetric_constant(n)


def sobolev_constant_l1(n):
    return sobolev_flat_l1(n) * isoperimetric_constant(n)


def distance_power_constant(n, gam):
    """C(n, gamma) from the dyadic shell decomposition of a ball."""
    return 2.0**gam * n / (n - gam) * sphere_area(n)


def segment_constant(n, lam, K, alpha, r):
    """Constant of the segment inequality for pairs inside B(x, r)."""
    s = 2.0 * r
    return 3.0**n * 2.0 * math.exp(c_alpha(alpha) * K * s ** (1.0 - alpha) + lam * s * s)


def moser_mu(n):
    return n / (n - 2.0) if n > 2 else 2.0


def moser_exponents(n, count=8):
    """Exponent ladder p_i = mu^i / 2 of the iteration."""
    mu = moser_mu(n)
    return [mu**i / 2.0 for i in range(count)]


def moser_constant(n):
    """Closed product over the exponent ladder.

    prod_i (16 C_S mu^{2i})^{mu^-i} = (16 C_S)^{mu/(mu-1)} mu^{2 mu/(mu-1)^2}
    with C_S the averaged L^2 Sobolev constant.
    """
    mu = moser_mu(n)
    cs = sobolev_constant_l2(max(n, 3))
    return (16.0 * cs) ** (mu / (mu - 1.0)) * mu ** (2.0 * mu / (mu - 1.0) ** 2)


def soliton_gradient_bound(n, lam, K, c1=None):
    """Bound Lambda on |grad L| for a normalized gradient soliton."""
    if lam > 0:
        return math.sqrt(2.0 * lam * K)
    if lam == 0:
        return 1.0
    if c1 is None:
        raise ValueError("expanding solitons need the user supplied scalar curvature bound C1(n)")
    return math.sqrt(-2.0 * lam * K + c1)


def quintic_step(s):
    """Smooth clamp: 0 for s <= 0, 1 for s >= 1, C^2 in between."""
    import numpy as np

    t = np.clip(s, 0.0, 1.0)
    return t**3 * (10.0 - 15.0 * t + 6.0 * t * t)


def quintic_step_d1(s):
    import numpy as np

    t = np.clip(s, 0.0, 1.0)
    return 30.0 * t * t * (1.0 - t) ** 2


def quintic_step_d2(s):
    import numpy as np

    t = np.clip(s, 0.0, 1.0)
    return 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t)


CONSTANT_TABLE = [
    ("C(alpha)", "4/(1-alpha)", "radial correction of the Laplacian comparison, two branches of 2/(1-alpha)"),
    ("C(n,gamma)", "2^gamma n/(n-gamma) |S^{n-1}|", "dyadic shell bound for the integral of d^-gamma"),
    ("C_L(n,lam,K,alpha,rho)", "see radial.lq_chain_constant", "L^1 average of |V| on B(x,r) times r^alpha, two case split"),
    ("C_vol", "max(1/6, (C(alpha)+C_L)/(1-alpha))", "integrated volume ratio derivative bound"),
    ("delta(n)", "root of ((1-3d)/(1+d))^n = 3/4", "half volume ratio"),
    ("C_iso(n)", "10^{2n+5} (3/(4 delta^n))^{1/n}", "isoperimetric covering constant"),
    ("C_sob2(n)", "Talenti S_n^2 |B_1|^{2/n} C_iso(n)", "averaged L^2 Sobolev constant"),
    ("C_sob1(n)", "C_iso(n)/n", "averaged L^1 Sobolev constant"),
    ("C_seg", "3^n 2 exp(C(alpha) K (2r)^{1-alpha} + lam (2r)^2)", "segment inequality, volume element ratio on [s/2, s]"),
    ("C_moser(n)", "(16 C_sob2)^{mu/(mu-1)} mu^{2mu/(mu-1)^2}", "iteration over p_i = mu^i/2, mu = n/(n-2)"),
    ("Lambda(n,lam,K)", "sqrt(2 lam K) | 1 | sqrt(-2 lam K + C1)", "soliton gradient bound, C1 user supplied"),
    ("eps_cover", str(COVER_EPSILON), "cut-off cover radius factor, must be below 0.1"),
    ("eps_min", str(EPS_MIN), "guard radius around the singular point of V"),
    ("t0", str(HEAT_SEED_TIME), "heat kernel seed time"),
    ("tol_mass", str(TOL_MASS), "heat kernel mass leak tolerance"),
    ("probe_scale", str(LQ_PROBE_SCALE), "probe radius replacing 1/lambda when lambda = 0"),
]
