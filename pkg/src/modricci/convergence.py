"""Segment inequality, excess, harmonic approximation, splitting maps and
cone rigidity diagnostics.

Most routines work in geodesic polar coordinates (s, u) about a base point
x.  On constant curvature models every ball looks the same, so distances
from polar data follow from the law of cosines and chart points follow from
an isometry moving O to x.  Other models are supported about O only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.special import roots_jacobi

from .certificate import BoundCertificate, merge, single
from .constants import DEFAULT_TOL, LQ_PROBE_SCALE, segment_constant, sphere_area as unit_sphere_area
from .curvature import christoffel
from .errors import (
    EndpointsTooClose,
    GeodesicAmbiguous,
    HypothesisViolated,
    RadiusAboveThreshold,
    UnsupportedDimension,
    UnsupportedKind,
)
from .geometry import SpaceForm, space_form_of
from .metric_spaces import (  # noqa: F401  (re-exported)
    FiniteMetricSpace,
    cone_distance,
    cone_space,
    correspondence_distortion,
    gh_distance,
    gh_exact,
    gh_lower_bound,
    gh_search,
    identity_distortion,
    triangle_defect,
)
from .models import ModelSpec, build_model

Z95 = 1.959963984540054


# ---------------------------------------------------------------------------
# polar coordinates about a point


def sphere_quadrature(n, m=16):
    """Directions (N, n) and weights integrating over S^{n-1}.

    Trapezoid rule with 2m nodes in the azimuth and m point Gauss-Jacobi
    rules in the polar angles; the weights sum to |S^{n-1}|.
    """
    if n == 2:
        phi = 2.0 * math.pi * np.arange(2 * m) / (2 * m)
        return np.stack([np.cos(phi), np.sin(phi)], axis=1), np.full(2 * m, math.pi / m)
    a = (n - 3) / 2.0
    t, w = roots_jacobi(m, a, a)
    sub_d, sub_w = sphere_quadrature(n - 1, m)
    first = np.repeat(t, sub_d.shape[0])[:, None]
    rest = (np.sqrt(1.0 - t * t)[:, None, None] * sub_d[None]).reshape(-1, n - 1)
    return np.hstack([first, rest]), (w[:, None] * sub_w[None]).ravel()


def _is_origin(x):
    return x is None or not np.any(np.asarray(x, dtype=float))


def transport(model, x, v):
    """Chart points exp_x(v) for tangent vectors v (..., n) at x.

    T_x is identified with R^n through the isometry that moves O to x
    along the radial geodesic.  Constant curvature models only, unless x = O.
    """
    v = np.asarray(v, dtype=float)
    s = np.linalg.norm(v, axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        u = np.where(s[..., None] > 0, v / np.where(s > 0, s, 1.0)[..., None], 0.0)
    if _is_origin(x):
        return model.point_at(s, np.where(s[..., None] > 0, u, 1.0)) * (s[..., None] > 0)
    sf = space_form_of(model)
    x = np.asarray(x, dtype=float)
    if sf.k == 0:
        return x + v
    P = sf.embed(v)
    d0 = float(np.linalg.norm(x))
    xh = x / d0
    th = sf.a * d0
    p0 = P[..., 0]
    par = P[..., 1:] @ xh
    perp = P[..., 1:] - par[..., None] * xh
    if sf.k > 0:
        q0 = math.cos(th) * p0 - math.sin(th) * par
        qpar = math.sin(th) * p0 + math.cos(th) * par
    else:
        q0 = math.cosh(th) * p0 + math.sinh(th) * par
        qpar = math.sinh(th) * p0 + math.cosh(th) * par
    Q = np.concatenate([q0[..., None], perp + qpar[..., None] * xh], axis=-1)
    return sf.unembed(Q)


@dataclass
class PolarNodes:
    """Quadrature nodes of B(x, R): radii s, unit directions, weights of the
    Riemannian measure, and chart points (None when not requested)."""

    s: np.ndarray
    dirs: np.ndarray
    weights: np.ndarray
    points: np.ndarray | None


def _check_polar(model, x):
    if not _is_origin(x) and not model.is_space_form:
        raise UnsupportedKind(f"polar coordinates about x != O are not available for {model.kind}")


def polar_nodes(model, x, R, n_radial=32, n_angular=16, s_min=0.0, with_points=True):
    _check_polar(model, x)
    n = model.n
    R = min(R, model.cut_radius)
    g, gw = np.polynomial.legendre.leggauss(n_radial)
    s = s_min + (g + 1.0) * (R - s_min) / 2.0
    ws = gw * (R - s_min) / 2.0 * model.f(s) ** (n - 1)
    dirs, wd = sphere_quadrature(n, n_angular)
    S = np.repeat(s, dirs.shape[0])
    D = np.tile(dirs, (s.size, 1))
    W = np.outer(ws, wd).ravel()
    pts = transport(model, x, S[:, None] * D) if with_points else None
    return PolarNodes(S, D, W, pts)


def ball_integral(model, x, R, f, n_radial=32, n_angular=16):
    """Integral of f (a function of chart points) over B(x, R)."""
    nodes = polar_nodes(model, x, R, n_radial, n_angular)
    return math.fsum(nodes.weights * np.asarray(f(nodes.points), dtype=float))


# ---------------------------------------------------------------------------
# regions and samples


@dataclass(frozen=True)
class Region:
    """Annulus {r_in <= d(center, .) <= r_out}; a ball when r_in = 0 and a
    distance sphere when r_in = r_out."""

    center: tuple | None = None
    r_out: float = 1.0
    r_in: float = 0.0

    def _w(self, model, s):
        return model.f(s) ** (model.n - 1)

    def volume(self, model):
        n = model.n
        if self.r_in == self.r_out:
            return float(unit_sphere_area(n) * self._w(model, self.r_out))
        g, gw = np.polynomial.legendre.leggauss(64)
        s = self.r_in + (g + 1.0) * (self.r_out - self.r_in) / 2.0
        return float(unit_sphere_area(n) * np.sum(gw * self._w(model, s)) * (self.r_out - self.r_in) / 2.0)

    def sample_polar(self, model, m, rng):
        """Radii and directions of m points uniform for the Riemannian measure."""
        n = model.n
        dirs = rng.standard_normal((m, n))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        if self.r_in == self.r_out:
            return np.full(m, float(self.r_out)), dirs
        grid = np.linspace(self.r_in, self.r_out, 20001)
        w = self._w(model, grid)
        cdf = np.concatenate([[0.0], np.cumsum(0.5 * (w[1:] + w[:-1]) * np.diff(grid))])
        cdf /= cdf[-1]
        return np.interp(rng.random(m), cdf, grid), dirs

    def sample(self, model, m, rng):
        s, dirs = self.sample_polar(model, m, rng)
        return transport(model, self.center, s[:, None] * dirs)


def sample_space(model, region, n_points, seed=0):
    """FiniteMetricSpace of n_points uniform samples from a region."""
    sf = space_form_of(model)
    rng = np.random.Generator(np.random.Philox(seed))
    pts = region.sample(model, n_points, rng)
    D = sf.distance_matrix(pts)
    D = 0.5 * (D + D.T)
    np.fill_diagonal(D, 0.0)
    return FiniteMetricSpace([tuple(map(float, p)) for p in pts], D).validate()


# ---------------------------------------------------------------------------
# segment inequality


@dataclass
class SegmentReport:
    lhs_estimate: float
    rhs_value: float
    ratio: float
    ci: tuple
    mean_F: float
    mean_F_halfwidth: float
    n_pairs: int
    n_rejected: int
    constant: float
    vol_A1: float
    vol_A2: float
    integral_3r: float
    params: dict = field(default_factory=dict)

    def certificate(self, tol=DEFAULT_TOL, model=""):
        """Upper end of the 95% interval against the right hand side."""
        return single("SegmentInequality", self.ci[1], self.rhs_value, label="ci_high", tolerance=tol,
                      model=model, params=self.params,
                      extras={"ratio": self.ratio, "mean_F": self.mean_F, "halfwidth": self.mean_F_halfwidth,
                              "rejected": self.n_rejected, "constant": self.constant})


def _inside(model, region, x, r):
    c = np.zeros(model.n) if region.center is None else np.asarray(region.center, dtype=float)
    xx = np.zeros(model.n) if x is None else np.asarray(x, dtype=float)
    d = float(space_form_of(model).distance(c, xx))
    return d + region.r_out <= r * (1 + 1e-12)


def segment_inequality_mc(model, x, r, f, A1=None, A2=None, n_pairs=1_000_000, seed=0, n_nodes=8, chunk=100_000):
    """Monte Carlo estimate of the pair integral of F_f over A1 x A2.

    F_f(y1, y2) integrates f along the minimal geodesic (Gauss-Legendre in
    arclength).  Antipodal pairs have no unique geodesic and are redrawn;
    their number is reported.  Each chunk draws from its own stream spawned
    from ``seed`` and the sums are exactly rounded, so the result does not
    depend on the chunking order.
    """
    sf = space_form_of(model)
    A1 = A1 or Region(None if x is None else tuple(x), r)
    A2 = A2 or Region(None if x is None else tuple(x), r)
    for A in (A1, A2):
        if not _inside(model, A, x, r):
            raise ValueError("regions must lie inside B(x, r)")
    g, gw = np.polynomial.legendre.leggauss(n_nodes)
    tn, tw = (g + 1.0) / 2.0, gw / 2.0
    sums, squares, rejected = [], [], 0
    n_chunks = -(-n_pairs // chunk)
    streams = np.random.SeedSequence(seed).spawn(n_chunks)
    for i, ss in enumerate(streams):
        rng = np.random.Generator(np.random.Philox(ss))
        m = min(chunk, n_pairs - i * chunk)
        y1, y2 = A1.sample(model, m, rng), A2.sample(model, m, rng)
        for _ in range(100):
            bad = sf.a * sf.distance(y1, y2) > math.pi - 1e-9 if sf.k > 0 else np.zeros(m, bool)
            if not np.any(bad):
                break
            rejected += int(bad.sum())
            y1[bad] = A1.sample(model, int(bad.sum()), rng)
            y2[bad] = A2.sample(model, int(bad.sum()), rng)
        else:
            raise GeodesicAmbiguous("could not avoid antipodal pairs")
        d = sf.distance(y1, y2)
        pts = sf.geodesic(y1, y2, tn)
        vals = np.asarray(f(pts), dtype=float)
        if np.any(vals < 0):
            raise ValueError("integrand must be nonnegative")
        F = d * (vals @ tw)
        sums.append(math.fsum(F))
        squares.append(math.fsum(F * F))
    N = n_pairs
    mean = math.fsum(sums) / N
    var = max(math.fsum(squares) / N - mean * mean, 0.0) * N / max(N - 1, 1)
    half = Z95 * math.sqrt(var / N)
    v1, v2 = A1.volume(model), A2.volume(model)
    lhs = v1 * v2 * mean
    p = model.spec
    C = segment_constant(model.n, p.lam, p.K, p.alpha, r)
    big = min(3.0 * r, model.cut_radius)
    integral = ball_integral(model, x, big, f)
    rhs = C * (v1 + v2) * r * integral
    return SegmentReport(
        lhs_estimate=lhs,
        rhs_value=rhs,
        ratio=lhs / rhs if rhs > 0 else (0.0 if lhs == 0 else math.inf),
        ci=(v1 * v2 * (mean - half), v1 * v2 * (mean + half)),
        mean_F=mean,
        mean_F_halfwidth=half,
        n_pairs=N,
        n_rejected=rejected,
        constant=C,
        vol_A1=v1,
        vol_A2=v2,
        integral_3r=integral,
        params={**model.params(), "r": r, "n_pairs": N, "seed": seed},
    )


# ---------------------------------------------------------------------------
# excess


@dataclass
class ExcessData:
    """Excess and Busemann-type functions on polar nodes of B(x, R)."""

    x: np.ndarray
    q_plus: np.ndarray
    q_minus: np.ndarray
    R: float
    s: np.ndarray
    dirs: np.ndarray
    weights: np.ndarray
    e: np.ndarray
    b_plus: np.ndarray
    b_minus: np.ndarray
    e_x: float
    d_plus: float
    d_minus: float
    h_plus: np.ndarray | None = None
    h_minus: np.ndarray | None = None

    @property
    def mean(self):
        return math.fsum(self.weights * self.e) / math.fsum(self.weights)


def _triangle(model, x, q_plus, q_minus):
    """d(x, q+), d(x, q-), d(q+, q-) and cos of the angle at x."""
    sf = space_form_of(model)
    x = np.zeros(model.n) if x is None else np.asarray(x, dtype=float)
    qp, qm = np.asarray(q_plus, dtype=float), np.asarray(q_minus, dtype=float)
    dp, dm, L = (float(sf.distance(a, b)) for a, b in ((x, qp), (x, qm), (qp, qm)))
    cg = float(sf.angle_cosine(L, dp, dm)) if min(dp, dm) > 0 else 1.0
    return sf, x, qp, qm, dp, dm, L, cg


def _axes(n, cg):
    ap = np.zeros(n)
    ap[0] = 1.0
    am = np.zeros(n)
    am[0] = cg
    am[1] = math.sqrt(max(1.0 - cg * cg, 0.0))
    return ap, am


def excess_data(model, x, q_plus, q_minus, R, s=None, dirs=None, weights=None):
    sf, x, qp, qm, dp, dm, L, cg = _triangle(model, x, q_plus, q_minus)
    if s is None:
        nodes = polar_nodes(model, x, R, 24, 16, with_points=False)
        s, dirs, weights = nodes.s, nodes.dirs, nodes.weights
    ap, am = _axes(model.n, cg)
    tp = sf.third_side(dp, s, dirs @ ap)
    tm = sf.third_side(dm, s, dirs @ am)
    return ExcessData(x, qp, qm, R, s, dirs, weights, tp + tm - L, tp - dp, tm - dm, dp + dm - L, dp, dm)


def excess_bracket(n, lam, K, alpha, R, eps, d_near, d_far):
    """eps R + 2(n-1)R^2/(D-R) + lam R^2 (D'+R) + K R^2/(D-R)^alpha + K R^(2-alpha).

    D and D' are the smaller and larger of d(x, q+-); they stand for the
    scale lam^(-1/2) of the distance hypothesis.
    """
    gap = d_near - R
    return (eps * R + 2.0 * (n - 1) * R * R / gap + lam * R * R * (d_far + R)
            + K * R * R / gap**alpha + K * R ** (2.0 - alpha))


def excess_suite(model, x, q_plus, q_minus, R, probe=1.0, n_radial=24, n_angular=16, tol=DEFAULT_TOL):
    """Averaged and pointwise excess bounds plus the two exact properties.

    Rows: ``average`` (mean over B(x,R) against the bracket with mean value
    constant 1), ``pointwise_inner`` (sup over B(x,(1-P)R) <= 3 P R with
    P = (bracket/R)^(1/(n+1))), ``pointwise`` (sup over B(x,R) <= 5 P R:
    one more step of length P R with |grad e| <= 2), ``nonnegativity`` and
    ``geodesic_zero`` (e along the minimal q+ q- geodesic, chart route).
    """
    if R > 1.0:
        raise RadiusAboveThreshold(f"R={R:g} > 1")
    sf, x, qp, qm, dp, dm, L, cg = _triangle(model, x, q_plus, q_minus)
    if L < 1e-9 or min(dp, dm) <= R:
        raise EndpointsTooClose(f"d(q+,q-)={L:.3g}, d(x,q+-)=({dp:.3g},{dm:.3g}) with R={R:g}")
    p = model.spec
    n, lam = model.n, p.lam
    if lam > 0 and max(dp, dm) > probe / math.sqrt(lam) * (1 + 1e-12):
        raise HypothesisViolated(f"d(x,q+-) must be <= {probe:g} lam^(-1/2) = {probe / math.sqrt(lam):.4g}")
    nodes = polar_nodes(model, x, R, n_radial, n_angular, with_points=False)
    data = excess_data(model, x, qp, qm, R, nodes.s, nodes.dirs, nodes.weights)
    eps = data.e_x / R
    bracket = excess_bracket(n, lam, p.K, p.alpha, R, eps, min(dp, dm), max(dp, dm))
    psi1 = bracket / R
    psi2 = psi1 ** (1.0 / (n + 1))
    # sup on a grid that includes the boundary sphere
    dirs, _ = sphere_quadrature(n, n_angular)
    sg = np.linspace(0.0, R, n_radial + 1)
    S = np.repeat(sg, dirs.shape[0])
    Dg = np.tile(dirs, (sg.size, 1))
    grid = excess_data(model, x, qp, qm, R, S, Dg, np.ones_like(S))
    sup_all = float(grid.e.max())
    certs = [
        single("ExcessAverage", data.mean, bracket, label="average"),
        single("ExcessPointwise", sup_all, 5.0 * psi2 * R, label="pointwise"),
    ]
    inner = S <= (1.0 - psi2) * R
    sup_inner = float(grid.e[inner].max()) if np.any(inner) else None
    if sup_inner is not None:
        certs.append(single("ExcessPointwise", sup_inner, 3.0 * psi2 * R, label="pointwise_inner"))
    certs.append(single("ExcessNonnegative", -float(min(grid.e.min(), data.e.min())), 0.0, label="nonnegativity"))
    try:
        t = np.linspace(0.0, 1.0, 101)
        path = sf.geodesic(qp, qm, t)
        e_path = sf.distance(path, qp) + sf.distance(path, qm) - L
        certs.append(single("ExcessGeodesic", float(np.max(np.abs(e_path))), 1e-9, label="geodesic_zero"))
    except GeodesicAmbiguous:
        pass
    extras = {
        "e_x": data.e_x, "eps": eps, "mean_e": data.mean, "sup_e": sup_all, "sup_e_over_R": sup_all / R,
        "sup_e_inner": sup_inner, "bracket": bracket, "Psi1": psi1, "Psi2": psi2,
        "mean_value_constant": 1.0, "mean_over_bracket": data.mean / bracket,
        "d_plus": dp, "d_minus": dm, "d_q": L,
    }
    params = {**model.params(), "R": R}
    return merge("ExcessSuite", certs, tolerance=tol, model=model.name, params=params, extras=extras)


def _hyperbolic_ladder_model(n, lam):
    return build_model(ModelSpec("Hyperbolic", n, lam=lam, curvature=-lam / (n - 1)))


def excess_configuration(model, D, target_e):
    """x = O and q+- at distance D, tilted symmetrically so that e(O) = target_e."""
    sf = space_form_of(model)

    def e_of(phi):
        return 2.0 * D - float(sf.third_side(D, D, math.cos(math.pi - 2.0 * phi)))

    phi = 0.0 if target_e <= 0 else brentq(lambda v: e_of(v) - target_e, 0.0, math.pi / 2 - 1e-9, xtol=1e-15)
    n = model.n
    up = np.zeros(n)
    um = np.zeros(n)
    up[0], um[0] = math.cos(phi), -math.cos(phi)
    up[1] = um[1] = math.sin(phi)
    return model.point_at(D, up), model.point_at(D, um)


def excess_trend(n=3, R=0.1, lam0=1.0, eps0=0.1, factors=(1.0, 0.5, 0.25), tol=DEFAULT_TOL):
    """Shrink lam and eps together along a ladder of hyperbolic models with
    q+- at distance lam^(-1/2); sup e / R must not increase.

    The ratios between consecutive levels are reported; they are not
    required to reach 1/2 (in flat space sup e / R scales like sqrt(lam)).
    """
    rows, ratios = [], []
    prev = None
    for c in factors:
        lam, eps = lam0 * c, eps0 * c
        model = _hyperbolic_ladder_model(n, lam)
        D = 1.0 / math.sqrt(lam)
        qp, qm = excess_configuration(model, D, eps * R)
        cert = excess_suite(model, None, qp, qm, R)
        val = cert.extras["sup_e_over_R"]
        rows.append((c, val))
        if prev is not None:
            ratios.append(val / prev)
        prev = val
    certs = [single("ExcessTrend", b[1], a[1], label=f"{a[0]:g}->{b[0]:g}") for a, b in zip(rows, rows[1:])]
    return merge("ExcessTrend", certs, tolerance=tol, model=f"Hyperbolic n={n}",
                 params={"R": R, "lam0": lam0, "eps0": eps0},
                 extras={"sup_e_over_R": [v for _, v in rows], "ratios": ratios,
                         "halves": [r <= 0.5 for r in ratios]})


# ---------------------------------------------------------------------------
# harmonic approximation (surfaces)


def conformal_radius(model, s, R):
    """P(s) = exp(-int_s^R dt/f(t)); ds^2 + f^2 dtheta^2 = (f/P)^2 (dP^2 + P^2 dtheta^2)."""
    s = np.asarray(s, dtype=float)
    k = model.base_curvature
    if k is None:
        raise UnsupportedKind(f"{model.kind} has no closed form conformal radius")
    if k == 0:
        return s / R
    a = math.sqrt(abs(k))
    if k > 0:
        return np.tan(a * s / 2.0) / math.tan(a * R / 2.0)
    return np.tanh(a * s / 2.0) / math.tanh(a * R / 2.0)


@dataclass
class HarmonicFit:
    """Harmonic extension h of boundary data b on a geodesic disk and the
    three measured quantities: sup |h - b| / R, mean |grad(b - h)|^2 over
    B(x,R), and R^2 times mean |Hess h|^2 over B(x,R/2)."""

    R: float
    sup_diff: float
    grad_energy: float
    hessian: float
    h: np.ndarray
    b: np.ndarray
    s: np.ndarray
    theta: np.ndarray

    @property
    def triple(self):
        return (self.sup_diff, self.grad_energy, self.hessian)


def _modes(coef, k, P):
    """Inverse FFT of coef * P^|k| along the last axis for each radius."""
    return np.real(np.fft.ifft(coef[None, :] * P[:, None] ** np.abs(k)[None, :], axis=1)) * coef.size


def harmonic_fit(model, R, b, grad_b, n_theta=128, n_radial=48):
    """Dirichlet problem Delta h = 0 in B(O', R), h = b on the boundary, on a
    constant curvature surface, solved exactly mode by mode in the
    conformal radius.  b(s, theta) and grad_b(s, theta) -> (b_s, b_theta)
    are given in polar coordinates about the center."""
    if model.n != 2:
        raise UnsupportedDimension("harmonic approximation is implemented for surfaces")
    th = 2.0 * math.pi * np.arange(n_theta) / n_theta
    k = np.fft.fftfreq(n_theta, 1.0 / n_theta)
    coef = np.fft.fft(b(np.full(n_theta, R), th)) / n_theta

    def fields(s):
        S = s[:, None] * np.ones_like(th)[None, :]
        T = np.ones_like(s)[:, None] * th[None, :]
        P = conformal_radius(model, s, R)
        f, df = model.f(s)[:, None], model.df(s)[:, None]
        ak = np.abs(k)
        ik = 1j * k
        ik[np.abs(k) == n_theta // 2] = 0.0
        h = _modes(coef, k, P)
        h_s = _modes(coef * ak, k, P) / f
        h_t = _modes(coef * ik, k, P)
        h_ss = np.real(np.fft.ifft(coef[None, :] * ak * (ak - df) * P[:, None] ** ak, axis=1)) * n_theta / f**2
        h_st = _modes(coef * ik * ak, k, P) / f
        h_tt = _modes(-coef * k * k, k, P)
        H_ss = h_ss
        H_tt = h_tt / f**2 + df * h_s / f
        H_st = h_st / f - df * h_t / f**2
        hess2 = H_ss**2 + 2.0 * H_st**2 + H_tt**2
        bb = b(S, T)
        b_s, b_t = grad_b(S, T)
        diff2 = (b_s - h_s) ** 2 + ((b_t - h_t) / f) ** 2
        return h, bb, diff2, hess2, f

    g, gw = np.polynomial.legendre.leggauss(n_radial)
    s1 = (g + 1.0) * R / 2.0
    h, bb, diff2, _, f1 = fields(s1)
    w1 = (gw * R / 2.0)[:, None] * f1
    energy = float(np.sum(w1 * diff2) / np.sum(w1 * np.ones_like(diff2)))
    s2 = (g + 1.0) * R / 4.0
    _, _, _, hess2, f2 = fields(s2)
    w2 = (gw * R / 4.0)[:, None] * f2
    hess = float(R * R * np.sum(w2 * hess2) / np.sum(w2 * np.ones_like(hess2)))
    sup = float(np.max(np.abs(h - bb))) / R
    return HarmonicFit(R, sup, energy, hess, h, bb, s1, th)


def _distance_data(model, D, theta_q):
    """b(s, theta) = d(y, q) - D and its polar gradient for q at distance D
    in direction theta_q."""
    sf = space_form_of(model)

    def b(s, th):
        return sf.third_side(D, s, np.cos(th - theta_q)) - D

    def grad_b(s, th):
        t = sf.third_side(D, s, np.cos(th - theta_q))
        c = sf.angle_cosine(D, s, t)
        # moving away from the direction of q increases the distance
        side = np.sign(np.sin(th - theta_q))
        return c, model.f(s) * np.sqrt(np.maximum(1.0 - c * c, 0.0)) * side

    return b, grad_b


def harmonic_approximation(model, x, R, q_plus, q_minus, n_theta=128, n_radial=48, tol=DEFAULT_TOL):
    """Harmonic replacements h+- of b+- on B(x, R) for a surface.

    Rows are the maximum principle facts the replacements must satisfy:
    boundary values bracket h, and h+ + h- >= -e(x).  The measured triple
    (sup|h-b|/R, mean |grad(b-h)|^2, R^2 mean_{R/2} |Hess h|^2) goes to extras.
    """
    if model.n != 2:
        raise UnsupportedDimension("harmonic approximation is implemented for surfaces")
    sf, x, qp, qm, dp, dm, L, cg = _triangle(model, x, q_plus, q_minus)
    if min(dp, dm) <= R:
        raise EndpointsTooClose("q+- must lie outside B(x, R)")
    gam = math.acos(max(-1.0, min(1.0, cg)))
    fits = {}
    for name, D, tq in (("plus", dp, 0.0), ("minus", dm, gam)):
        b, gb = _distance_data(model, D, tq)
        fits[name] = harmonic_fit(model, R, b, gb, n_theta, n_radial)
    e_x = dp + dm - L
    hp, hm = fits["plus"], fits["minus"]
    certs = []
    for (name, fit), D in zip(fits.items(), (dp, dm)):
        hi = _boundary_extreme(model, R, D, max)
        lo = _boundary_extreme(model, R, D, min)
        certs.append(single("HarmonicMaxPrinciple", float(fit.h.max()), hi, label=f"{name}_max"))
        certs.append(single("HarmonicMaxPrinciple", -float(fit.h.min()), -lo, label=f"{name}_min"))
    certs.append(single("HarmonicSum", -float(np.min(hp.h + hm.h)), e_x, label="sum_lower"))
    extras = {
        "triple_plus": list(hp.triple), "triple_minus": list(hm.triple),
        "sup_diff": max(hp.sup_diff, hm.sup_diff),
        "grad_energy": max(hp.grad_energy, hm.grad_energy),
        "hessian": max(hp.hessian, hm.hessian),
        "e_x": e_x,
    }
    return merge("HarmonicApproximation", certs, tolerance=tol, model=model.name,
                 params={**model.params(), "R": R}, extras=extras)


def _boundary_extreme(model, R, D, which):
    """Extreme of b = d(., q) - D over the circle of radius R (attained
    towards and away from q)."""
    sf = space_form_of(model)
    return which(float(sf.third_side(D, R, 1.0)) - D, float(sf.third_side(D, R, -1.0)) - D)


def harmonic_trend(lams=(1.0, 0.1, 0.01), R=0.1, tol=DEFAULT_TOL, **kw):
    """Hyperbolic surfaces with curvature -lam and q+- at distance
    lam^(-1/2) on opposite sides of x = O; each measured quantity must not
    increase along the ladder."""
    vals = []
    for lam in lams:
        model = _hyperbolic_ladder_model(2, lam)
        D = 1.0 / math.sqrt(lam)
        qp = model.point_at(D, np.array([1.0, 0.0]))
        qm = model.point_at(D, np.array([-1.0, 0.0]))
        cert = harmonic_approximation(model, None, R, qp, qm, **kw)
        vals.append((lam, cert.extras["sup_diff"], cert.extras["grad_energy"], cert.extras["hessian"]))
    certs = []
    names = ("sup_diff", "grad_energy", "hessian")
    for a, b in zip(vals, vals[1:]):
        for j, nm in enumerate(names, start=1):
            certs.append(single("HarmonicTrend", b[j], a[j], label=f"{nm}:{a[0]:g}->{b[0]:g}"))
    return merge("HarmonicTrend", certs, tolerance=tol, model="Hyperbolic n=2", params={"R": R, "lams": list(lams)},
                 extras={"ladder": [dict(zip(("lam",) + names, v)) for v in vals]})


# ---------------------------------------------------------------------------
# splitting maps


@dataclass
class CoordinateMap:
    """Map h: chart -> R^k with exact first and second coordinate partials."""

    name: str
    k: int
    value: object
    grad: object
    hess: object


def coordinate_map(n, scale=1.0, indices=None):
    """h_i = scale * x_i for the chosen chart coordinates."""
    idx = list(range(n)) if indices is None else list(indices)
    E = np.eye(n)[idx] * scale

    def value(x):
        return np.asarray(x, dtype=float)[..., idx] * scale

    def grad(x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(E, x.shape[:-1] + E.shape).copy()

    def hess(x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape[:-1] + (len(idx), n, n))

    return CoordinateMap(f"{scale:g}*x{idx}", len(idx), value, grad, hess)


CONDITIONS = ("harmonic", "gradient", "orthogonality", "hessian")


@dataclass
class SplittingReport:
    """Values of the four splitting conditions on B(x, r).

    harmonic: r sup |Delta h_i|; gradient: sup |grad h_i| - 1 (clipped at 0);
    orthogonality: sqrt(max_ij mean |<grad h_i, grad h_j> - delta_ij|^2);
    hessian: sqrt(max_i r^2 mean |Hess h_i|^2).  All means use the same
    polar quadrature; sups are taken over its nodes.
    """

    map_name: str
    radius: float
    values: dict
    epsilon_achieved: float
    binding: str
    raw: dict = field(default_factory=dict)

    def certificate(self, eps, tol=DEFAULT_TOL, model=""):
        return BoundCertificate("SplittingMap", list(CONDITIONS), [self.values[c] for c in CONDITIONS],
                                [eps] * 4, tolerance=tol, model=model,
                                params={"r": self.radius, "map": self.map_name}, extras=self.raw)


def splitting_report(model, x, r, h, n_radial=12, n_angular=8):
    nodes = polar_nodes(model, x, r, n_radial, n_angular)
    pts = nodes.points
    N = pts.shape[0]
    g = model.metric(pts)
    ginv = np.linalg.inv(g)
    Gam = np.stack([christoffel(model, p) for p in pts])
    G = h.grad(pts)
    H = h.hess(pts) - np.einsum("Ncab,Nkc->Nkab", Gam, G)
    lap = np.einsum("Nab,Nkab->Nk", ginv, H)
    gram = np.einsum("Nka,Nab,Nlb->Nkl", G, ginv, G)
    hess2 = np.einsum("Nac,Nbd,Nkab,Nkcd->Nk", ginv, ginv, H, H)
    hess1 = np.sqrt(np.maximum(hess2, 0.0))
    w = nodes.weights / math.fsum(nodes.weights)
    eye = np.eye(h.k)
    ortho = np.einsum("N,Nkl->kl", w, (gram - eye[None]) ** 2)
    gnorm = np.sqrt(np.einsum("Nkk->Nk", gram))
    values = {
        "harmonic": r * float(np.max(np.abs(lap))),
        "gradient": max(float(np.max(gnorm)) - 1.0, 0.0),
        "orthogonality": math.sqrt(float(ortho.max())),
        "hessian": math.sqrt(r * r * float(np.max(w @ hess2))),
    }
    binding = max(CONDITIONS, key=lambda c: values[c])
    lam = model.spec.lam
    raw = {
        "sup_grad": float(np.max(gnorm)),
        "mean_ortho_sq": float(ortho.max()),
        "r2_mean_hess_sq": r * r * float(np.max(w @ hess2)),
        "r2_mean_hess": r * r * float(np.max(w @ hess1)),
        "n_nodes": N,
        "probe_scale": 1.0 / lam if lam > 0 else LQ_PROBE_SCALE,
    }
    return SplittingReport(h.name, r, values, values[binding], binding, raw)


def splitting_trend(model, x, radii, h, tol=DEFAULT_TOL):
    """epsilon_achieved must not increase as the radius shrinks."""
    reps = [splitting_report(model, x, r, h) for r in radii]
    certs = [single("SplittingTrend", b.epsilon_achieved, a.epsilon_achieved, label=f"{a.radius:g}->{b.radius:g}")
             for a, b in zip(reps, reps[1:])]
    ratios = [a.epsilon_achieved / b.epsilon_achieved if b.epsilon_achieved > 0 else math.inf
              for a, b in zip(reps, reps[1:])]
    return merge("SplittingTrend", certs, tolerance=tol, model=model.name, params={"radii": list(radii), "map": h.name},
                 extras={"epsilon": [r.epsilon_achieved for r in reps], "ratios": ratios,
                         "binding": [r.binding for r in reps]})


# ---------------------------------------------------------------------------
# cone rigidity


def _ball_volume(model, r):
    g, gw = np.polynomial.legendre.leggauss(64)
    s = (g + 1.0) * r / 2.0
    return float(unit_sphere_area(model.n) * np.sum(gw * model.f(s) ** (model.n - 1)) * r / 2.0)


def _area(model, r):
    return float(unit_sphere_area(model.n) * model.f(r) ** (model.n - 1))


def _euc_ball(n, r):
    return unit_sphere_area(n) * r**n / n


def _euc_area(n, r):
    return unit_sphere_area(n) * r ** (n - 1)


def volume_condition_delta(model, R):
    """delta with (1 - delta) vol B(x,R) = (R/n) vol dB(x,R)."""
    return 1.0 - (R / model.n) * _area(model, R) / _ball_volume(model, R)


def volume_element_psi(model, R, n_grid=2000):
    """Smallest Psi >= 0 with w(u)/u^(n-1) <= (1+Psi) w(s)/s^(n-1) for 0 < s < u <= R."""
    n = model.n
    s = np.linspace(R / n_grid, R, n_grid)
    ratio = (model.f(s) / s) ** (n - 1)
    lower = np.minimum.accumulate(np.concatenate([[1.0], ratio]))[:-1]
    return max(float(np.max(ratio / lower)) - 1.0, 0.0)


def annulus_rows(model, r, eta, psi):
    """The two annulus comparisons at radius r with ratio eta."""
    n = model.n
    ann = _ball_volume(model, r) - _ball_volume(model, eta * r)
    ann_e = _euc_ball(n, r) - _euc_ball(n, eta * r)
    outer = _area(model, r) / _euc_area(n, r)
    inner = _area(model, eta * r) / _euc_area(n, eta * r)
    return [
        single("ConeComparison", outer, (1.0 + psi) * ann / ann_e, label=f"comp1 eta={eta:g}"),
        single("ConeComparison", ann / ann_e, (1.0 + psi) * inner, label=f"comp2 eta={eta:g}"),
    ]


def lemma_row(model, R, eta, psi):
    """Volume ratio hypothesis delta' and the resulting conclusion at (1-eta)R."""
    n = model.n
    half = _ball_volume(model, R / 2) / _euc_ball(n, R / 2)
    full = _ball_volume(model, R) / _euc_ball(n, R)
    dprime = max(1.0 - full / half, 0.0)
    rho = (1.0 - eta) * R
    frac = _euc_ball(n, rho) / (_euc_ball(n, R) - _euc_ball(n, rho))
    delta = dprime + (2.0**n * psi * (1.0 + psi) + dprime) * frac
    lhs = (1.0 - delta) * _ball_volume(model, rho) / _euc_ball(n, rho)
    rhs = (1.0 + psi) * _area(model, rho) / _euc_area(n, rho)
    return single("ConeLemma", lhs, rhs, label=f"lemma eta={eta:g}"), {"eta": eta, "delta_prime": dprime, "delta": delta}


def _directions(n, m, seed=0):
    if n == 2:
        t = 2.0 * math.pi * np.arange(m) / m
        return np.stack([np.cos(t), np.sin(t)], axis=1)
    if n == 3:
        i = np.arange(m) + 0.5
        z = 1.0 - 2.0 * i / m
        ph = math.pi * (1.0 + math.sqrt(5.0)) * i
        rr = np.sqrt(1.0 - z * z)
        return np.stack([rr * np.cos(ph), rr * np.sin(ph), z], axis=1)
    v = np.random.Generator(np.random.Philox(seed)).standard_normal((m, n))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def cone_comparison(model, R, n_radii=6, n_dirs=None, seed=0, restarts=20, n_mesh=4000):
    """GH distance between a polar sample of B(x, R) and the truncated cone
    over the rescaled distance sphere Z = (2/R) dB(x, R/2) on the same grid.

    Returns a dict with the identity and searched upper bounds, the lower
    bound and the sampling mesh of the ball sample.
    """
    if not model.is_space_form:
        raise UnsupportedKind("cone comparison needs closed form distances")
    sf = SpaceForm(model.base_curvature, model.n)
    n = model.n
    m = n_dirs or {2: 16, 3: 24}.get(n, 32)
    dirs = _directions(n, m, seed)
    radii = R * np.arange(1, n_radii + 1) / n_radii
    cosang = np.clip(dirs @ dirs.T, -1.0, 1.0)
    ang = np.arccos(cosang)
    np.fill_diagonal(ang, 0.0)
    Z = FiniteMetricSpace(list(range(m)), (2.0 / R) * float(model.f(R / 2.0)) * ang).validate()
    cone = cone_space(Z, radii)
    S = np.repeat(radii, m)
    idx = np.tile(np.arange(m), n_radii)
    Db = sf.third_side(S[:, None], S[None, :], cosang[np.ix_(idx, idx)])
    Db = 0.5 * (Db + Db.T)
    np.fill_diagonal(Db, 0.0)
    ball = FiniteMetricSpace(list(zip(S.tolist(), idx.tolist())), Db).validate()
    ident = identity_distortion(ball, cone)
    upper, _ = gh_search(ball, cone, restarts=restarts, seed=seed, initial=list(range(ball.size)))
    upper = min(upper, ident)
    # covering radius of the ball sample
    rng = np.random.Generator(np.random.Philox(seed))
    rs, rd = Region(None, R).sample_polar(model, n_mesh, rng)
    Dm = sf.third_side(rs[:, None], S[None, :], rd @ dirs[idx].T)
    mesh = float(Dm.min(axis=1).max())
    return {
        "identity": ident,
        "upper": upper,
        "lower": gh_lower_bound(ball, cone),
        "mesh": mesh,
        "diam_Z": Z.diameter,
        "n_points": ball.size,
    }


def cone_rigidity_suite(model, x=None, R=0.5, delta_probe=None, etas=(0.1, 0.25, 0.5), ladder=None,
                        n_radii=6, n_dirs=None, seed=0, restarts=20, tol=DEFAULT_TOL):
    """Volume condition, annulus comparisons, the volume ratio lemma and
    the GH distance to the cone over the rescaled distance sphere.

    ``ladder`` is an optional sequence of radii; along it |delta| and the GH
    upper bound must not increase.  Without ``delta_probe`` the volume
    condition is tested at the measured delta (clipped at 0).
    """
    _check_polar(model, x)
    if not model.is_space_form and not _is_origin(x):
        raise UnsupportedKind("off-center cone diagnostics need a constant curvature model")
    delta = volume_condition_delta(model, R)
    probe = max(delta, 0.0) if delta_probe is None else delta_probe
    vol, area = _ball_volume(model, R), _area(model, R)
    psi = volume_element_psi(model, R)
    certs = [single("ConeVolumeCondition", (1.0 - probe) * vol, (R / model.n) * area, label=f"delta={probe:.6g}")]
    lemma = []
    for eta in etas:
        certs.extend(annulus_rows(model, R, eta, psi))
        row, info = lemma_row(model, R, eta, psi)
        certs.append(row)
        lemma.append(info)
    gh = cone_comparison(model, R, n_radii, n_dirs, seed, restarts)
    certs.append(single("ConeGH", gh["upper"], 2.0 * gh["mesh"], label="gh<=2mesh"))
    trend = []
    if ladder:
        prev = None
        for r in ladder:
            d = abs(volume_condition_delta(model, r))
            g = cone_comparison(model, r, n_radii, n_dirs, seed, restarts)["upper"]
            trend.append({"R": r, "abs_delta": d, "gh": g})
            if prev is not None:
                certs.append(single("ConeTrend", d, prev["abs_delta"], label=f"delta {prev['R']:g}->{r:g}"))
                certs.append(single("ConeTrend", g, prev["gh"], label=f"gh {prev['R']:g}->{r:g}"))
            prev = trend[-1]
    extras = {"delta": delta, "psi": psi, "lemma": lemma, "gh": gh, "trend": trend}
    return merge("ConeRigidity", certs, tolerance=tol, model=model.name, params={**model.params(), "R": R},
                 extras=extras)


def volume_gh_trend(kind="Hyperbolic", n=2, R=0.5, curvatures=(1.0, 0.25, 0.0625), n_radii=6, n_dirs=None,
                    tol=DEFAULT_TOL):
    """Volume pinching against GH closeness to the Euclidean ball along a
    ladder of space forms whose curvature shrinks to 0.

    For each level: eps = |1 - vol B / vol B_euc| and the distortion of the
    polar-grid identity correspondence with the flat ball of radius R.
    Both must decrease together.
    """
    sign = -1.0 if kind == "Hyperbolic" else 1.0
    flat = SpaceForm(0.0, n)
    m = n_dirs or {2: 16, 3: 24}.get(n, 32)
    dirs = _directions(n, m)
    radii = R * np.arange(1, n_radii + 1) / n_radii
    S = np.repeat(radii, m)
    idx = np.tile(np.arange(m), n_radii)
    cosang = np.clip(dirs @ dirs.T, -1.0, 1.0)[np.ix_(idx, idx)]
    De = flat.third_side(S[:, None], S[None, :], cosang)
    rows = []
    for c in curvatures:
        model = build_model(ModelSpec(kind, n, curvature=sign * c))
        eps = abs(1.0 - _ball_volume(model, R) / _euc_ball(n, R))
        Dm = SpaceForm(sign * c, n).third_side(S[:, None], S[None, :], cosang)
        rows.append((c, eps, 0.5 * float(np.max(np.abs(Dm - De)))))
    certs = []
    for a, b in zip(rows, rows[1:]):
        certs.append(single("VolumeGHTrend", b[1], a[1], label=f"eps {a[0]:g}->{b[0]:g}"))
        certs.append(single("VolumeGHTrend", b[2], a[2], label=f"gh {a[0]:g}->{b[0]:g}"))
    return merge("VolumeGHTrend", certs, tolerance=tol, model=f"{kind} n={n}", params={"R": R},
                 extras={"ladder": [{"curvature": c, "eps": e, "gh": g} for c, e, g in rows]})
