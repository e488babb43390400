"""Geodesic polar data and the volume/Laplacian comparison certificates.

For a ray from a center x the volume element w(s) satisfies w' = w Delta s.
Around O, and around any point of a constant curvature model, w = f^{n-1}
exactly.  For surfaces the ray and its Jacobi field are integrated
numerically, which also gives profiles around arbitrary centers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad, solve_ivp

from .certificate import BoundCertificate
from .constants import (
    DEFAULT_TOL,
    ODE_RTOL,
    QUAD_ABSTOL,
    c_alpha,
    distance_power_constant,
    soliton_gradient_bound,
    sphere_area as unit_sphere_area,
    unit_ball_volume,
)
from .errors import CutLocusReached, IntegrationFailure, UnsupportedKind
from .geometry import SpaceForm, sphere_measure_weights

COMPARISON_KINDS = (
    "LaplacianComparison",
    "VolumeElementRatio",
    "VolumeElementAbs",
    "VolumeNoninflation",
    "VolumeRatioBound",
    "BoundedVLaplacian",
    "BoundedVRatio",
    "BELaplacian",
    "BEVolumeRatio",
    "SolitonLaplacian",
    "SolitonRatio",
    "Jensen",
)

# LHS / RHS of each kind, in the notation of the module docstrings.
KIND_FORMULAS = {
    "LaplacianComparison": ("Delta s - (n-1)/s", "lam s/3 + <V, grad s> + C(alpha) K s^-alpha"),
    "VolumeElementRatio": ("w(s2)/s2^{n-1}", "exp(C(alpha) K s2^{1-alpha} + lam s2^2) w(s1)/s1^{n-1}"),
    "VolumeElementAbs": ("w(s)", "exp(C(alpha) K s^{1-alpha} + lam s^2) s^{n-1}"),
    "VolumeNoninflation": ("vol B(x,r)", "exp(C(alpha) K r^{1-alpha} + lam r^2) |S^{n-1}|/n r^n"),
    "VolumeRatioBound": ("vol B(r2)/r2^n", "exp(C [lam (r2^2-r1^2) + K (r2-r1)^{1-alpha}]) vol B(r1)/r1^n"),
    "BoundedVLaplacian": ("Delta s - (n-1)/s", "lam s/3 + 2K"),
    "BoundedVRatio": ("vol B(r2)/r2^n", "exp(lam (r2^2-r1^2) + 2K (r2-r1)) vol B(r1)/r1^n"),
    "BELaplacian": ("Delta s - (n-1)/s", "lam s/3 + 4 K1 s^{a-1} + <grad L, grad s>"),
    "BEVolumeRatio": ("vol B(r2)/r2^n", "exp(lam (r2^2-r1^2) + K2 (r2-r1)^{1-beta} + 4 K1 (r2-r1)^a) vol B(r1)/r1^n"),
    "SolitonLaplacian": ("Delta s - (n-1)/s", "|lam| s/3 + 2 Lambda"),
    "SolitonRatio": ("vol B(r2)/r2^n", "exp(|lam| (r2^2-r1^2) + 2 Lambda (r2-r1)) vol B(r1)/r1^n"),
    "Jensen": ("d0^{1-alpha}", "s^{1-alpha} + (d0-s)^{1-alpha}"),
}

_RATIO_KINDS = {"VolumeRatioBound", "BoundedVRatio", "BEVolumeRatio", "SolitonRatio"}
# ratio kinds (and VolumeElementRatio) are certified in log form: log lhs <= log rhs


@dataclass
class RadialProfile:
    center: np.ndarray
    direction: float | None
    s_grid: np.ndarray
    w: np.ndarray
    delta_s: np.ndarray
    cut_radius: float
    n: int
    field_radial: object = None  # s -> <V, grad s> along the ray
    distance_to_origin: object = None  # s -> d(gamma(s), O)
    truncated: bool = False
    extras: dict = field(default_factory=dict)

    def small_radius_ratio(self):
        """w(s)/s^{n-1} at the smallest grid radius."""
        return float(self.w[0] / self.s_grid[0] ** (self.n - 1))

    def psi(self):
        """(Delta s - (n-1)/s)_+ on the grid."""
        return np.maximum(self.delta_s - (self.n - 1) / self.s_grid, 0.0)


# ---------------------------------------------------------------------------
# profiles


def _center_and_d0(model, center):
    if center is None:
        return np.zeros(model.n), 0.0
    c = np.asarray(center, dtype=float)
    return c, float(model.distance_to_origin(c))


def _default_grid(s_max, n_grid):
    return np.geomspace(min(1e-3, s_max / 10.0), s_max, n_grid)


def radial_profile(model, center=None, direction=None, s_max=1.0, n_grid=200, on_cut="raise", s_grid=None):
    """Volume element and Delta s along a ray from ``center``.

    ``direction`` is the angle between the ray and the direction from the
    center towards O (ignored when the center is O).  Past the cut radius
    the profile is either rejected (``on_cut="raise"``) or truncated and
    flagged.
    """
    c, d0 = _center_and_d0(model, center)
    s = np.asarray(s_grid, dtype=float) if s_grid is not None else _default_grid(s_max, n_grid)
    if d0 == 0.0 or model.is_space_form:
        prof = _warped_profile(model, c, d0, direction, s)
    elif model.n == 2:
        prof = jacobi_surface_profile(model, c, 0.0 if direction is None else direction, s)
    else:
        raise UnsupportedKind(f"off-center profiles of {model.kind} need n = 2 (Jacobi path) or a constant curvature model")
    if np.any(prof.s_grid > prof.cut_radius):
        if on_cut == "raise":
            raise CutLocusReached(f"s_max={prof.s_grid[-1]:g} beyond cut radius {prof.cut_radius:g}")
        keep = prof.s_grid < prof.cut_radius
        prof.s_grid, prof.w, prof.delta_s = prof.s_grid[keep], prof.w[keep], prof.delta_s[keep]
        prof.truncated = True
    return prof


def _warped_profile(model, c, d0, direction, s):
    n = model.n
    cut = model.cut_radius
    with np.errstate(invalid="ignore", divide="ignore"):
        w = model.f(s) ** (n - 1)
        ds = (n - 1) * model.df(s) / model.f(s)
    if d0 == 0.0:
        field_radial = (lambda t: model.v_of_s(t)) if model.has_field else (lambda t: 0.0 * np.asarray(t))
        dist = lambda t: np.asarray(t, dtype=float)
        direction = None
    else:
        sf = SpaceForm(model.base_curvature, n)
        cosb = math.cos(0.0 if direction is None else direction)
        dist = lambda t: sf.third_side(d0, t, cosb)

        def field_radial(t):
            t = np.asarray(t, dtype=float)
            if not model.has_field:
                return 0.0 * t
            tau = dist(t)
            return model.v_of_s(tau) * sf.angle_cosine(d0, t, tau)

    return RadialProfile(c, direction, s, w, ds, cut, n, field_radial, dist)


def jacobi_profile(model, s_grid, rtol=ODE_RTOL):
    """Oracle profile around O from J'' = (f''/f) J, J(0)=0, J'(0)=1.

    Returns (w, Delta s, first zero of J).
    """
    s_grid = np.asarray(s_grid, dtype=float)

    def rhs(t, y):
        r2, _ = model.warp.curvature_ratios(max(t, 1e-12))
        return [y[1], float(r2) * y[0]]

    def zero(t, y):
        return y[0]

    zero.terminal = True
    zero.direction = -1
    t0 = 1e-9
    sol = solve_ivp(rhs, (t0, s_grid[-1]), [t0, 1.0], method="RK45", rtol=rtol, atol=1e-14,
                    dense_output=True, events=zero)
    if sol.status == -1:
        raise IntegrationFailure(sol.message)
    cut = float(sol.t_events[0][0]) if len(sol.t_events[0]) else math.inf
    ok = s_grid < cut
    Y = sol.sol(s_grid[ok])
    w = np.full(s_grid.shape, np.nan)
    ds = np.full(s_grid.shape, np.nan)
    w[ok] = Y[0] ** (model.n - 1)
    ds[ok] = (model.n - 1) * Y[1] / Y[0]
    return w, ds, cut


def _surface_ray(model, center, beta, s_end, rtol=ODE_RTOL):
    """Geodesic + Jacobi field from ``center`` on a surface model."""
    from .curvature import christoffel, ricci_eigen

    c = np.asarray(center, dtype=float)
    r = float(np.linalg.norm(c))
    xhat = c / r
    perp = np.array([-xhat[1], xhat[0]])
    u = math.cos(beta) * (-xhat) + math.sin(beta) * perp
    p0 = model.frame(c) @ u

    def rhs(t, y):
        x, p = y[0:2], y[2:4]
        G = christoffel(model, x)
        acc = -np.einsum("kij,i,j->k", G, p, p)
        s0 = float(model.chart.sigma(np.linalg.norm(x)))
        gauss = float(ricci_eigen(model, s0)[0])  # n = 2: Ric = K g
        return [p[0], p[1], acc[0], acc[1], y[5], -gauss * y[4], y[4]]

    def conj(t, y):
        return y[4]

    conj.terminal = True
    conj.direction = -1
    sol = solve_ivp(rhs, (0.0, s_end), [c[0], c[1], p0[0], p0[1], 0.0, 1.0, 0.0], method="RK45",
                    rtol=rtol, atol=1e-12, dense_output=True, events=conj)
    if sol.status == -1:
        raise IntegrationFailure(sol.message)
    cut = float(sol.t_events[0][0]) if len(sol.t_events[0]) and sol.t_events[0][0] > 1e-8 else math.inf
    return sol, cut


def jacobi_surface_profile(model, center, beta, s_grid):
    s_grid = np.asarray(s_grid, dtype=float)
    sol, cut = _surface_ray(model, center, beta, s_grid[-1])
    end = min(s_grid[-1], sol.t[-1])
    ok = s_grid <= end
    Y = sol.sol(s_grid[ok])
    w = np.full(s_grid.shape, np.nan)
    ds = np.full(s_grid.shape, np.nan)
    w[ok] = Y[4]
    ds[ok] = Y[5] / Y[4]

    def state(t):
        return sol.sol(np.clip(np.asarray(t, dtype=float), 0.0, end))

    def field_radial(t):
        Y = state(t)
        x = Y[0:2].T
        p = Y[2:4].T
        if not model.has_field:
            return np.zeros(np.shape(t))
        out = []
        for xi, pi in zip(np.atleast_2d(x), np.atleast_2d(p)):
            out.append(float(model.vector_field(xi) @ model.metric(xi) @ pi))
        return np.asarray(out).reshape(np.shape(t))

    def dist(t):
        Y = state(t)
        return model.distance_to_origin(Y[0:2].T)

    return RadialProfile(np.asarray(center, dtype=float), beta, s_grid, w, ds, cut, 2, field_radial, dist,
                         extras={"integrated_to": float(end)})


# ---------------------------------------------------------------------------
# volumes


def sphere_area(model, center, r):
    """Area of the geodesic sphere of radius r."""
    c, d0 = _center_and_d0(model, center)
    if r > model.cut_radius + 1e-12:
        raise CutLocusReached(f"r={r:g} beyond cut radius {model.cut_radius:g}")
    if d0 == 0.0 or model.is_space_form:
        return float(unit_sphere_area(model.n) * model.f(r) ** (model.n - 1))
    _require_surface(model)
    betas, wts = sphere_measure_weights(2, 24)
    return float(sum(wt * float(_surface_ray(model, c, b, r)[0].sol(r)[4]) for b, wt in zip(betas, wts)))


def ball_volume(model, center, r):
    """Riemannian volume of B(center, r) by adaptive quadrature."""
    c, d0 = _center_and_d0(model, center)
    if r > model.cut_radius + 1e-12:
        raise CutLocusReached(f"r={r:g} beyond cut radius {model.cut_radius:g}")
    n = model.n
    if d0 == 0.0 or model.is_space_form:
        val, _ = quad(lambda s: float(model.f(s)) ** (n - 1), 0.0, r, epsabs=QUAD_ABSTOL * 1e-3, epsrel=1e-12, limit=200)
        return float(unit_sphere_area(n) * val)
    _require_surface(model)
    betas, wts = sphere_measure_weights(2, 24)
    return float(sum(wt * float(_surface_ray(model, c, b, r)[0].y[6, -1]) for b, wt in zip(betas, wts)))


def _require_surface(model):
    if model.n != 2:
        raise UnsupportedKind(f"off-center volumes of {model.kind} are only available for n = 2")


def volume_ratio(model, center, r):
    return ball_volume(model, center, r) / r**model.n


# ---------------------------------------------------------------------------
# constant chain


def noncollapsing_lower_bound(n, lam, K, alpha, rho, r):
    """vol(B(x, r)) >= rho r^n / exp(C(alpha) K + lam) for r <= 1."""
    return rho * r**n / math.exp(c_alpha(alpha) * K + lam)


def lq_chain_constant(n, lam, K, alpha, rho, q):
    """Explicit C_L with sup r^alpha ||V||*_{q,B(x,r)} <= C_L K over r <= 1.

    Case d(x,O) <= 2r: B(x,r) lies in B(O,3r); the distance power integral
    over B(O,3r) with gamma = alpha q is divided by the noncollapsed volume
    of B(x,r).  Case d(x,O) > 2r: |V| <= K r^-alpha pointwise, constant 1.
    """
    g = alpha * q
    if g >= n:
        raise ValueError(f"q must be below n/alpha, got q={q}")
    ca = c_alpha(alpha)
    case1 = (
        distance_power_constant(n, g)
        * 3.0 ** (n - g)
        * math.exp(ca * K * 3.0 ** (1.0 - alpha) + 9.0 * lam)
        * math.exp(ca * K + lam)
        / rho
    )
    return max(1.0, case1 ** (1.0 / q))


def volume_ratio_constant(n, lam, K, alpha, rho):
    """C in vol B(r2)/r2^n <= exp(C [lam (r2^2-r1^2) + K (r2-r1)^{1-alpha}]) vol B(r1)/r1^n.

    dQ/dr <= [lam r/3 + (C(alpha) + C_L) K r^-alpha] Q with C_L the q = 1
    chain constant; integrating and using r2^{1-a} - r1^{1-a} <= (r2-r1)^{1-a}
    gives the two coefficients 1/6 and (C(alpha) + C_L)/(1 - alpha).
    """
    if K == 0:
        return 1.0 / 6.0
    cl = lq_chain_constant(n, lam, K, alpha, rho, 1.0)
    return max(1.0 / 6.0, (c_alpha(alpha) + cl) / (1.0 - alpha))


def _resolve_c(policy, alpha):
    if policy in (None, "explicit"):
        return c_alpha(alpha)
    if isinstance(policy, (int, float)):
        return float(policy)
    raise ValueError(f"unknown C_alpha policy {policy!r}")


# ---------------------------------------------------------------------------
# certificates


def _directions(model, d0, n_dirs):
    if d0 == 0.0:
        return [None]
    return [math.pi * (i + 0.5) / n_dirs for i in range(n_dirs)]


def _params(model, lam, K, alpha, **extra):
    p = {"n": model.n, "lam": lam, "K": K, "alpha": alpha, "rho": model.spec.rho}
    p.update(extra)
    return p


def middle_term(profile, s, K):
    """-(2/s^2) int_0^s t <V, gamma'(t)> dt by quadrature."""
    out = []
    for si in np.atleast_1d(s):
        val, _ = quad(lambda t: t * float(profile.field_radial(t)), 0.0, si, epsabs=1e-13, epsrel=1e-11, limit=200)
        out.append(-2.0 * val / si**2)
    return np.asarray(out)


def _soliton_lambda(model):
    if model.kind not in ("GaussianSoliton", "CigarSoliton"):
        raise UnsupportedKind(f"{model.kind} is not a gradient Ricci soliton")
    s = model.spec
    return soliton_gradient_bound(s.dimension, s.lam, s.K, s.c1)


def verify_comparison(model, kind, center=None, radii=None, C_alpha_policy="explicit", lam=None, K=None,
                      alpha=None, n_dirs=7, tol=DEFAULT_TOL, be=None):
    """Certificate for one comparison kind on a radius grid.

    ``lam``, ``K``, ``alpha`` default to the model's declared constants;
    overriding ``lam`` is how negative controls are built.
    """
    if kind not in COMPARISON_KINDS:
        raise UnsupportedKind(f"unknown comparison kind {kind!r}")
    sp = model.spec
    lam = sp.lam if lam is None else lam
    K = sp.K if K is None else K
    alpha = sp.alpha if alpha is None else alpha
    c, d0 = _center_and_d0(model, center)
    r_top = min(1.0, 0.999 * model.cut_radius)
    if radii is None:
        radii = np.geomspace(1e-3, r_top, 40 if kind not in _RATIO_KINDS | {"VolumeElementRatio"} else 10)
    radii = np.asarray(radii, dtype=float)
    if np.any(radii <= 0) or np.any(radii > r_top + 1e-12):
        raise CutLocusReached(f"radii must lie in (0, {r_top:g}]")
    C = _resolve_c(C_alpha_policy, alpha)
    n = model.n
    extras = {"C_alpha": C, "lhs_formula": KIND_FORMULAS[kind][0], "rhs_formula": KIND_FORMULAS[kind][1]}
    params = _params(model, lam, K, alpha, center=c.tolist())
    samples, lhs, rhs = [], [], []

    if kind == "Jensen":
        d0j = float(radii[-1])
        for s in radii:
            samples.append({"s": float(s), "d0": d0j})
            lhs.append(d0j ** (1.0 - alpha))
            rhs.append(s ** (1.0 - alpha) + max(d0j - s, 0.0) ** (1.0 - alpha))
        return BoundCertificate(kind, samples, lhs, rhs, tol, model.name, params, extras)

    if kind in ("BoundedVLaplacian", "BoundedVRatio") and alpha != 0:
        raise UnsupportedKind(f"{kind} needs a bounded field (alpha = 0)")
    if kind in ("SolitonLaplacian", "SolitonRatio"):
        Lam = _soliton_lambda(model)
        extras["Lambda"] = Lam
        if d0 > 0:
            raise UnsupportedKind("soliton certificates are built around O")
    if kind in ("BELaplacian", "BEVolumeRatio"):
        be = be or model.bakry_emery_condition(q=1.0)
        K2 = be.K2 * lq_chain_constant(n, lam, be.K2, be.beta, sp.rho, be.q) if be.K2 > 0 else 0.0
        extras.update({"K1": be.K1, "a": be.a, "K2": K2, "beta": be.beta})

    if kind in ("LaplacianComparison", "BoundedVLaplacian", "BELaplacian", "SolitonLaplacian",
                "VolumeElementRatio", "VolumeElementAbs"):
        measured = []
        proof_c = []
        for beta in _directions(model, d0, n_dirs):
            prof = radial_profile(model, c if d0 > 0 else None, beta, s_grid=radii)
            s = prof.s_grid
            lap = prof.delta_s - (n - 1) / s
            vr = np.asarray(prof.field_radial(s), dtype=float)
            tag = {} if beta is None else {"direction": beta}
            if kind == "LaplacianComparison":
                base = lam * s / 3.0 + vr
                L, R = lap, base + C * K / s**alpha
                if K > 0:
                    measured.append(np.max((lap - base) * s**alpha / K))
                    proof_c.append(np.max(middle_term(prof, s, K) * s**alpha / K))
            elif kind == "BoundedVLaplacian":
                L, R = lap, lam * s / 3.0 + 2.0 * K
            elif kind == "BELaplacian":
                L, R = lap, lam * s / 3.0 + 4.0 * extras["K1"] / s ** (1.0 - extras["a"]) + vr
            elif kind == "SolitonLaplacian":
                L, R = lap, abs(sp.lam) * s / 3.0 + 2.0 * extras["Lambda"]
            elif kind == "VolumeElementAbs":
                L, R = prof.w, np.exp(C * K * s ** (1.0 - alpha) + lam * s * s) * s ** (n - 1)
            else:  # VolumeElementRatio over all pairs
                q = prof.w / s ** (n - 1)
                for i in range(len(s)):
                    for j in range(i + 1, len(s)):
                        samples.append({"s1": float(s[i]), "s2": float(s[j]), **tag})
                        lhs.append(math.log(q[j]))
                        rhs.append(C * K * s[j] ** (1.0 - alpha) + lam * s[j] ** 2 + math.log(q[i]))
                continue
            for si, li, ri in zip(s, L, R):
                samples.append({"s": float(si), **tag})
                lhs.append(li)
                rhs.append(ri)
        if measured:
            extras["measured_C"] = float(max(measured))
            extras["proof_middle_term_C"] = float(max(proof_c))
        return BoundCertificate(kind, samples, lhs, rhs, tol, model.name, params, extras)

    # volume based kinds
    vols = np.array([ball_volume(model, c if d0 > 0 else None, r) for r in radii])
    if kind == "VolumeNoninflation":
        R = np.exp(C * K * radii ** (1.0 - alpha) + lam * radii**2) * unit_ball_volume(n) * radii**n
        samples = [{"r": float(r)} for r in radii]
        return BoundCertificate(kind, samples, vols, R, tol, model.name, params, extras)

    Q = vols / radii**n
    if kind == "VolumeRatioBound":
        Cv = volume_ratio_constant(n, lam, K, alpha, sp.rho)
        extras["C_volume_ratio"] = Cv
        expo = lambda r1, r2: Cv * (lam * (r2 * r2 - r1 * r1) + K * (r2 - r1) ** (1.0 - alpha))
    elif kind == "BoundedVRatio":
        expo = lambda r1, r2: lam * (r2 * r2 - r1 * r1) + 2.0 * K * (r2 - r1)
    elif kind == "SolitonRatio":
        Lm = extras["Lambda"]
        expo = lambda r1, r2: abs(sp.lam) * (r2 * r2 - r1 * r1) + 2.0 * Lm * (r2 - r1)
    else:  # BEVolumeRatio
        K1, a, K2, beta = extras["K1"], extras["a"], extras["K2"], extras["beta"]
        expo = lambda r1, r2: lam * (r2 * r2 - r1 * r1) + K2 * (r2 - r1) ** (1.0 - beta) + 4.0 * K1 * (r2 - r1) ** a
        derived = lambda r1, r2: (lam * (r2 * r2 - r1 * r1) / 6.0 + K2 / (1.0 - beta) * (r2 - r1) ** (1.0 - beta)
                                  + 4.0 * K1 / a * (r2 - r1) ** a)
        extras["integrated_form_min_margin"] = float(min(
            derived(radii[i], radii[j]) + math.log(Q[i]) - math.log(Q[j])
            for i in range(len(radii)) for j in range(i + 1, len(radii))
        ))
    for i in range(len(radii)):
        for j in range(i + 1, len(radii)):
            samples.append({"r1": float(radii[i]), "r2": float(radii[j])})
            lhs.append(math.log(Q[j]))
            rhs.append(expo(radii[i], radii[j]) + math.log(Q[i]))
    return BoundCertificate(kind, samples, lhs, rhs, tol, model.name, params, extras)


def verify_volume_ratio_monotone(model, center=None, r_grid=None, lam=None, K=None, alpha=None, tol=DEFAULT_TOL):
    """Consecutive-pair volume ratio bound with the explicit constant chain.

    When lam = K = 0 the bound degenerates to monotonicity Q(r2) <= Q(r1).
    Also reports the smallest constant C* making the exponential bound tight.
    """
    sp = model.spec
    lam = sp.lam if lam is None else lam
    K = sp.K if K is None else K
    alpha = sp.alpha if alpha is None else alpha
    if r_grid is None:
        r_grid = np.linspace(0.1, min(1.0, 0.999 * model.cut_radius), 10)
    r = np.asarray(r_grid, dtype=float)
    if np.any(np.diff(r) <= 0) or r[0] <= 0 or r[-1] > 1.0 + 1e-12:
        raise ValueError("r_grid must increase inside (0, 1]")
    c, d0 = _center_and_d0(model, center)
    Q = np.array([volume_ratio(model, c if d0 > 0 else None, ri) for ri in r])
    Cv = volume_ratio_constant(model.n, lam, K, alpha, sp.rho)
    expo = lam * (r[1:] ** 2 - r[:-1] ** 2) + K * (r[1:] - r[:-1]) ** (1.0 - alpha)
    rhs = Cv * expo + np.log(Q[:-1])
    with np.errstate(divide="ignore", invalid="ignore"):
        need = np.where(expo > 0, np.log(Q[1:] / Q[:-1]) / expo, -np.inf)
    c_star = float(np.max(need)) if np.any(expo > 0) else None
    samples = [{"r1": float(a), "r2": float(b)} for a, b in zip(r[:-1], r[1:])]
    extras = {"C_volume_ratio": Cv, "measured_C": c_star, "monotone_case": lam == 0 and K == 0,
              "Q": Q.tolist()}
    return BoundCertificate("VolumeRatioBound", samples, np.log(Q[1:]), rhs, tol, model.name,
                            _params(model, lam, K, alpha, center=c.tolist()), extras)


def verify_jensen(n_samples=10_000, seed=0, tol=1e-12):
    """s^{1-a} + (d0-s)^{1-a} >= d0^{1-a} on random triples with s <= d0."""
    rng = np.random.default_rng(seed)
    d0 = rng.uniform(1e-6, 10.0, n_samples)
    s = rng.uniform(0.0, 1.0, n_samples) * d0
    a = rng.uniform(0.0, 1.0, n_samples) * (1.0 - 1e-9)
    lhs = d0 ** (1.0 - a)
    rhs = s ** (1.0 - a) + (d0 - s) ** (1.0 - a)
    samples = [(float(x), float(y), float(z)) for x, y, z in zip(s, d0, a)]
    return BoundCertificate("Jensen", samples, lhs, rhs, tol, "scalar", {"seed": seed})


def comparison_suite(model, center=None, kinds=None, lam=None):
    """Every applicable comparison kind for ``model``; mismatches are skipped."""
    kinds = kinds or COMPARISON_KINDS
    out = []
    for k in kinds:
        try:
            out.append(verify_comparison(model, k, center=center, lam=lam))
        except UnsupportedKind:
            continue
    return out
