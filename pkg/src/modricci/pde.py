"""Radial heat and Poisson solvers and the estimates built on them: Gaussian
heat kernel bounds, the heat kernel cut-off function, the Dirichlet Green's
function envelope, interior gradient estimates and the maximum principle.

All solvers work in the geodesic distance s from the center with the radial
Laplacian u'' + m(s) u', m = d/ds log w.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson, solve_bvp
from scipy.interpolate import CubicSpline
from scipy.linalg import solve_banded
from scipy.signal import fftconvolve
from scipy.special import gammaincc, gamma as gamma_fn

from .certificate import BoundCertificate
from .constants import (
    COVER_EPSILON,
    DEFAULT_TOL,
    HEAT_SEED_TIME,
    TOL_MASS,
    c_alpha,
    distance_power_constant,
    moser_constant,
    quintic_step,
    quintic_step_d1,
    quintic_step_d2,
    sphere_area as unit_sphere_area,
)
from .errors import (
    CoverTooLarge,
    DimensionTooLow,
    EquationResidualTooLarge,
    SolverFailure,
    StabilityFailure,
    TruncationTooTight,
    UnsupportedDimension,
    UnsupportedKind,
)


# ---------------------------------------------------------------------------
# closed form kernels


def euclidean_heat_kernel(n, r, t):
    r, t = np.asarray(r, dtype=float), np.asarray(t, dtype=float)
    return (4.0 * np.pi * t) ** (-n / 2.0) * np.exp(-r * r / (4.0 * t))


def hyperbolic3_heat_kernel(r, t):
    """Heat kernel of H^3 with curvature -1."""
    r, t = np.asarray(r, dtype=float), np.asarray(t, dtype=float)
    ratio = np.where(r > 0, r / np.sinh(np.where(r > 0, r, 1.0)), 1.0)
    return (4.0 * np.pi * t) ** -1.5 * ratio * np.exp(-t - r * r / (4.0 * t))


def euclidean_time_integral(n, r, t0):
    """Integral over (0, t0) of the Euclidean kernel at distance r > 0 (n >= 3)."""
    a = n / 2.0 - 1.0
    return gamma_fn(a) * gammaincc(a, r * r / (4.0 * t0)) / (4.0 * np.pi ** (n / 2.0) * r ** (n - 2))


# ---------------------------------------------------------------------------
# Crank-Nicolson stepping for u_t = (P + Q/t) u with tridiagonal P, Q


def _time_nodes(t0, t_end, snapshots, n_steps):
    base = t0 * (t_end / t0) ** (np.arange(n_steps + 1) / n_steps)
    nodes = np.union1d(base, np.asarray(snapshots, dtype=float))
    return nodes[(nodes >= t0) & (nodes <= t_end)]


def _apply(band, u):
    lo, di, up = band
    out = di * u
    out[1:] += lo[1:] * u[:-1]
    out[:-1] += up[:-1] * u[1:]
    return out


def _combine(P, Q, t):
    if Q is None:
        return P
    return tuple(p + q / t for p, q in zip(P, Q))


def _cn_march(u, P, Q, nodes, snapshots, rannacher=2, integrate=False):
    """March u from nodes[0] to nodes[-1]; returns {t: u} at the snapshot
    times and optionally the time integral of u (trapezoid rule)."""
    want = {float(t) for t in snapshots}
    out = {}
    total = np.zeros_like(u) if integrate else None
    J = u.size

    def step(u, t_from, t_to, theta):
        dt = t_to - t_from
        A = _combine(P, Q, t_to)
        rhs = u.copy()
        if theta < 1.0:
            rhs = u + (1.0 - theta) * dt * _apply(_combine(P, Q, t_from), u)
        ab = np.zeros((3, J))
        ab[0, 1:] = -theta * dt * A[2][:-1]
        ab[1] = 1.0 - theta * dt * A[1]
        ab[2, :-1] = -theta * dt * A[0][1:]
        return solve_banded((1, 1), ab, rhs)

    if float(nodes[0]) in want:
        out[float(nodes[0])] = u.copy()
    for k in range(len(nodes) - 1):
        t_a, t_b = float(nodes[k]), float(nodes[k + 1])
        u_prev = u
        if k < rannacher:
            # two implicit Euler half steps damp the seed's stiff modes
            t_m = 0.5 * (t_a + t_b)
            u = step(step(u, t_a, t_m, 1.0), t_m, t_b, 1.0)
        else:
            u = step(u, t_a, t_b, 0.5)
        if not np.all(np.isfinite(u)):
            raise StabilityFailure(f"non finite values at t={t_b:g}")
        if integrate:
            total += 0.5 * (t_b - t_a) * (u_prev + u)
        if t_b in want:
            out[t_b] = u.copy()
    return out, total


def _radial_operator(m, h, n, end="neumann"):
    """Tridiagonal (lower, diag, upper) of u'' + m u' on s_j = j h.

    At s = 0 the operator has the limit n u''(0).  ``end`` sets the last row:
    "neumann" (mirror), "dirichlet" (u = 0) or "outflow" (no diffusion).
    """
    J = m.size
    lo, di, up = np.zeros(J), np.zeros(J), np.zeros(J)
    lo[1:-1] = 1.0 / h**2 - m[1:-1] / (2 * h)
    di[1:-1] = -2.0 / h**2
    up[1:-1] = 1.0 / h**2 + m[1:-1] / (2 * h)
    di[0], up[0] = -2.0 * n / h**2, 2.0 * n / h**2
    if end == "neumann":
        lo[-1], di[-1] = 2.0 * n / h**2, -2.0 * n / h**2
    elif end == "outflow":
        lo[-1] = di[-1] = 0.0
    return lo, di, up


# ---------------------------------------------------------------------------
# heat kernel


@dataclass
class HeatKernelGrid:
    """Radial heat kernel G(s, t) about ``center`` with its derivatives."""

    center: tuple
    t_grid: np.ndarray
    r_grid: np.ndarray
    G: np.ndarray
    dG: np.ndarray
    dtG: np.ndarray
    mass: np.ndarray
    n: int
    model: str = ""
    extras: dict = field(default_factory=dict)

    def at(self, t):
        i = int(np.argmin(np.abs(self.t_grid - t)))
        return CubicSpline(self.r_grid, self.G[i])

    def to_csv(self):
        lines = ["r,t,G"]
        for i, t in enumerate(self.t_grid):
            for r, g in zip(self.r_grid, self.G[i]):
                lines.append(f"{r:.10g},{t:.10g},{g:.17g}")
        return "\n".join(lines) + "\n"


def _mean_curvature_grid(model, s):
    m = np.zeros_like(s)
    m[1:] = model.mean_curvature(s[1:])
    return m


def heat_kernel_radial(model, center=None, t_max=1.0, t_grid=None, r_out=2.0, h=None, n_steps=1500,
                       C4=4.0, r0=0.0, t0=HEAT_SEED_TIME, tol_mass=TOL_MASS):
    """Heat kernel G(s, t; center, 0) on a radial grid.

    Complete models are solved for u = G / E with E the Euclidean Gaussian of
    the same dimension, which is smooth and of order one even where G is
    exponentially small; the far end is truncated at
    max(6 sqrt(t_max) C4, 3 r0) with an outflow condition.  Compact models are
    solved for G directly on [0, diameter] with mirror conditions at both poles.
    """
    n = model.n
    if center is not None and np.linalg.norm(center) > 0 and not model.is_space_form:
        raise UnsupportedKind(f"heat kernel of {model.kind} is only radial about O")
    if t_max > 1.0:
        raise StabilityFailure("t_max above 1 is outside the certified range")
    t_grid = np.geomspace(0.01, t_max, 25) if t_grid is None else np.sort(np.asarray(t_grid, dtype=float))
    if t_grid[0] <= t0:
        raise StabilityFailure(f"first output time {t_grid[0]:g} not above the seed time {t0:g}")
    cut = model.cut_radius
    compact = math.isfinite(cut)
    if compact:
        h = min(math.sqrt(t0) / 10.0, cut / 400.0) if h is None else h
        J = int(round(cut / h))
        h = cut / J
    else:
        h = min(0.005, math.sqrt(t_grid[0]) / 20.0) if h is None else h
        r_trunc = max(6.0 * math.sqrt(t_max) * C4, 3.0 * r0, r_out + 1.0)
        J = int(math.ceil(r_trunc / h))
    s = h * np.arange(J + 1)
    m = _mean_curvature_grid(model, s)
    nodes = _time_nodes(t0, t_grid[-1], t_grid, n_steps)

    if compact:
        P = _radial_operator(m, h, n, "neumann")
        G0 = euclidean_heat_kernel(n, s, t0)
        snaps, _ = _cn_march(G0, P, None, nodes, t_grid)
        G_all = np.array([snaps[float(t)] for t in t_grid])
        dG_all = np.gradient(G_all, h, axis=1)
        dtG_all = np.array([_apply(P, g) for g in G_all])
    else:
        # u_t = u'' + (m - s/t) u' + ((n-1) - m s)/(2t) u
        P = _radial_operator(m, h, n, "outflow")
        c0 = np.zeros_like(s)
        c0[1:] = 0.5 * ((n - 1) - m[1:] * s[1:])
        Qlo, Qdi, Qup = np.zeros(J + 1), c0.copy(), np.zeros(J + 1)
        Qlo[1:-1] = s[1:-1] / (2 * h)
        Qup[1:-1] = -s[1:-1] / (2 * h)
        # outflow row: upwind first derivative, drift m - s/t
        P[0][-1] = -m[-1] / h
        P[1][-1] = m[-1] / h
        Qlo[-1] = s[-1] / h
        Qdi[-1] = c0[-1] - s[-1] / h
        Q = (Qlo, Qdi, Qup)
        snaps, _ = _cn_march(np.ones(J + 1), P, Q, nodes, t_grid)
        G_all, dG_all, dtG_all = [], [], []
        for t in t_grid:
            u = snaps[float(t)]
            E = euclidean_heat_kernel(n, s, t)
            du = np.gradient(u, h)
            ut = _apply(_combine(P, Q, t), u)
            G_all.append(E * u)
            dG_all.append(E * (du - s * u / (2.0 * t)))
            dtG_all.append(E * (ut + (-n / (2.0 * t) + s * s / (4.0 * t * t)) * u))
        G_all, dG_all, dtG_all = map(np.array, (G_all, dG_all, dtG_all))

    w = unit_sphere_area(n) * model.volume_element(s)
    mass = np.array([simpson(g * w, x=s) for g in G_all])
    if np.any(G_all < -1e-12 * np.max(np.abs(G_all), axis=1, keepdims=True)):
        raise StabilityFailure("negative heat kernel values")
    if np.any(mass < 1.0 - tol_mass) or np.any(mass > 1.0 + tol_mass):
        raise TruncationTooTight(f"heat kernel mass {mass.min():.6g}..{mass.max():.6g} outside 1 +- {tol_mass:g}")
    keep = s <= r_out + 1e-12
    return HeatKernelGrid(
        center=() if center is None else tuple(map(float, center)),
        t_grid=t_grid,
        r_grid=s[keep],
        G=G_all[:, keep],
        dG=dG_all[:, keep],
        dtG=dtG_all[:, keep],
        mass=mass,
        n=n,
        model=model.name,
        extras={"h": h, "n_nodes": J + 1, "scheme": "direct" if compact else "gaussian-factored",
                "t0": t0, "r_trunc": float(s[-1])},
    )


def semigroup_defect(grid, model, i, j, k):
    """|G(O, t_i + t_j) - int G(., t_i) G(., t_j)| / G(O, t_k) with t_k = t_i + t_j.

    Exact in the limit for kernels whose truncation keeps the mass, using
    G(O, y, t) = G(d(O, y), t).
    """
    ti, tj, tk = grid.t_grid[i], grid.t_grid[j], grid.t_grid[k]
    if abs(ti + tj - tk) > 1e-12 * tk:
        raise ValueError("t_k must equal t_i + t_j")
    s = grid.r_grid
    w = unit_sphere_area(grid.n) * model.volume_element(s)
    conv = simpson(grid.G[i] * grid.G[j] * w, x=s)
    return abs(conv - grid.G[k][0]) / grid.G[k][0]


def _fit_gaussian(x, y):
    """Least squares y ~ a - b x.  Returns (a, b)."""
    A = np.vstack([np.ones_like(x), -x]).T
    (a, b), *_ = np.linalg.lstsq(A, y, rcond=None)
    return a, b


def verify_heat_kernel_bounds(grid, model=None, tol=DEFAULT_TOL, max_rows=None):
    """Fit the two sided Gaussian bounds and the derivative bounds on a grid.

    In the variables y = log(G t^{n/2}) and x = d^2/t a Gaussian bound is a
    line.  The least squares slope b gives C2 = b and C4 = 1/b; the lower and
    upper intercepts are shifted to touch the data, giving C1 and C3.  The
    gradient and time derivative bounds use the decay rate 1/(2 C4) and the
    smallest constant that makes them hold.  Rows are in log form.

    The constants are always fitted on the whole grid; ``max_rows`` only thins
    the reported rows (evenly, keeping every point where a bound is attained).
    """
    n = grid.n
    T, R = np.meshgrid(grid.t_grid, grid.r_grid, indexing="ij")
    ok = grid.G > 0
    x = (R * R / T)[ok]
    y = np.log(grid.G[ok] * T[ok] ** (n / 2.0))
    a, b = _fit_gaussian(x, y)
    finite = b > 0
    C2 = b
    C4 = 1.0 / b if finite else math.inf
    lnC1 = float(np.min(y + b * x))
    lnC3 = float(np.max(y + b * x))
    rate = 1.0 / (2.0 * C4) if finite else 0.0
    gx = np.abs(grid.dG[ok]) * T[ok] ** ((n + 1) / 2.0)
    tx = np.abs(grid.dtG[ok]) * T[ok] ** ((n + 2) / 2.0)
    with np.errstate(divide="ignore"):
        lg = np.log(gx) + rate * x
        lt = np.log(tx) + rate * x
    lnC5 = float(np.max(lg[np.isfinite(lg)]))
    lnC6 = float(np.max(lt[np.isfinite(lt)]))
    samples, lhs, rhs = [], [], []
    Tk, Rk = T[ok], R[ok]
    keep = np.arange(x.size)
    if max_rows is not None and x.size > max_rows:
        fin_g = np.where(np.isfinite(lg), lg, -np.inf)
        fin_t = np.where(np.isfinite(lt), lt, -np.inf)
        binding = [np.argmin(y + b * x), np.argmax(y + b * x), np.argmax(fin_g), np.argmax(fin_t)]
        keep = np.unique(np.r_[np.linspace(0, x.size - 1, max_rows).astype(int), binding])
    for idx in keep:
        lab = {"r": float(Rk[idx]), "t": float(Tk[idx])}
        samples.append({**lab, "bound": "lower"})
        lhs.append(lnC1 - C2 * x[idx])
        rhs.append(y[idx])
        samples.append({**lab, "bound": "upper"})
        lhs.append(y[idx])
        rhs.append(lnC3 - x[idx] / C4 if finite else math.nan)
        if np.isfinite(lg[idx]):
            samples.append({**lab, "bound": "gradient"})
            lhs.append(lg[idx] - rate * x[idx])
            rhs.append(lnC5 - rate * x[idx])
        if np.isfinite(lt[idx]):
            samples.append({**lab, "bound": "time"})
            lhs.append(lt[idx] - rate * x[idx])
            rhs.append(lnC6 - rate * x[idx])
    consts = {"C1": math.exp(lnC1), "C2": C2, "C3": math.exp(lnC3), "C4": C4,
              "C_grad": math.exp(lnC5), "C_time": math.exp(lnC6), "derivative_rate": rate}
    return BoundCertificate("HeatKernelBounds", samples, lhs, rhs, tol, grid.model, {"n": n},
                            {**consts, "finite_positive": bool(finite and all(np.isfinite(list(consts.values()))))})


# ---------------------------------------------------------------------------
# cut-off function from the heat kernel


@dataclass
class CutoffFunction:
    """phi = eta(sum_i psi_i / delta_hat^3) sampled on a square grid."""

    center: tuple
    r0: float
    x: np.ndarray
    phi: np.ndarray
    grad_norm: np.ndarray
    laplacian: np.ndarray
    sup_grad: float
    sup_laplacian: float
    support_radius: float
    plateau_min: float
    constants: dict

    @property
    def empirical_constants(self):
        return {"grad": self.sup_grad * self.r0, "laplacian": self.sup_laplacian * self.r0**2}

    def value_at_distance(self, d):
        """phi at the grid node closest to (d, 0)."""
        i = int(np.argmin(np.abs(self.x - d)))
        j = int(np.argmin(np.abs(self.x)))
        return float(self.phi[i, j])

    def table(self):
        """Sampled values along the first axis: rows (d, phi)."""
        j = int(np.argmin(np.abs(self.x)))
        keep = self.x >= 0
        return np.column_stack([self.x[keep], self.phi[keep, j]])


def bump_profile(model, rho0, C1, C3, C4, n_nodes=800):
    """Single scale bump psi = psi_tilde^3 built from G(., A rho0^2).

    Returns (spline of psi, psi', psi''), delta_hat, A and the support radius.
    """
    n = model.n
    A = 1.0 / (C4 * math.log(2.0 * C3 / C1))
    delta_hat = 0.4 * C1 / ((1.0 + A**-0.5 + 1.0 / A) * C3)
    tc = A * rho0**2
    h = rho0 / n_nodes
    grid = heat_kernel_radial(model, t_max=tc, t_grid=[tc], r_out=1.5 * rho0, h=h,
                              t0=min(HEAT_SEED_TIME, tc / 10.0), C4=C4)
    G = CubicSpline(grid.r_grid, grid.G[0])
    scale = (A * rho0**2) ** (n / 2.0) / ((1.0 + 1.0 / A) * C3)
    floor = 0.6 * C1 * (A * rho0**2) ** (-n / 2.0)

    def parts(d):
        d = np.asarray(d, dtype=float)
        g = G(np.minimum(d, grid.r_grid[-1]))
        on = (g > floor) & (d < grid.r_grid[-1])
        pt = np.where(on, scale * (g - floor), 0.0)
        d1 = np.where(on, scale * G(np.minimum(d, grid.r_grid[-1]), 1), 0.0)
        d2 = np.where(on, scale * G(np.minimum(d, grid.r_grid[-1]), 2), 0.0)
        return pt**3, 3.0 * pt**2 * d1, 6.0 * pt * d1**2 + 3.0 * pt**2 * d2

    s = grid.r_grid
    above = s[G(s) > floor]
    support = float(above[-1]) if above.size else 0.0
    return parts, delta_hat, A, support


def build_cutoff(model, center=None, r0=1.0, constants=None, epsilon=COVER_EPSILON, refine=4, max_balls=5_000_000):
    """Two step heat kernel cut-off on a flat surface.

    Step 1 turns the heat kernel at time A (epsilon r0)^2 into a bump psi with
    psi >= delta_hat^3 on B(p, delta_hat epsilon r0) and support inside
    B(p, epsilon r0).  Step 2 centers copies of psi on a square lattice whose
    cells have circumradius delta_hat epsilon r0 and which covers B(x0, 1.1 r0),
    then clamps with the quintic step.  The grid spacing is lattice / refine so
    every lattice point is a grid node and the sums are exact convolutions.
    """
    if not 0 < r0 <= 5:
        raise ValueError("r0 must lie in (0, 5]")
    if model.base_curvature != 0:
        raise UnsupportedKind("the lattice cover needs a flat metric")
    n = model.n
    if n != 2:
        raise UnsupportedDimension("cut-off sampling is implemented on surfaces (n = 2)")
    if not 0 < epsilon < 0.1:
        raise ValueError("epsilon must lie in (0, 0.1)")
    if constants is None:
        cert = verify_heat_kernel_bounds(heat_kernel_radial(model), model)
        constants = {k: cert.extras[k] for k in ("C1", "C2", "C3", "C4")}
    C1, C3, C4 = constants["C1"], constants["C3"], constants["C4"]
    rho0 = epsilon * r0
    parts, dh, A, psi_support = bump_profile(model, rho0, C1, C3, C4)
    level = dh**3
    a = 2.0 * dh * rho0 / math.sqrt(n)  # square cell with circumradius dh*rho0
    reach = 1.1 * r0 + a * math.sqrt(n) / 2.0
    k_max = int(math.ceil(reach / a))
    idx = np.arange(-k_max, k_max + 1)
    I, J = np.meshgrid(idx, idx, indexing="ij")
    lattice = (a * np.hypot(I, J)) <= reach
    N = int(lattice.sum())
    bound = ((reach + a / 2.0) / (a / 2.0)) ** n  # disjoint a/2 balls inside B(x0, reach + a/2)
    if N > bound or N > max_balls:
        raise CoverTooLarge(f"{N} balls exceed the packing bound {bound:.0f} or the limit {max_balls}")
    h = a / refine
    pad = int(math.ceil((psi_support + 2 * h) / h))
    M = refine * k_max + pad
    x = h * np.arange(-M, M + 1)
    mask = np.zeros((x.size, x.size))
    off = M - refine * k_max
    mask[off:off + refine * (2 * k_max) + 1:refine, off:off + refine * (2 * k_max) + 1:refine] = lattice
    kx = h * np.arange(-pad, pad + 1)
    KX, KY = np.meshgrid(kx, kx, indexing="ij")
    D = np.hypot(KX, KY)
    p0, p1, p2 = parts(D)
    with np.errstate(invalid="ignore", divide="ignore"):
        ux, uy = np.where(D > 0, KX / D, 0.0), np.where(D > 0, KY / D, 0.0)
        lap_k = np.where(D > 0, p2 + (n - 1) * p1 / np.where(D > 0, D, 1.0), n * parts(np.array([0.0]))[2][0])
    S = fftconvolve(mask, p0, mode="same") / level
    Sx = fftconvolve(mask, p1 * ux, mode="same") / level
    Sy = fftconvolve(mask, p1 * uy, mode="same") / level
    SL = fftconvolve(mask, lap_k, mode="same") / level
    # remove round-off of the FFT away from the support
    S = np.where(np.abs(S) < 1e-12, 0.0, S)
    phi = quintic_step(S)
    e1, e2 = quintic_step_d1(S), quintic_step_d2(S)
    grad = e1 * np.hypot(Sx, Sy)
    lap = e2 * (Sx**2 + Sy**2) + e1 * SL
    X, Y = np.meshgrid(x, x, indexing="ij")
    dist = np.hypot(X, Y)
    positive = phi > 0
    support_radius = float(dist[positive].max()) if positive.any() else 0.0
    inner = dist <= 1.1 * r0
    overlap = (2.0 * psi_support / a + 1.0) ** n
    grad_bound = 30.0 / 16.0 * overlap * 3.0 / (level * rho0)
    lap_bound = 5.8 * (overlap * 3.0 / (level * rho0)) ** 2 + 30.0 / 16.0 * overlap * 9.0 / (level * rho0**2)
    consts = {**constants, "A": A, "delta_hat": dh, "epsilon": epsilon, "lattice_spacing": a, "N": N,
              "N_bound": bound, "grid_step": h, "psi_support": psi_support,
              "grad_bound": grad_bound, "laplacian_bound": lap_bound}
    return CutoffFunction(
        center=() if center is None else tuple(map(float, center)), r0=r0, x=x, phi=phi, grad_norm=grad,
        laplacian=lap, sup_grad=float(grad.max()), sup_laplacian=float(np.abs(lap).max()),
        support_radius=support_radius, plateau_min=float(phi[inner].min()), constants=consts,
    )


def verify_cutoff(cut, tol=1e-6):
    """The four cut-off properties as one certificate."""
    r0 = cut.r0
    X, Y = np.meshgrid(cut.x, cut.x, indexing="ij")
    dist = np.hypot(X, Y)
    outside = dist >= 1.9 * r0
    rows = [
        ("range_low", -float(cut.phi.min()), 0.0),
        ("range_high", float(cut.phi.max()), 1.0),
        ("support_radius", cut.support_radius, 1.9 * r0),
        ("outside_value", float(cut.phi[outside].max()) if outside.any() else 0.0, 0.0),
        ("plateau", 1.0 - cut.plateau_min, 0.0),
        ("gradient", cut.sup_grad * r0, cut.constants["grad_bound"]),
        ("laplacian", cut.sup_laplacian * r0**2, cut.constants["laplacian_bound"]),
    ]
    samples = [{"property": p} for p, _, _ in rows]
    return BoundCertificate("CutoffFunction", samples, [l for _, l, _ in rows], [r for _, _, r in rows], tol,
                            "", {"r0": r0}, {**cut.constants, **cut.empirical_constants})


# ---------------------------------------------------------------------------
# Poisson problem and Green's function


@dataclass
class RadialFunction:
    """A radial function sampled on an increasing grid starting at 0."""

    r: np.ndarray
    values: np.ndarray
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        self.r = np.asarray(self.r, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        self._spline = CubicSpline(self.r, self.values)

    def __call__(self, s, nu=0):
        return self._spline(s, nu)

    @classmethod
    def from_callable(cls, g, R, n_grid=401):
        r = np.linspace(0.0, R, n_grid)
        return cls(r, np.array([float(g(v)) for v in r]))


def solve_poisson_radial(model, R, rhs, boundary, center=None, tol=1e-10):
    """Radial f with Delta f = rhs on B(center, R), f = boundary on the sphere.

    Collocation solve of (f, f')' = (f', rhs - m f') with the regular
    singular term -(n-1) f'/s split off so that f'(0) = 0 is built in.
    """
    n = model.n
    if R > model.cut_radius:
        raise SolverFailure("R beyond the cut radius")
    if center is not None and np.linalg.norm(center) > 0 and not model.is_space_form:
        raise UnsupportedKind(f"{model.kind} is radial only about O")
    g = rhs if callable(rhs) else (lambda s, c=float(rhs): c + 0.0 * np.asarray(s))
    Smat = np.array([[0.0, 0.0], [0.0, -(n - 1.0)]])

    def excess(s):
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        pos = s > 0
        out[pos] = model.mean_curvature(s[pos]) - (n - 1.0) / s[pos]
        return out

    def fun(s, y):
        return np.vstack([y[1], g(s) - excess(s) * y[1]])

    def bc(ya, yb):
        return np.array([ya[1], yb[0] - boundary])

    s = np.linspace(0.0, R, 201)
    sol = solve_bvp(fun, bc, s, np.zeros((2, s.size)), S=Smat, tol=tol, max_nodes=200_000)
    if not sol.success:
        raise SolverFailure(sol.message)
    res = float(np.max(sol.rms_residuals))
    if res > 1e-8:
        raise SolverFailure(f"residual {res:g} above 1e-8")
    r = np.linspace(0.0, R, 801)
    out = RadialFunction(r, sol.sol(r)[0], {"residual": res, "nodes": int(sol.x.size)})
    out.derivative = sol.sol(r)[1]
    return out


def poisson_by_quadrature(model, R, rhs, boundary, r):
    """Independent route: f'(s) = w(s)^-1 int_0^s w rhs, f(R) = boundary."""
    from scipy.integrate import quad

    g = rhs if callable(rhs) else (lambda s, c=float(rhs): c)
    w = lambda s: float(model.volume_element(s))

    def df(s):
        if s == 0:
            return 0.0
        return quad(lambda v: w(v) * g(v), 0.0, s, epsabs=0.0, epsrel=1e-12)[0] / w(s)

    return np.array([boundary - quad(df, si, R, epsabs=0.0, epsrel=1e-11)[0] for si in np.atleast_1d(r)])


def green_function_quadrature(model, R, rho):
    """Dirichlet Green's function of B(O, R) with pole at O:
    int_rho^R ds / (|S^{n-1}| w(s))."""
    from scipy.integrate import quad

    S = unit_sphere_area(model.n)
    return np.array([quad(lambda s: 1.0 / (S * float(model.volume_element(s))), p, R,
                          epsabs=0.0, epsrel=1e-12)[0] for p in np.atleast_1d(rho)])


def green_function_heat(model, R, t_end=None, n_steps=2000, h=None, t0=HEAT_SEED_TIME):
    """Green's function of B(O, R) with pole at O by integrating the
    Dirichlet heat kernel in time.

    The part below t0 uses the Euclidean kernel; the part beyond t_end uses a
    single exponential tail whose rate is fitted from the last two snapshots.
    The default t_end = min(1, R^2) stops before the kernel sinks into round-off.
    Returns (s, Gamma, rate).
    """
    n = model.n
    t_end = min(1.0, R * R) if t_end is None else t_end
    if n < 3:
        raise DimensionTooLow("the Green's function envelope needs n >= 3")
    h = min(math.sqrt(t0) / 10.0, R / 1000.0) if h is None else h
    J = int(round(R / h))
    h = R / J
    s = h * np.arange(J + 1)
    m = _mean_curvature_grid(model, s)
    P = _radial_operator(m, h, n, "dirichlet")
    G0 = euclidean_heat_kernel(n, s, t0)
    G0[-1] = 0.0
    t_mid = 0.5 * t_end
    nodes = _time_nodes(t0, t_end, [t_mid, t_end], n_steps)
    snaps, integral = _cn_march(G0, P, None, nodes, [t_mid, t_end], integrate=True)
    g_mid, g_end = snaps[float(t_mid)], snaps[float(t_end)]
    inner = slice(1, J)
    rate = float(np.median(np.log(g_mid[inner] / g_end[inner]) / (t_end - t_mid)))
    if not rate > 0:
        raise SolverFailure("Dirichlet heat kernel is not decaying")
    gam = integral + g_end / rate
    with np.errstate(divide="ignore"):
        gam[1:] += euclidean_time_integral(n, s[1:], t0)
    gam[0] = math.inf
    gam[-1] = 0.0
    return s, gam, rate


def verify_green_bound(model, R=1.0, rho_min=0.05, tol=DEFAULT_TOL):
    """Gamma(O, y) <= C5 d^{2-n} and the resulting lower bound for the
    solution of Delta f = 1, f = R^2/(2n) on the sphere."""
    n = model.n
    if n < 3:
        raise DimensionTooLow("the Green's function envelope needs n >= 3")
    if R > 1.0:
        raise ValueError("R must be at most 1")
    sp = model.spec
    s, gam, rate = green_function_heat(model, R)
    keep = (s >= rho_min * R) & (s < R)
    env = gam[keep] * s[keep] ** (n - 2)
    C5 = float(env.max())
    samples = [{"d": float(v), "bound": "envelope"} for v in s[keep]]
    lhs = list(gam[keep])
    rhs = list(C5 * s[keep] ** (2.0 - n))
    f = solve_poisson_radial(model, R, 1.0, R * R / (2.0 * n))
    Cn = distance_power_constant(n, n - 2.0)
    lower = R * R / (2.0 * n) - C5 * Cn * math.exp(c_alpha(sp.alpha) * sp.K * R ** (1 - sp.alpha) + 4 * sp.lam * R * R) * R * R
    samples.append({"d": 0.0, "bound": "f_lower"})
    lhs.append(lower)
    rhs.append(float(f(0.0)))
    oracle = green_function_quadrature(model, R, s[keep][::20])
    dev = float(np.max(np.abs(gam[keep][::20] / oracle - 1.0)))
    return BoundCertificate("GreenFunctionEnvelope", samples, lhs, rhs, tol, model.name,
                            {**model.params(), "R": R},
                            {"C5": C5, "decay_rate": rate, "f_center": float(f(0.0)),
                             "quadrature_relative_deviation": dev})


# ---------------------------------------------------------------------------
# interior estimates


def _ball_mean(model, r, values_fn, r_grid):
    w = model.volume_element(r_grid)
    return simpson(values_fn * w, x=r_grid) / simpson(w, x=r_grid)


def _laplacian_residual(model, u, f, r):
    n = model.n
    s = np.linspace(0.0, r, 801)
    lap = np.empty_like(s)
    lap[0] = n * u(0.0, 2)
    lap[1:] = u(s[1:], 2) + model.mean_curvature(s[1:]) * u(s[1:], 1)
    return s, lap - f(s)


def _as_radial(g, R):
    if isinstance(g, RadialFunction):
        return g
    if callable(g):
        return RadialFunction.from_callable(g, R)
    return RadialFunction.from_callable(lambda s, c=float(g): c, R)


def verify_gradient_estimate(model, u, f, r, q=None, tol=DEFAULT_TOL, residual_tol=1e-6):
    """sup_{B(r/2)} |grad u|^2 <= C r^-2 [(||u||*_2)^2 + r^4 (||f||*_{2q})^2]
    and sup_{B(r/2)} u^2 <= C [(||u||*_2)^2 + r^4 (||f||*_q)^2] for Delta u = f.

    The r^4 weight makes both sides scale the same way under g -> c^2 g.
    """
    n = model.n
    q = float(n) if q is None else q
    if q <= n / 2.0:
        raise ValueError("q must exceed n/2")
    u, f = _as_radial(u, r), _as_radial(f, r)
    s, res = _laplacian_residual(model, u, f, r)
    if np.max(np.abs(res)) > residual_tol:
        raise EquationResidualTooLarge(f"|Delta u - f| = {np.max(np.abs(res)):g}")
    un2 = _ball_mean(model, r, u(s) ** 2, s)
    f2q = _ball_mean(model, r, np.abs(f(s)) ** (2 * q), s) ** (1.0 / q)
    fq = _ball_mean(model, r, np.abs(f(s)) ** q, s) ** (2.0 / q)
    half = s <= r / 2.0
    grad_sup = float(np.max(u(s[half], 1) ** 2))
    val_sup = float(np.max(u(s[half]) ** 2))
    C = moser_constant(n)
    rg = (un2 + r**4 * f2q) / r**2
    rv = un2 + r**4 * fq
    emp_g = grad_sup / rg if rg > 0 else 0.0
    emp_v = val_sup / rv if rv > 0 else 0.0
    return BoundCertificate("GradientEstimate", [{"form": "gradient"}, {"form": "value"}],
                            [grad_sup, val_sup], [C * rg, C * rv], tol, model.name,
                            {**model.params(), "r": r, "q": q},
                            {"C": C, "empirical_C_gradient": emp_g, "empirical_C_value": emp_v,
                             "u_norm2": math.sqrt(un2), "residual": float(np.max(np.abs(res)))})


def verify_max_principle(model, u, f, r, q=None, tol=DEFAULT_TOL, residual_tol=1e-6):
    """sup_B u <= sup_{dB} u + C(n) r^2 ||f||*_q for Delta u >= f on B(O, r)."""
    n = model.n
    q = float(n) if q is None else q
    if q <= n / 2.0:
        raise ValueError("q must exceed n/2")
    u, f = _as_radial(u, r), _as_radial(f, r)
    s, res = _laplacian_residual(model, u, f, r)
    if np.min(res) < -residual_tol:
        raise EquationResidualTooLarge(f"Delta u - f reaches {np.min(res):g}")
    fq = _ball_mean(model, r, np.abs(f(s)) ** q, s) ** (1.0 / q)
    sup_in = float(np.max(u(s)))
    sup_bd = float(u(r))
    C = moser_constant(n)
    emp = (sup_in - sup_bd) / (r * r * fq) if fq > 0 else 0.0
    return BoundCertificate("MaximumPrinciple", [{"r": r}], [sup_in], [sup_bd + C * r * r * fq], tol,
                            model.name, {**model.params(), "r": r, "q": q}, {"C": C, "empirical_C": emp})


def verify_parabolic_gradient_estimate(model, grid, t, r, tol=DEFAULT_TOL):
    """sup_{Q(r/2)} |grad u|^2 <= C r^-2 (||u||*_{2,Q(r)})^2 for the heat
    kernel u = G on Q(O, t, r) = B(O, r) x [t - r^2, t]."""
    n = grid.n
    ts = grid.t_grid
    slab = (ts >= t - r * r - 1e-12) & (ts <= t + 1e-12)
    half = (ts >= t - r * r / 4.0 - 1e-12) & (ts <= t + 1e-12)
    if slab.sum() < 2 or half.sum() < 1:
        raise ValueError("time grid too coarse for the parabolic cylinder")
    inside = grid.r_grid <= r + 1e-12
    s = grid.r_grid[inside]
    w = model.volume_element(s)
    vol = simpson(w, x=s)
    space = np.array([simpson(grid.G[i, inside] ** 2 * w, x=s) / vol for i in np.where(slab)[0]])
    tt = ts[slab]
    mean = simpson(space, x=tt) / (tt[-1] - tt[0])
    inner = grid.r_grid <= r / 2.0 + 1e-12
    grad_sup = float(np.max(grid.dG[np.ix_(half, inner)] ** 2))
    C = moser_constant(n)
    rhs = mean / r**2
    return BoundCertificate("ParabolicGradientEstimate", [{"t": t, "r": r}], [grad_sup], [C * rhs], tol,
                            grid.model, {"n": n, "t": t, "r": r}, {"C": C, "empirical_C": grad_sup / rhs})
