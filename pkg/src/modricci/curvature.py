"""Ricci tensor, Hessian and Lie derivative of the catalog models.

Analytic path: for a warped product the Ricci tensor has eigenvalue
-(n-1) f''/f on the radial direction and -f''/f + (n-2)(1-f'^2)/f^2 on the
sphere directions.  A radial gradient field V = v(s) d/ds has
1/2 L_V g = Hess L with eigenvalues v' (radial) and v f'/f (tangential).

Oracle path: Christoffel symbols and the Ricci tensor rebuilt from central
differences of the metric in the chart, 1/2 L_V g from differences of V,
and Hess L from differences of L.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .certificate import BoundCertificate
from .constants import DEFAULT_TOL
from .errors import SingularEvaluation, StepTooSmall

MIN_STEP = 1e-6
EXACT_FLOOR = 1e-9


@dataclass
class SymTensor2:
    """Symmetric 2-tensor at a point, components in an orthonormal frame."""

    components: np.ndarray
    frame: str = "orthonormal"

    def __post_init__(self):
        c = np.asarray(self.components, dtype=float)
        if np.max(np.abs(c - c.T), initial=0.0) > 1e-12 * max(1.0, np.max(np.abs(c), initial=0.0)):
            raise ValueError("tensor is not symmetric")
        self.components = 0.5 * (c + c.T)

    def eigenvalues(self):
        # symmetric eigensolver (LAPACK) in place of hand rolled Jacobi sweeps
        return np.linalg.eigvalsh(self.components)

    def min_eigenvalue(self):
        return float(self.eigenvalues()[0])

    def conjugate(self, Q):
        return SymTensor2(Q.T @ self.components @ Q, self.frame)


def _radial_split(model, x):
    x = np.asarray(x, dtype=float)
    r = float(np.linalg.norm(x))
    if r == 0.0:
        if model.singular:
            raise SingularEvaluation("modified Ricci requested at the singular point O")
        # isotropic at O: evaluate the limit along e_1
        x = np.zeros(model.n)
        x[0] = 1e-8
        r = 1e-8
    s = float(model.chart.sigma(r))
    if model.singular and s < model.eps_min:
        raise SingularEvaluation(f"distance to O below eps_min={model.eps_min:g}")
    return x, r, s


def ricci_eigen(model, s):
    """(radial, tangential) Ricci eigenvalues at distance s."""
    r2, kap = model.warp.curvature_ratios(s)
    n = model.n
    return -(n - 1) * r2, -r2 + (n - 2) * kap


def field_eigen(model, s):
    """(radial, tangential) eigenvalues of 1/2 L_V g = Hess L."""
    if not model.has_field:
        return 0.0 * s, 0.0 * s
    v = model.v_of_s(s)
    dv = model.dv_of_s(s)
    return dv, v * model.df(s) / model.f(s)


def _frame_tensor(x, r, a, b):
    xhat = x / r
    P = np.outer(xhat, xhat)
    return a * P + b * (np.eye(len(x)) - P)


def ricci(model, x):
    x, r, s = _radial_split(model, x)
    a, b = ricci_eigen(model, s)
    return SymTensor2(_frame_tensor(x, r, float(a), float(b)))


def lie_half(model, x):
    x, r, s = _radial_split(model, x)
    a, b = field_eigen(model, s)
    return SymTensor2(_frame_tensor(x, r, float(a), float(b)))


def modified_ricci(model, x, N=None):
    """Ric + 1/2 L_V g in the orthonormal frame at chart point x.

    With ``N`` the N-Bakry-Emery form subtracts V (x) V / (N - n).
    """
    x, r, s = _radial_split(model, x)
    ra, rb = ricci_eigen(model, s)
    fa, fb = field_eigen(model, s)
    a, b = float(ra + fa), float(rb + fb)
    if N is not None:
        if N <= model.n:
            raise ValueError("N must exceed the dimension")
        if model.has_field:
            a -= float(model.v_of_s(s)) ** 2 / (N - model.n)
    return SymTensor2(_frame_tensor(x, r, a, b))


def christoffel(model, x):
    """Gamma[k, i, j] from the closed form metric derivative."""
    g = model.metric(x)
    dg = model.metric_derivative(x)
    return _gamma_from(g, dg)


def _gamma_from(g, dg):
    ginv = np.linalg.inv(g)
    # T[l, i, j] = d_i g_lj + d_j g_li - d_l g_ij
    T = np.transpose(dg, (1, 0, 2)) + np.transpose(dg, (1, 2, 0)) - dg
    return 0.5 * np.einsum("kl,lij->kij", ginv, T)


def coordinate_modified_ricci(model, x):
    """Coordinate components of the analytic tensor (for the oracle)."""
    x = np.asarray(x, dtype=float)
    T = modified_ricci(model, x).components
    # frame components -> coordinates: T_coord = E^-T T E^-1, E^-1 = g^{1/2}
    E = model.frame(x)
    Einv = np.linalg.inv(E)
    return Einv.T @ T @ Einv


# ---------------------------------------------------------------------------
# finite difference oracle


def _check_step(h):
    if h < MIN_STEP:
        raise StepTooSmall(f"step {h:g} below {MIN_STEP:g}; cancellation would dominate")


def fd_metric_derivative(model, x, h):
    n = model.n
    dg = np.empty((n, n, n))
    for k in range(n):
        e = np.zeros(n)
        e[k] = h
        dg[k] = (model.metric(x + e) - model.metric(x - e)) / (2.0 * h)
    return dg


def fd_christoffel(model, x, h):
    return _gamma_from(model.metric(x), fd_metric_derivative(model, x, h))


def fd_ricci(model, x, h):
    """Coordinate Ricci tensor from nested central differences."""
    n = model.n
    x = np.asarray(x, dtype=float)
    G = fd_christoffel(model, x, h)
    dG = np.empty((n, n, n, n))  # dG[m, k, i, j] = d_m Gamma^k_ij
    for m in range(n):
        e = np.zeros(n)
        e[m] = h
        dG[m] = (fd_christoffel(model, x + e, h) - fd_christoffel(model, x - e, h)) / (2.0 * h)
    term1 = np.einsum("kkij->ij", dG)
    term2 = np.einsum("jkik->ij", dG)
    term3 = np.einsum("kkl,lij->ij", G, G)
    term4 = np.einsum("kjl,lik->ij", G, G)
    return term1 - term2 + term3 - term4


def fd_lie_half(model, x, h):
    """1/2 (V^k d_k g_ij + g_kj d_i V^k + g_ik d_j V^k) by differences."""
    n = model.n
    x = np.asarray(x, dtype=float)
    g = model.metric(x)
    dg = fd_metric_derivative(model, x, h)
    V = model.vector_field(x)
    dV = np.empty((n, n))  # dV[i, k] = d_i V^k
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        dV[i] = (model.vector_field(x + e) - model.vector_field(x - e)) / (2.0 * h)
    L = np.einsum("k,kij->ij", V, dg) + dV @ g + (dV @ g).T
    return 0.5 * L


def fd_hessian_potential(model, x, h):
    """Hess L = d^2 L - Gamma^k d_k L by differences of L."""
    n = model.n
    x = np.asarray(x, dtype=float)
    Lf = lambda y: float(model.potential_at(y))
    H = np.empty((n, n))
    grad = np.empty(n)
    L0 = Lf(x)
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = h
        grad[i] = (Lf(x + ei) - Lf(x - ei)) / (2.0 * h)
        H[i, i] = (Lf(x + ei) - 2.0 * L0 + Lf(x - ei)) / (h * h)
        for j in range(i + 1, n):
            ej = np.zeros(n)
            ej[j] = h
            H[i, j] = H[j, i] = (
                Lf(x + ei + ej) - Lf(x + ei - ej) - Lf(x - ei + ej) + Lf(x - ei - ej)
            ) / (4.0 * h * h)
    G = fd_christoffel(model, x, h)
    return H - np.einsum("kij,k->ij", G, grad)


def _to_frame(model, x, T):
    E = model.frame(x)
    return E.T @ T @ E


def fd_discrepancies(model, x, h):
    """Frame max-norm errors of the Ricci, Lie and Hessian reconstructions."""
    _check_step(h)
    x = np.asarray(x, dtype=float)
    ric = ricci(model, x).components
    lie = lie_half(model, x).components
    out = {"ricci": float(np.max(np.abs(_to_frame(model, x, fd_ricci(model, x, h)) - ric)))}
    if model.has_field:
        out["lie"] = float(np.max(np.abs(_to_frame(model, x, fd_lie_half(model, x, h)) - lie)))
        out["hessian"] = float(np.max(np.abs(_to_frame(model, x, fd_hessian_potential(model, x, h)) - lie)))
    return out


def finite_difference_check(model, x, h=1e-3):
    """Largest discrepancy between the analytic tensors and their FD rebuild."""
    return max(fd_discrepancies(model, x, h).values())


@dataclass
class ConvergenceResult:
    error_h: float
    error_h2: float
    order: float
    exact: bool
    constant: float


def fd_convergence(model, x, h=1e-3):
    """Error at h and h/2 and the observed order log2(e(h)/e(h/2)).

    When both errors sit below the rounding floor the reconstruction is exact
    (flat metric, quadratic potential) and no order is measured.
    """
    e1 = finite_difference_check(model, x, h)
    e2 = finite_difference_check(model, x, h / 2.0)
    if e1 < EXACT_FLOOR and e2 < EXACT_FLOOR:
        return ConvergenceResult(e1, e2, math.inf, True, 0.0)
    order = math.log2(e1 / e2) if e2 > 0 else math.inf
    return ConvergenceResult(e1, e2, order, False, e1 / h**2)


def default_sample_point(model):
    """Fixed chart point at geodesic distance 0.6 from O."""
    base = np.resize(np.array([0.31, -0.22, 0.17, 0.12, -0.08, 0.05]), model.n)
    u = base / np.linalg.norm(base)
    return model.point_at(0.6, u)


def lie_hessian_agreement(model, x):
    """Agreement of the coordinate Lie derivative formula with Hess L.

    Both sides are evaluated analytically from the chart expressions:
    V^k = phi x_k, d_i L = psi x_i with phi = v/(sigma' r), psi = L' sigma'/r.
    """
    x = np.asarray(x, dtype=float)
    n = model.n
    r = float(np.linalg.norm(x))
    A, dA, B, dB, sg, ds, d2s, F, dF = model._radial_parts(r)
    g = model.metric(x)
    dg = model.metric_derivative(x)
    Gam = _gamma_from(g, dg)
    v = float(model.v_of_s(sg))
    dv = float(model.dv_of_s(sg))
    phi = v / (ds * r)
    dphi = (dv * ds) / (ds * r) - v * (d2s * r + ds) / (ds * r) ** 2
    V = phi * x
    dV = phi * np.eye(n) + dphi * np.outer(x, x) / r
    lie = 0.5 * (np.einsum("k,kij->ij", V, dg) + dV @ g + (dV @ g).T)
    psi = v * ds / r
    dpsi = (dv * ds * ds + v * d2s) / r - v * ds / r**2
    grad = psi * x
    hess_flat = psi * np.eye(n) + dpsi * np.outer(x, x) / r
    hess = hess_flat - np.einsum("kij,k->ij", Gam, grad)
    return float(np.max(np.abs(_to_frame(model, x, lie - hess))))


def verify_lower_bound(model, sample_points, lam=None, tol=DEFAULT_TOL, N=None, directions="all"):
    """Certificate for Ric + 1/2 L_V g >= -lam g at the samples.

    lhs = -lam, rhs = smallest eigenvalue.  ``directions="radial"`` restricts
    to the radial eigenvalue, the only one the comparison along rays from O
    uses.
    """
    lam = model.spec.lam if lam is None else lam
    pts = [np.asarray(p, dtype=float) for p in sample_points]
    if not pts:
        raise ValueError("at least one sample point is required")
    mins = []
    for p in pts:
        T = modified_ricci(model, p, N=N)
        if directions == "radial":
            xhat = p / np.linalg.norm(p)
            mins.append(float(xhat @ T.components @ xhat))
        else:
            mins.append(T.min_eigenvalue())
    kind = "ModifiedRicciLowerBound" if N is None else "NBakryEmeryLowerBound"
    return BoundCertificate(
        kind,
        [p.tolist() for p in pts],
        np.full(len(pts), -lam),
        np.array(mins),
        tolerance=tol,
        model=model.name,
        params={**model.params(), "directions": directions, **({"N": N} if N else {})},
    )


def sample_ball(model, n_points, r_min=1e-3, r_max=1.0, seed=0):
    """Chart points with geodesic distance in [r_min, r_max] from O."""
    rng = np.random.default_rng(seed)
    d = rng.normal(size=(n_points, model.n))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    s = rng.uniform(r_min, min(r_max, 0.999 * model.cut_radius), size=n_points)
    return model.point_at(s, d)


def scalar_curvature(model, s):
    a, b = ricci_eigen(model, s)
    return a + (model.n - 1) * b


def soliton_identity(model, s):
    """R + |grad L|^2 - 2 lam L along distance s (constant on solitons)."""
    v = model.v_of_s(s) if model.has_field else 0.0 * np.asarray(s)
    L = model.L_of_s(s)
    return scalar_curvature(model, s) + v * v - 2.0 * model.spec.lam * L
