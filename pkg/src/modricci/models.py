"""Catalog of explicit rotationally symmetric model manifolds.

Every model is a warped product ds^2 + f(s)^2 g_{S^{n-1}} around the base
point O, written in a Cartesian chart x in R^n whose radius r = |x| maps to
geodesic distance s = sigma(r).  For all kinds except the cigar the chart is
geodesic normal (sigma(r) = r); the cigar uses its conformal chart.

Vector fields are radial, V = v(s) d/ds, and always gradients of a radial
potential L(s) with L' = v.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .constants import EPS_MIN, soliton_gradient_bound
from .errors import InvalidSpec, SingularEvaluation

KINDS = (
    "Euclidean",
    "Sphere",
    "Hyperbolic",
    "GaussianSoliton",
    "CigarSoliton",
    "WarpedCustom",
    "SingularFieldModel",
)
SPACE_FORM_BASES = ("Euclidean", "Sphere", "Hyperbolic")
SOLITON_KINDS = ("GaussianSoliton", "CigarSoliton")

_DESCRIPTIONS = {
    "Euclidean": "flat R^n, f(s) = s, V = 0",
    "Sphere": "round sphere of curvature k > 0, f(s) = sin(sqrt(k) s)/sqrt(k)",
    "Hyperbolic": "hyperbolic space of curvature k < 0, f(s) = sinh(sqrt(-k) s)/sqrt(-k)",
    "GaussianSoliton": "flat R^n with L = lam |x|^2/2, Ric + Hess L = lam g",
    "CigarSoliton": "Hamilton cigar rescaled so R + |grad L|^2 = 1, n = 2",
    "WarpedCustom": "user warp f(s) given as an expression in s",
    "SingularFieldModel": "space form base with V = sign K s^-alpha d/ds",
}


@dataclass(frozen=True)
class ModelSpec:
    """Declarative description of a catalog model.

    ``curvature`` is the sectional curvature of a space form base (Sphere,
    Hyperbolic, SingularFieldModel).  ``warp`` is an expression in ``s`` for
    WarpedCustom.  ``field_sign`` is -1 for an inward singular field.
    ``c1`` is the user supplied lower scalar curvature bound used by
    expanding solitons.
    """

    kind: str
    dimension: int = 3
    lam: float = 0.0
    K: float = 0.0
    alpha: float = 0.0
    rho: float = 1.0
    origin: tuple = ()
    curvature: float | None = None
    base: str | None = None
    warp: str | None = None
    field_sign: float = -1.0
    c1: float | None = None

    def to_dict(self):
        d = asdict(self)
        d["origin"] = list(self.origin)
        return d

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InvalidSpec(sorted(unknown)[0], "unknown field")
        data = dict(data)
        if "origin" in data and data["origin"] is not None:
            data["origin"] = tuple(float(v) for v in data["origin"])
        return cls(**data)

    def to_text(self):
        """Key/value text form, one field per line."""
        lines = []
        for key, value in self.to_dict().items():
            if value is None:
                continue
            if key == "origin":
                if not value:
                    continue
                value = ", ".join(repr(float(v)) for v in value)
            elif isinstance(value, float):
                value = repr(value)
            lines.append(f"{key} = {value}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        data = {}
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            data[key.strip()] = value.strip()
        return cls.from_dict(coerce_fields(data))


_INT_FIELDS = {"dimension"}
_FLOAT_FIELDS = {"lam", "K", "alpha", "rho", "curvature", "field_sign", "c1"}


def coerce_fields(data):
    """Convert string values of a key/value mapping to ModelSpec types."""
    out = {}
    for key, value in data.items():
        if key in _INT_FIELDS:
            try:
                out[key] = int(value)
            except ValueError:
                raise InvalidSpec(key, f"expected an integer, got {value!r}") from None
        elif key in _FLOAT_FIELDS:
            try:
                out[key] = float(value)
            except ValueError:
                raise InvalidSpec(key, f"expected a number, got {value!r}") from None
        elif key == "origin":
            parts = [p for p in str(value).replace(",", " ").split() if p]
            try:
                out[key] = tuple(float(p) for p in parts)
            except ValueError:
                raise InvalidSpec(key, f"expected numbers, got {value!r}") from None
        else:
            out[key] = value
    return out


@dataclass(frozen=True)
class BakryEmeryCondition:
    """Holder and integral bounds on a potential L."""

    K1: float
    a: float
    K2: float
    beta: float
    q: float = 2.0

    def __post_init__(self):
        if self.K1 < 0 or self.K2 < 0:
            raise InvalidSpec("K1/K2", "must be nonnegative")
        if not 0.0 < self.a <= 1.0:
            raise InvalidSpec("a", f"Holder exponent must lie in (0, 1], got {self.a}")
        if not 0.0 <= self.beta < 1.0:
            raise InvalidSpec("beta", f"must lie in [0, 1), got {self.beta}")
        if self.q < 1.0:
            raise InvalidSpec("q", f"must be >= 1, got {self.q}")


@dataclass(frozen=True)
class SolitonNormalization:
    mode: str
    Lambda: float


# ---------------------------------------------------------------------------
# warp functions


@dataclass(frozen=True)
class Warp:
    """f and its derivatives.  ``ratio2`` = f''/f and ``kappa`` = (1 - f'^2)/f^2
    are given separately where closed forms avoid cancellation near s = 0."""

    f: object
    df: object
    d2f: object
    cut_radius: float = math.inf
    ratio2: object = None
    kappa: object = None

    def curvature_ratios(self, s):
        s = np.asarray(s, dtype=float)
        if self.ratio2 is not None:
            r2 = self.ratio2(s)
        else:
            r2 = self.d2f(s) / self.f(s)
        if self.kappa is not None:
            kap = self.kappa(s)
        else:
            fs = self.f(s)
            kap = (1.0 - self.df(s) ** 2) / (fs * fs)
        return r2, kap


def space_form_warp(k):
    const = lambda c: (lambda s: np.full(np.shape(s), c, dtype=float))
    if k > 0:
        a = math.sqrt(k)
        return Warp(
            lambda s: np.sin(a * s) / a,
            lambda s: np.cos(a * s),
            lambda s: -a * np.sin(a * s),
            math.pi / a,
            const(-k),
            const(k),
        )
    if k < 0:
        a = math.sqrt(-k)
        return Warp(
            lambda s: np.sinh(a * s) / a,
            lambda s: np.cosh(a * s),
            lambda s: a * np.sinh(a * s),
            math.inf,
            const(-k),
            const(k),
        )
    return Warp(
        lambda s: np.asarray(s, dtype=float) * 1.0,
        const(1.0),
        const(0.0),
        math.inf,
        const(0.0),
        const(0.0),
    )


def _cigar_warp():
    # scaled cigar: f(s) = 2 tanh(s/2)
    return Warp(
        lambda s: 2.0 * np.tanh(s / 2.0),
        lambda s: 1.0 / np.cosh(s / 2.0) ** 2,
        lambda s: -np.tanh(s / 2.0) / np.cosh(s / 2.0) ** 2,
        math.inf,
        lambda s: -0.5 / np.cosh(s / 2.0) ** 2,
        lambda s: 0.25 * (1.0 + 1.0 / np.cosh(s / 2.0) ** 2),
    )


def _custom_warp(expr):
    import sympy

    s = sympy.Symbol("s", real=True)
    try:
        f = sympy.sympify(expr, locals={"s": s})
    except (sympy.SympifyError, TypeError, SyntaxError) as exc:
        raise InvalidSpec("warp", f"cannot parse {expr!r}: {exc}") from None
    if f.free_symbols - {s}:
        raise InvalidSpec("warp", f"only the variable s is allowed, got {f.free_symbols}")
    df = sympy.diff(f, s)
    d2f = sympy.diff(df, s)
    f0 = float(sympy.limit(f, s, 0))
    df0 = float(sympy.limit(df, s, 0))
    if abs(f0) > 1e-12:
        raise InvalidSpec("warp", f"f(0) must be 0, got {f0}")
    if abs(df0 - 1.0) > 1e-12:
        raise InvalidSpec("warp", f"f'(0) must be 1, got {df0}")
    mods = ["numpy"]
    fn = sympy.lambdify(s, f, mods)
    dfn = sympy.lambdify(s, df, mods)
    d2fn = sympy.lambdify(s, d2f, mods)

    def vec(g):
        return lambda x: np.asarray(g(np.asarray(x, dtype=float)), dtype=float) + 0.0 * np.asarray(x, dtype=float)

    fv, dfv, d2fv = vec(fn), vec(dfn), vec(d2fn)
    cut = _first_zero(fv)
    r2 = vec(sympy.lambdify(s, sympy.simplify(d2f / f), mods))
    kap = vec(sympy.lambdify(s, sympy.simplify((1 - df**2) / f**2), mods))
    return Warp(fv, dfv, d2fv, cut, r2, kap)


def _first_zero(f, s_max=50.0, n=20001):
    """First positive zero of f on (0, s_max], +inf if none."""
    from scipy.optimize import brentq

    grid = np.linspace(1e-6, s_max, n)
    vals = f(grid)
    if vals[0] <= 0:
        raise InvalidSpec("warp", "f must be positive just after 0")
    bad = np.nonzero(vals <= 0)[0]
    if bad.size == 0:
        return math.inf
    i = bad[0]
    return brentq(f, grid[i - 1], grid[i], xtol=1e-14)


# ---------------------------------------------------------------------------
# chart radius <-> geodesic distance


@dataclass(frozen=True)
class Chart:
    sigma: object
    dsigma: object
    d2sigma: object
    radius: object  # inverse of sigma


_IDENTITY_CHART = Chart(
    lambda r: np.asarray(r, dtype=float) * 1.0,
    lambda r: np.ones_like(np.asarray(r, dtype=float)),
    lambda r: np.zeros_like(np.asarray(r, dtype=float)),
    lambda s: np.asarray(s, dtype=float) * 1.0,
)

_CIGAR_CHART = Chart(
    lambda r: 2.0 * np.arcsinh(r),
    lambda r: 2.0 / np.sqrt(1.0 + np.asarray(r) ** 2),
    lambda r: -2.0 * np.asarray(r) / (1.0 + np.asarray(r) ** 2) ** 1.5,
    lambda s: np.sinh(np.asarray(s) / 2.0),
)


# ---------------------------------------------------------------------------
# radial potentials


@dataclass(frozen=True)
class RadialPotential:
    L: object
    dL: object
    d2L: object


def _zero(s):
    return np.zeros_like(np.asarray(s, dtype=float))


ZERO_POTENTIAL = RadialPotential(_zero, _zero, _zero)


class Model:
    """Immutable evaluator bundle built from a ModelSpec."""

    def __init__(self, spec, warp, chart, potential, base_curvature, has_field, eps_min=EPS_MIN):
        self.spec = spec
        self.n = spec.dimension
        self.warp = warp
        self.chart = chart
        self.potential = potential
        self.base_curvature = base_curvature
        self.has_field = has_field
        self.eps_min = eps_min

    # basic data
    @property
    def kind(self):
        return self.spec.kind

    @property
    def name(self):
        s = self.spec
        parts = [s.kind, f"n={s.dimension}"]
        if s.curvature is not None and s.kind in ("Sphere", "Hyperbolic", "SingularFieldModel"):
            parts.append(f"k={s.curvature:g}")
        if s.kind == "SingularFieldModel":
            parts.append(f"base={s.base}")
        return " ".join(parts)

    @property
    def cut_radius(self):
        return self.warp.cut_radius

    @property
    def is_space_form(self):
        """True when the metric is homogeneous (distances in closed form)."""
        return self.base_curvature is not None

    @property
    def singular(self):
        return self.has_field and self.spec.alpha > 0

    def params(self):
        s = self.spec
        return {"n": s.dimension, "lam": s.lam, "K": s.K, "alpha": s.alpha, "rho": s.rho}

    # warp evaluators
    def f(self, s):
        return self.warp.f(np.asarray(s, dtype=float))

    def df(self, s):
        return self.warp.df(np.asarray(s, dtype=float))

    def d2f(self, s):
        return self.warp.d2f(np.asarray(s, dtype=float))

    def volume_element(self, s):
        return self.f(s) ** (self.n - 1)

    def mean_curvature(self, s):
        """Delta s = d/ds log w = (n-1) f'/f along rays from O."""
        s = np.asarray(s, dtype=float)
        return (self.n - 1) * self.df(s) / self.f(s)

    # potential and field in geodesic distance
    def L_of_s(self, s):
        return self.potential.L(np.asarray(s, dtype=float))

    def v_of_s(self, s):
        s = np.asarray(s, dtype=float)
        if self.singular and np.any(s < self.eps_min):
            raise SingularEvaluation(f"distance to O below eps_min={self.eps_min:g}")
        return self.potential.dL(s)

    def dv_of_s(self, s):
        s = np.asarray(s, dtype=float)
        if self.singular and np.any(s < self.eps_min):
            raise SingularEvaluation(f"distance to O below eps_min={self.eps_min:g}")
        return self.potential.d2L(s)

    # chart evaluators
    def distance_to_origin(self, x):
        x = np.asarray(x, dtype=float)
        return self.chart.sigma(np.linalg.norm(x, axis=-1))

    def point_at(self, s, direction):
        """Chart point at distance s from O along a unit direction."""
        direction = np.asarray(direction, dtype=float)
        direction = direction / np.linalg.norm(direction, axis=-1, keepdims=True)
        return np.asarray(self.chart.radius(s))[..., None] * direction

    def _radial_parts(self, r):
        """A = sigma'^2, B = F^2/r^2 with F(r) = f(sigma(r)), and r-derivatives."""
        ch = self.chart
        sg, ds, d2s = ch.sigma(r), ch.dsigma(r), ch.d2sigma(r)
        F = self.f(sg)
        dF = self.df(sg) * ds
        A = ds * ds
        dA = 2.0 * ds * d2s
        B = F * F / (r * r)
        dB = 2.0 * F * dF / (r * r) - 2.0 * F * F / r**3
        return A, dA, B, dB, sg, ds, d2s, F, dF

    def metric(self, x):
        """Metric matrix g_ij at chart point(s) x, shape (..., n, n)."""
        x = np.asarray(x, dtype=float)
        r = np.linalg.norm(x, axis=-1)
        if np.any(r == 0):
            raise SingularEvaluation("metric formula evaluated at the chart origin")
        A, _, B, _, *_ = self._radial_parts(r)
        xhat = x / r[..., None]
        P = xhat[..., :, None] * xhat[..., None, :]
        eye = np.eye(self.n)
        return B[..., None, None] * eye + (A - B)[..., None, None] * P

    def metric_derivative(self, x):
        """dg[k, i, j] = d_k g_ij at a single chart point."""
        x = np.asarray(x, dtype=float)
        r = float(np.linalg.norm(x))
        A, dA, B, dB, *_ = self._radial_parts(r)
        c = (A - B) / r**2
        dc = (dA - dB) / r**2 - 2.0 * (A - B) / r**3
        n = self.n
        eye = np.eye(n)
        xr = x / r
        dg = dB * xr[:, None, None] * eye[None, :, :]
        dg += dc * xr[:, None, None] * np.outer(x, x)[None, :, :]
        dg += c * (eye[:, :, None] * x[None, None, :] + eye[:, None, :] * x[None, :, None])
        return dg

    def frame(self, x):
        """Matrix E with E^T g E = I (columns orthonormal), at one point."""
        x = np.asarray(x, dtype=float)
        r = float(np.linalg.norm(x))
        A, _, B, _, *_ = self._radial_parts(r)
        xhat = x / r
        P = np.outer(xhat, xhat)
        return P / math.sqrt(A) + (np.eye(self.n) - P) / math.sqrt(B)

    def vector_field(self, x):
        """Coordinate components of V at chart point(s)."""
        x = np.asarray(x, dtype=float)
        if not self.has_field:
            return np.zeros_like(x)
        r = np.linalg.norm(x, axis=-1)
        s = self.chart.sigma(r)
        v = self.v_of_s(s)
        coef = v / (self.chart.dsigma(r) * r)
        return coef[..., None] * x

    def potential_at(self, x):
        return self.L_of_s(self.distance_to_origin(x))

    def vector_field_norm(self, x, return_flag=False):
        """|V|(x); with ``return_flag`` also whether |V| d^alpha exceeds K."""
        d = self.distance_to_origin(x)
        if self.singular and np.any(d < self.eps_min):
            raise SingularEvaluation(f"distance to O below eps_min={self.eps_min:g}")
        if self.has_field:
            norm = np.abs(self.v_of_s(d))
        else:
            norm = np.zeros_like(d)
        if not return_flag:
            return norm
        with np.errstate(divide="ignore"):
            bound = self.spec.K / np.power(d, self.spec.alpha) if self.spec.alpha > 0 else self.spec.K * np.ones_like(d)
        flag = norm > bound + 1e-9
        return norm, flag

    def soliton_normalization(self):
        s = self.spec
        if s.kind == "GaussianSoliton":
            mode = "ShrinkExpand" if s.lam != 0 else "Steady"
        elif s.kind == "CigarSoliton":
            mode = "Steady"
        else:
            raise ValueError(f"{s.kind} is not a soliton")
        return SolitonNormalization(mode, soliton_gradient_bound(s.dimension, s.lam, s.K, s.c1))

    def bakry_emery_condition(self, q=2.0):
        """Holder data of the potential derived from |grad L| <= K d^-alpha.

        Integrating the gradient bound along a minimal geodesic gives
        |L(y) - L(z)| <= 2K/(1-alpha) d^{1-alpha}.  For alpha = 0 the Lipschitz
        bound is used with exponent 1/2, valid because d <= 1.
        """
        s = self.spec
        K1 = 2.0 * s.K / (1.0 - s.alpha)
        a = 1.0 - s.alpha if s.alpha > 0 else 0.5
        return BakryEmeryCondition(K1=K1, a=a, K2=s.K, beta=s.alpha, q=q)

    def __repr__(self):
        return f"Model({self.name})"


def _require(cond, fld, msg):
    if not cond:
        raise InvalidSpec(fld, msg)


def validate_spec(spec):
    _require(spec.kind in KINDS, "kind", f"unknown kind {spec.kind!r}; expected one of {', '.join(KINDS)}")
    _require(isinstance(spec.dimension, (int, np.integer)) and spec.dimension >= 2, "dimension", "must be an integer >= 2")
    _require(spec.lam >= 0, "lam", "must be >= 0")
    _require(spec.K >= 0, "K", "must be >= 0")
    _require(0.0 <= spec.alpha < 1.0, "alpha", "must lie in [0, 1)")
    _require(spec.rho > 0, "rho", "must be > 0")
    _require(len(spec.origin) in (0, spec.dimension), "origin", "must be empty or have one coordinate per dimension")
    _require(all(abs(c) < 1e-15 for c in spec.origin), "origin", "models are built around the chart origin")
    if spec.kind == "Sphere":
        _require(spec.curvature is None or spec.curvature > 0, "curvature", "Sphere needs curvature > 0")
    if spec.kind == "Hyperbolic":
        _require(spec.curvature is None or spec.curvature < 0, "curvature", "Hyperbolic needs curvature < 0")
    if spec.kind == "CigarSoliton":
        _require(spec.dimension == 2, "dimension", "the cigar soliton is two dimensional")
    if spec.kind == "WarpedCustom":
        _require(bool(spec.warp), "warp", "WarpedCustom needs a warp expression in s")
    if spec.kind == "SingularFieldModel":
        _require(spec.base in SPACE_FORM_BASES, "base", f"must be one of {', '.join(SPACE_FORM_BASES)}")
        _require(spec.field_sign in (-1.0, 1.0), "field_sign", "must be +1 or -1")
        if spec.base == "Sphere":
            _require(spec.curvature is not None and spec.curvature > 0, "curvature", "Sphere base needs curvature > 0")
        if spec.base == "Hyperbolic":
            _require(spec.curvature is not None and spec.curvature < 0, "curvature", "Hyperbolic base needs curvature < 0")


def build_model(spec, eps_min=EPS_MIN):
    """Validate ``spec`` and return the evaluator bundle."""
    validate_spec(spec)
    kind = spec.kind
    chart = _IDENTITY_CHART
    potential = ZERO_POTENTIAL
    has_field = False
    base_k = None
    if kind == "Euclidean":
        base_k = 0.0
        warp = space_form_warp(0.0)
    elif kind in ("Sphere", "Hyperbolic"):
        base_k = spec.curvature if spec.curvature is not None else (1.0 if kind == "Sphere" else -1.0)
        warp = space_form_warp(base_k)
    elif kind == "GaussianSoliton":
        base_k = 0.0
        warp = space_form_warp(0.0)
        lam = spec.lam
        potential = RadialPotential(
            lambda s: 0.5 * lam * np.asarray(s) ** 2,
            lambda s: lam * np.asarray(s, dtype=float),
            lambda s: lam * np.ones_like(np.asarray(s, dtype=float)),
        )
        has_field = lam != 0
    elif kind == "CigarSoliton":
        warp = _cigar_warp()
        chart = _CIGAR_CHART
        potential = RadialPotential(
            lambda s: -2.0 * np.log(np.cosh(np.asarray(s) / 2.0)),
            lambda s: -np.tanh(np.asarray(s) / 2.0),
            lambda s: -0.5 / np.cosh(np.asarray(s) / 2.0) ** 2,
        )
        has_field = True
    elif kind == "WarpedCustom":
        warp = _custom_warp(spec.warp)
    else:  # SingularFieldModel
        base_k = {"Euclidean": 0.0}.get(spec.base, spec.curvature)
        warp = space_form_warp(base_k)
        K, a, sg = spec.K, spec.alpha, spec.field_sign
        potential = RadialPotential(
            lambda s: sg * K * np.asarray(s, dtype=float) ** (1.0 - a) / (1.0 - a),
            lambda s: sg * K * np.asarray(s, dtype=float) ** (-a),
            lambda s: -a * sg * K * np.asarray(s, dtype=float) ** (-a - 1.0),
        )
        has_field = K != 0
    return Model(spec, warp, chart, potential, base_k, has_field, eps_min)


def catalog_spec(kind, dimension=None):
    """Default spec of each catalog entry."""
    if kind == "Euclidean":
        return ModelSpec("Euclidean", dimension or 3)
    if kind == "Sphere":
        return ModelSpec("Sphere", dimension or 3, curvature=1.0)
    if kind == "Hyperbolic":
        n = dimension or 3
        return ModelSpec("Hyperbolic", n, lam=float(n - 1), curvature=-1.0)
    if kind == "GaussianSoliton":
        return ModelSpec("GaussianSoliton", dimension or 2, lam=1.0, K=2.0)
    if kind == "CigarSoliton":
        return ModelSpec("CigarSoliton", 2, K=1.0)
    if kind == "WarpedCustom":
        n = dimension or 3
        return ModelSpec("WarpedCustom", n, lam=float(n - 1), warp="sinh(s)")
    if kind == "SingularFieldModel":
        return ModelSpec("SingularFieldModel", dimension or 3, K=0.1, alpha=0.5, base="Euclidean")
    raise InvalidSpec("kind", f"unknown kind {kind!r}")


def list_models():
    """One row per catalog kind: name, default spec and a description."""
    return [
        {"kind": k, "description": _DESCRIPTIONS[k], "default": catalog_spec(k).to_dict()}
        for k in KINDS
    ]


def catalog_models():
    return [build_model(catalog_spec(k)) for k in KINDS]
