"""Closed form geometry of constant curvature spaces in normal coordinates.

Chart points x in R^n are geodesic normal coordinates about O: the point at
distance s from O in unit direction u is x = s u.  Distances and geodesics
use the standard embeddings (round sphere in R^{n+1}, hyperboloid in
Minkowski space) scaled to curvature k.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import GeodesicAmbiguous, UnsupportedKind


class SpaceForm:
    def __init__(self, k, n):
        self.k = float(k)
        self.n = int(n)
        self.a = math.sqrt(abs(self.k)) if self.k != 0 else 1.0

    @property
    def diameter(self):
        return math.pi / self.a if self.k > 0 else math.inf

    # law of cosines --------------------------------------------------------
    def third_side(self, d0, s, cosb):
        """Distance t from O of the point at distance s from x along a ray
        making angle b with the direction from x towards O; d0 = d(x, O)."""
        d0, s, cosb = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (d0, s, cosb)))
        if self.k == 0:
            t2 = d0 * d0 + s * s - 2.0 * d0 * s * cosb
            return np.sqrt(np.maximum(t2, 0.0))
        a = self.a
        A, S = a * d0, a * s
        if self.k > 0:
            # haversine form for accuracy at small distances
            h = np.sin((A - S) / 2.0) ** 2 + np.sin(A) * np.sin(S) * (1.0 - cosb) / 2.0
            return 2.0 * np.arcsin(np.sqrt(np.clip(h, 0.0, 1.0))) / a
        h = np.sinh((A - S) / 2.0) ** 2 + np.sinh(A) * np.sinh(S) * (1.0 - cosb) / 2.0
        return 2.0 * np.arcsinh(np.sqrt(np.maximum(h, 0.0))) / a

    def angle_cosine(self, d0, s, t):
        """<grad d_O, grad s> at the far vertex of the triangle (O, x, y)
        with d(O,x) = d0, d(x,y) = s, d(O,y) = t."""
        d0, s, t = (np.asarray(v, dtype=float) for v in (d0, s, t))
        with np.errstate(invalid="ignore", divide="ignore"):
            if self.k == 0:
                c = (t * t + s * s - d0 * d0) / (2.0 * t * s)
            elif self.k > 0:
                a = self.a
                c = (np.cos(a * d0) - np.cos(a * t) * np.cos(a * s)) / (np.sin(a * t) * np.sin(a * s))
            else:
                a = self.a
                c = (np.cosh(a * t) * np.cosh(a * s) - np.cosh(a * d0)) / (np.sinh(a * t) * np.sinh(a * s))
        return np.clip(c, -1.0, 1.0)

    # embedding -------------------------------------------------------------
    def embed(self, x):
        """Chart points (..., n) -> unit model points (..., n+1) at curvature +-1."""
        x = np.asarray(x, dtype=float)
        if self.k == 0:
            return x
        r = np.linalg.norm(x, axis=-1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            u = np.where(r > 0, x / np.where(r > 0, r, 1.0), 0.0)
        th = self.a * r
        if self.k > 0:
            return np.concatenate([np.cos(th), np.sin(th) * u], axis=-1)
        return np.concatenate([np.cosh(th), np.sinh(th) * u], axis=-1)

    def unembed(self, X):
        X = np.asarray(X, dtype=float)
        if self.k == 0:
            return X
        spat = X[..., 1:]
        rs = np.linalg.norm(spat, axis=-1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            u = np.where(rs > 0, spat / np.where(rs > 0, rs, 1.0), 0.0)
        if self.k > 0:
            th = np.arctan2(rs, X[..., :1])
        else:
            th = np.arcsinh(rs)
        return th / self.a * u

    def distance(self, x, y):
        """Geodesic distance between chart points (broadcasting)."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.k == 0:
            return np.linalg.norm(x - y, axis=-1)
        X, Y = self.embed(x), self.embed(y)
        D = X - Y
        if self.k > 0:
            chord = np.linalg.norm(D, axis=-1)
            return 2.0 * np.arcsin(np.clip(chord / 2.0, 0.0, 1.0)) / self.a
        m2 = -D[..., 0] ** 2 + np.sum(D[..., 1:] ** 2, axis=-1)
        return 2.0 * np.arcsinh(np.sqrt(np.maximum(m2, 0.0)) / 2.0) / self.a

    def distance_matrix(self, P, Q=None):
        P = np.asarray(P, dtype=float)
        Q = P if Q is None else np.asarray(Q, dtype=float)
        return self.distance(P[:, None, :], Q[None, :, :])

    def geodesic(self, x, y, t, ambiguity_tol=1e-9):
        """Points at fractions t in [0, 1] along the minimal geodesic x -> y.

        x, y are (..., n); t has shape (m,); result is (..., m, n).
        """
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        t = np.asarray(t, dtype=float)
        if self.k == 0:
            return x[..., None, :] + t[:, None] * (y - x)[..., None, :]
        d = self.a * self.distance(x, y)
        if self.k > 0 and np.any(d > math.pi - ambiguity_tol):
            raise GeodesicAmbiguous("antipodal pair: minimal geodesic is not unique")
        X, Y = self.embed(x), self.embed(y)
        d = d[..., None, None]
        tt = t[:, None]
        Xe, Ye = X[..., None, :], Y[..., None, :]
        small = d < 1e-12
        dd = np.where(small, 1.0, d)
        if self.k > 0:
            c0 = np.where(small, 1.0 - tt, np.sin((1.0 - tt) * dd) / np.sin(dd))
            c1 = np.where(small, tt, np.sin(tt * dd) / np.sin(dd))
        else:
            c0 = np.where(small, 1.0 - tt, np.sinh((1.0 - tt) * dd) / np.sinh(dd))
            c1 = np.where(small, tt, np.sinh(tt * dd) / np.sinh(dd))
        return self.unembed(c0 * Xe + c1 * Ye)


def space_form_of(model):
    """SpaceForm describing the metric of ``model``, or UnsupportedKind."""
    if model.base_curvature is None:
        raise UnsupportedKind(f"{model.kind} is not a constant curvature space; only the base point O is supported")
    return SpaceForm(model.base_curvature, model.n)


def sphere_measure_weights(n, m):
    """Gauss-Legendre nodes in the angle b from a fixed axis with weights
    integrating functions of b over S^{n-1} (total mass |S^{n-1}|)."""
    from .constants import sphere_area

    if n == 2:
        x, w = np.polynomial.legendre.leggauss(m)
        b = (x + 1.0) * math.pi / 2.0
        return b, w * math.pi / 2.0 * 2.0
    # |S^{n-2}| integral_0^pi g(b) sin^{n-2} b db
    x, w = np.polynomial.legendre.leggauss(m)
    b = (x + 1.0) * math.pi / 2.0
    return b, w * math.pi / 2.0 * sphere_area(n - 1) * np.sin(b) ** (n - 2)
