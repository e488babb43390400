"""Uniform verdict container shared by every verification routine."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .constants import DEFAULT_TOL


def _plain(value):
    """Convert numpy scalars/arrays into JSON friendly Python values."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, np.generic):
        return value.item()
    return value


@dataclass
class BoundCertificate:
    """One verified inequality lhs <= rhs over a set of samples.

    ``samples`` holds a label per row (a radius, a point, a pair of radii).
    The verdict is ``min(rhs - lhs) >= -tolerance``.  ``extras`` carries
    measured constants and diagnostics that are not part of the verdict.
    """

    kind: str
    samples: list
    lhs: np.ndarray
    rhs: np.ndarray
    tolerance: float = DEFAULT_TOL
    model: str = ""
    params: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        self.lhs = np.atleast_1d(np.asarray(self.lhs, dtype=float))
        self.rhs = np.atleast_1d(np.asarray(self.rhs, dtype=float))
        if self.lhs.shape != self.rhs.shape:
            raise ValueError(f"lhs {self.lhs.shape} and rhs {self.rhs.shape} differ in shape")
        if len(self.samples) != self.lhs.size:
            raise ValueError("one sample label per row is required")
        if self.lhs.size == 0:
            raise ValueError("a certificate needs at least one sample")

    @property
    def margins(self):
        return self.rhs - self.lhs

    @property
    def min_margin(self):
        m = self.margins
        if np.any(np.isnan(m)):
            return float("nan")
        return float(np.min(m))

    @property
    def passed(self):
        m = self.min_margin
        return bool(m == m and m >= -self.tolerance)

    def worst_sample(self):
        return self.samples[int(np.argmin(self.margins))]

    def rows(self):
        out = []
        for s, l, r in zip(self.samples, self.lhs, self.rhs):
            out.append({
                "kind": self.kind,
                "model": self.model,
                "params": _plain(self.params),
                "s": _plain(s),
                "lhs": float(l),
                "rhs": float(r),
                "margin": float(r - l),
            })
        return out

    def to_dict(self):
        return {
            "kind": self.kind,
            "model": self.model,
            "params": _plain(self.params),
            "n_samples": int(self.lhs.size),
            "min_margin": self.min_margin,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "extras": _plain(self.extras),
        }

    def __repr__(self):
        verdict = "pass" if self.passed else "FAIL"
        return f"<{self.kind} {self.model} {verdict} min_margin={self.min_margin:.3e} n={self.lhs.size}>"


def single(kind, lhs, rhs, label="value", **kw):
    """Certificate for a single scalar inequality."""
    return BoundCertificate(kind, [label], [lhs], [rhs], **kw)


def merge(kind, certs, **kw):
    """Concatenate several certificates into one (rows keep their labels)."""
    samples, lhs, rhs = [], [], []
    for c in certs:
        samples.extend(c.samples)
        lhs.extend(c.lhs)
        rhs.extend(c.rhs)
    return BoundCertificate(kind, samples, lhs, rhs, **kw)
