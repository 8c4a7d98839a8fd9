"""Minkowski 4-vector algebra and the hyperboloid model of H^3 with curvature -kappa^2.

Vectors are numpy arrays whose last axis holds (x1, x2, x3, t); the bilinear
form has signature (+, +, +, -).  The upper hyperboloid

    x1^2 + x2^2 + x3^2 - t^2 = -1/kappa^2,   t > 0

carries the hyperbolic metric, with base point o = (0, 0, 0, 1/kappa).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "inner",
    "classify",
    "PolarCoords",
    "HyperboloidPoint",
    "from_polar",
    "to_polar",
    "polar_to_vec",
    "distance",
    "cosh_kappa_distance",
    "sample_null_directions",
    "sample_unit_directions",
    "boost_to_origin",
    "apply_boost",
    "base_point",
]

# Signs of the metric diagonal, ordered (x1, x2, x3, t).
METRIC_DIAG = np.array([1.0, 1.0, 1.0, -1.0])

# cosh arguments this far below 1 are treated as roundoff at coincident points.
_COSH_CLAMP = 1e-12

_GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


def inner(a, b):
    """Lorentz inner product a.b = a1*b1 + a2*b2 + a3*b3 - at*bt.

    Broadcasts over leading axes; the last axis must have length 4.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return (
        a[..., 0] * b[..., 0]
        + a[..., 1] * b[..., 1]
        + a[..., 2] * b[..., 2]
        - a[..., 3] * b[..., 3]
    )


def classify(v, tol: float = 1e-12) -> str:
    """Causal class of a single 4-vector.

    Returns one of "zero", "future-null", "past-null", "future-timelike",
    "past-timelike", "spacelike".  The self inner product is compared to
    zero within ``tol``; "future" requires t > 0.
    """
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    v = np.asarray(v, dtype=float)
    if np.max(np.abs(v)) <= tol:
        return "zero"
    q = float(inner(v, v))
    t = float(v[..., 3])
    if abs(q) <= tol:
        return "future-null" if t > 0 else "past-null"
    if q < 0:
        return "future-timelike" if t > 0 else "past-timelike"
    return "spacelike"


@dataclass(frozen=True)
class PolarCoords:
    """Geodesic polar coordinates about the base point o.

    r is the geodesic distance from o, theta in [0, pi] the angle from the
    x1-axis, psi in [0, 2*pi) the azimuth in the (x2, x3)-plane.
    """

    r: float
    theta: float
    psi: float

    def __post_init__(self):
        if self.r < 0:
            raise ValueError(f"polar radius must be >= 0, got {self.r}")
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError(f"theta must lie in [0, pi], got {self.theta}")
        if not 0.0 <= self.psi < 2.0 * math.pi:
            raise ValueError(f"psi must lie in [0, 2*pi), got {self.psi}")


@dataclass(frozen=True)
class HyperboloidPoint:
    """A point of the upper hyperboloid, together with its curvature scale."""

    vec: np.ndarray
    kappa: float

    def __post_init__(self):
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")
        v = np.asarray(self.vec, dtype=float)
        if v.shape != (4,):
            raise ValueError("hyperboloid point needs a single 4-vector")
        object.__setattr__(self, "vec", v)
        target = -1.0 / self.kappa**2
        q = float(inner(v, v))
        if abs(q - target) > 1e-10 * abs(target):
            raise ValueError(
                f"vector does not lie on the hyperboloid: <v,v> = {q}, expected {target}"
            )
        if v[3] <= 0:
            raise ValueError("point lies on the lower sheet (t <= 0)")


def base_point(kappa: float) -> HyperboloidPoint:
    """The distinguished point o = (0, 0, 0, 1/kappa)."""
    return HyperboloidPoint(np.array([0.0, 0.0, 0.0, 1.0 / kappa]), kappa)


def polar_to_vec(r, theta, psi, kappa: float):
    """Vectorized polar chart: arrays r, theta, psi -> 4-vectors (..., 4).

    Components are (sinh(kr) cos th, sinh(kr) sin th cos ps,
    sinh(kr) sin th sin ps, cosh(kr)) / kappa.
    """
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    psi = np.asarray(psi, dtype=float)
    sh = np.sinh(kappa * r) / kappa
    out = np.empty(np.broadcast(r, theta, psi).shape + (4,))
    out[..., 0] = sh * np.cos(theta)
    out[..., 1] = sh * np.sin(theta) * np.cos(psi)
    out[..., 2] = sh * np.sin(theta) * np.sin(psi)
    out[..., 3] = np.cosh(kappa * r) / kappa
    return out


def from_polar(p: PolarCoords, kappa: float) -> HyperboloidPoint:
    """Map polar coordinates to the hyperboloid."""
    return HyperboloidPoint(polar_to_vec(p.r, p.theta, p.psi, kappa), kappa)


def to_polar(point: HyperboloidPoint) -> PolarCoords:
    """Invert the polar chart; psi is returned in [0, 2*pi)."""
    k = point.kappa
    v = point.vec
    r = math.acosh(max(k * v[3], 1.0)) / k
    if r == 0.0:
        return PolarCoords(0.0, 0.0, 0.0)
    sh = math.sinh(k * r) / k
    c = min(max(v[0] / sh, -1.0), 1.0)
    theta = math.acos(c)
    psi = math.atan2(v[2], v[1]) % (2.0 * math.pi)
    return PolarCoords(r, theta, psi)


def cosh_kappa_distance(a, b, kappa: float):
    """cosh(kappa * d) for broadcast arrays of hyperboloid vectors."""
    return np.maximum(-(kappa**2) * inner(a, b), 1.0)


def distance(a: HyperboloidPoint, b: HyperboloidPoint) -> float:
    """Geodesic distance, from cosh(kappa d) = -kappa^2 <a, b>."""
    if abs(a.kappa - b.kappa) > 1e-12 * max(a.kappa, b.kappa):
        raise ValueError("incompatible curvature scales")
    k = a.kappa
    arg = -(k**2) * float(inner(a.vec, b.vec))
    if arg < 1.0 - _COSH_CLAMP:
        raise ValueError(
            f"cosh argument {arg} below 1; points are not on a common hyperboloid"
        )
    return math.acosh(max(arg, 1.0)) / k


def sample_unit_directions(n: int) -> np.ndarray:
    """Deterministic spiral covering of S^2; returns (n, 3) unit vectors.

    The first point is the north pole (0, 0, 1); subsequent points descend
    the sphere along a golden-angle spiral, so any n gives a reproducible,
    roughly uniform covering.
    """
    if n < 1:
        raise ValueError("need n >= 1 directions")
    i = np.arange(n, dtype=float)
    z = 1.0 - 2.0 * i / max(n - 1, 1)
    rho = np.sqrt(np.maximum(1.0 - z * z, 0.0))
    ang = i * _GOLDEN_ANGLE
    out = np.empty((n, 3))
    out[:, 0] = rho * np.cos(ang)
    out[:, 1] = rho * np.sin(ang)
    out[:, 2] = z
    return out


def sample_null_directions(n: int) -> np.ndarray:
    """n future null vectors (w1, w2, w3, 1) with w on the spiral covering."""
    w = sample_unit_directions(n)
    out = np.empty((n, 4))
    out[:, :3] = w
    out[:, 3] = 1.0
    return out


def boost_to_origin(p: HyperboloidPoint) -> np.ndarray:
    """Lorentz boost carrying p to the base point o; returns a 4x4 matrix.

    The boost is along the spatial direction of p, with rapidity -kappa*r,
    and restricts to an isometry of the hyperboloid.
    """
    k = p.kappa
    v = k * p.vec  # unit timelike
    sh = math.sqrt(max(v[0] ** 2 + v[1] ** 2 + v[2] ** 2, 0.0))
    B = np.eye(4)
    if sh < 1e-15:
        return B
    ch = v[3]
    w = v[:3] / sh
    B[:3, :3] -= (1.0 - ch) * np.outer(w, w)
    B[:3, 3] = -sh * w
    B[3, :3] = -sh * w
    B[3, 3] = ch
    return B


def apply_boost(B: np.ndarray, field):
    """Apply a Lorentz matrix to a 4-vector field of shape (..., 4)."""
    return np.einsum("ij,...j->...i", B, np.asarray(field, dtype=float))
