"""Embedded convex surfaces in H^3 built from a radial graph over S^2.

A surface is specified by a radial function r(theta, psi) > 0 about the base
point o.  Positions come from the polar chart; tangents are analytic for the
round and harmonic modes and finite-differenced for tabulated radii.  The
second fundamental form is h_ab = -<d_a d_b X, N>, with the second derivatives
taken by five-point differences of the tangent fields.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import lpmv

from .grid import (
    SphereGrid,
    dpsi,
    dtheta,
    metric_det,
    metric_inv,
    pad_theta,
)
from .lorentz import HyperboloidPoint, apply_boost, boost_to_origin, inner, polar_to_vec

__all__ = [
    "RadialSpec",
    "BoundaryData",
    "EmbeddedSurface",
    "build_surface",
    "validate_hypotheses",
    "HypothesisReport",
    "radii_and_alpha",
    "recenter_surface",
    "real_sph_harm",
    "shape_operator",
    "principal_curvatures",
]

MAX_HARMONIC_DEGREE = 4


def _assoc_legendre(l: int, m: int, x: np.ndarray) -> np.ndarray:
    # lpmv carries the Condon-Shortley phase; strip it.
    return (-1.0) ** m * lpmv(m, l, x)


def _norm_lm(l: int, m: int) -> float:
    return math.sqrt(
        (2 * l + 1) / (4.0 * math.pi) * math.factorial(l - m) / math.factorial(l + m)
    )


def real_sph_harm(l: int, m: int, theta: np.ndarray, psi: np.ndarray):
    """Real orthonormal spherical harmonic and its theta/psi derivatives.

    m = 0 gives the zonal harmonic; m > 0 the cos(m psi) branch, m < 0 the
    sin(|m| psi) branch.  Returns (Y, dY/dtheta, dY/dpsi).
    """
    if l < 0 or abs(m) > l:
        raise ValueError(f"invalid harmonic indices (l={l}, m={m})")
    am = abs(m)
    x = np.cos(theta)
    s = np.sin(theta)
    P = _assoc_legendre(l, am, x)
    if l == 0:
        dP = np.zeros_like(P)
    else:
        # d/dtheta P_l^m(cos theta) = (l cos th P_l^m - (l+m) P_{l-1}^m) / sin th
        Pm1 = _assoc_legendre(l - 1, am, x) if am <= l - 1 else np.zeros_like(P)
        dP = (l * x * P - (l + am) * Pm1) / s
    norm = _norm_lm(l, am)
    if m == 0:
        return norm * P, norm * dP, np.zeros_like(P)
    norm *= math.sqrt(2.0)
    if m > 0:
        c, dc = np.cos(am * psi), -am * np.sin(am * psi)
    else:
        c, dc = np.sin(am * psi), am * np.cos(am * psi)
    return norm * P * c, norm * dP * c, norm * P * dc


@dataclass(frozen=True)
class RadialSpec:
    """Radial-graph description of the initial surface.

    mode "round": r = r0; "harmonic": r = r0 (1 + sum eps Y_lm); "table":
    per-node radii given directly.
    """

    kappa: float
    mode: str = "round"
    r0: float = 1.0
    coefficients: tuple[tuple[int, int, float], ...] = ()
    table: np.ndarray | None = None

    def __post_init__(self):
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")
        if self.mode not in ("round", "harmonic", "table"):
            raise ValueError(f"unknown radial mode {self.mode!r}")
        if self.mode in ("round", "harmonic") and self.r0 <= 0:
            raise ValueError("r0 must be positive")
        for l, m, _ in self.coefficients:
            if l > MAX_HARMONIC_DEGREE:
                raise ValueError(f"harmonic degree l={l} exceeds {MAX_HARMONIC_DEGREE}")
            if abs(m) > l:
                raise ValueError(f"invalid harmonic order (l={l}, m={m})")
        if self.mode == "table" and self.table is None:
            raise ValueError("table mode needs per-node radii")

    @classmethod
    def round_sphere(cls, kappa: float, r0: float) -> "RadialSpec":
        return cls(kappa=kappa, mode="round", r0=r0)

    @classmethod
    def harmonic(cls, kappa: float, r0: float, coefficients) -> "RadialSpec":
        coeffs = tuple((int(l), int(m), float(e)) for l, m, e in coefficients)
        return cls(kappa=kappa, mode="harmonic", r0=r0, coefficients=coeffs)

    @classmethod
    def from_table(cls, kappa: float, values: np.ndarray) -> "RadialSpec":
        return cls(kappa=kappa, mode="table", table=np.asarray(values, dtype=float))

    def radial_field(self, grid: SphereGrid):
        """Radii and their chart derivatives: (r, dr/dth, dr/dps, analytic)."""
        th, ps = grid.theta2, grid.psi2
        if self.mode == "round":
            z = np.zeros(grid.shape)
            return np.full(grid.shape, self.r0), z, z.copy(), True
        if self.mode == "harmonic":
            r = np.ones(grid.shape)
            r_th = np.zeros(grid.shape)
            r_ps = np.zeros(grid.shape)
            for l, m, eps in self.coefficients:
                Y, dYt, dYp = real_sph_harm(l, m, th, ps)
                r += eps * Y
                r_th += eps * dYt
                r_ps += eps * dYp
            return self.r0 * r, self.r0 * r_th, self.r0 * r_ps, True
        r = self.table
        if r.shape != grid.shape:
            raise ValueError(f"radial table shape {r.shape} does not match grid {grid.shape}")
        return r.copy(), dtheta(r, grid, 1.0), dpsi(r, grid), False


@dataclass(frozen=True)
class BoundaryData:
    """Prescribed interior mean curvature H on the initial surface."""

    H: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "H", np.asarray(self.H, dtype=float))


@dataclass(frozen=True)
class EmbeddedSurface:
    """A convex radial-graph surface with its extrinsic geometry.

    X, N are Minkowski 4-vector fields; g, h the fundamental forms in the
    (theta, psi) chart; H0 the mean curvature, K the Gauss curvature.
    """

    grid: SphereGrid
    kappa: float
    r: np.ndarray
    X: np.ndarray
    N: np.ndarray
    X_th: np.ndarray
    X_ps: np.ndarray
    g: np.ndarray
    h: np.ndarray
    H0: np.ndarray
    K: np.ndarray
    analytic: bool = True


def _cross4(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Minkowski generalized cross product: Lorentz-orthogonal to a, b, c."""

    def minor(i, j, k):
        return (
            a[..., i] * (b[..., j] * c[..., k] - b[..., k] * c[..., j])
            - a[..., j] * (b[..., i] * c[..., k] - b[..., k] * c[..., i])
            + a[..., k] * (b[..., i] * c[..., j] - b[..., j] * c[..., i])
        )

    out = np.empty_like(a)
    out[..., 0] = minor(1, 2, 3)
    out[..., 1] = -minor(0, 2, 3)
    out[..., 2] = minor(0, 1, 3)
    # raise the time index: eta = diag(+,+,+,-)
    out[..., 3] = minor(0, 1, 2)
    return out


def _second_form(X_th, X_ps, N, grid) -> np.ndarray:
    """h_ab = -<d_a d_b X, N> by five-point differences of the tangents.

    Theta-tangent components flip across the poles; psi-tangents do not.
    """
    h = np.empty(grid.shape + (3,))
    h[..., 0] = -inner(dtheta(X_th, grid, -1.0, order=4), N)
    mixed = 0.5 * (dpsi(X_th, grid, order=4) + dtheta(X_ps, grid, 1.0, order=4))
    h[..., 1] = -inner(mixed, N)
    h[..., 2] = -inner(dpsi(X_ps, grid, order=4), N)
    return h


def shape_operator(g: np.ndarray, h: np.ndarray):
    """Mean curvature and determinant of g^{-1} h."""
    gi = metric_inv(g)
    H0 = gi[..., 0] * h[..., 0] + 2.0 * gi[..., 1] * h[..., 1] + gi[..., 2] * h[..., 2]
    detS = metric_det(h) / metric_det(g)
    return H0, detS


def principal_curvatures(g: np.ndarray, h: np.ndarray):
    """Eigenvalues of the shape operator, (smaller, larger)."""
    H0, detS = shape_operator(g, h)
    disc = np.sqrt(np.maximum(H0**2 - 4.0 * detS, 0.0))
    return 0.5 * (H0 - disc), 0.5 * (H0 + disc)


def build_surface(spec: RadialSpec, grid: SphereGrid) -> EmbeddedSurface:
    """Embed the radial graph and compute its extrinsic geometry."""
    k = spec.kappa
    r, r_th, r_ps, analytic = spec.radial_field(grid)
    if np.any(r <= 0):
        j, kk = np.argwhere(r <= 0)[0]
        raise ValueError(f"radial function must be positive; r <= 0 at node ({j}, {kk})")

    th, ps = grid.theta2, grid.psi2
    sth, cth = np.sin(th), np.cos(th)
    sps, cps = np.sin(ps), np.cos(ps)
    phi = np.stack([cth, sth * cps, sth * sps], axis=-1)
    dphi_th = np.stack([-sth, cth * cps, cth * sps], axis=-1)
    dphi_ps = np.stack([np.zeros_like(th), -sth * sps, sth * cps], axis=-1)

    sh = np.sinh(k * r) / k
    ch = np.cosh(k * r)

    X = np.empty(grid.shape + (4,))
    X[..., :3] = sh[..., None] * phi
    X[..., 3] = ch / k

    # dX = (dX/dr) dr + angular part; dX/dr = (cosh(kr) phi, sinh(kr))
    X_r = np.empty_like(X)
    X_r[..., :3] = ch[..., None] * phi
    X_r[..., 3] = k * sh

    X_th = X_r * r_th[..., None]
    X_th[..., :3] += sh[..., None] * dphi_th
    X_ps = X_r * r_ps[..., None]
    X_ps[..., :3] += sh[..., None] * dphi_ps

    w = _cross4(X, X_th, X_ps)
    norm_sq = inner(w, w)
    if np.any(norm_sq <= 0):
        j, kk = np.argwhere(norm_sq <= 0)[0]
        raise ValueError(f"degenerate tangent plane at node ({j}, {kk})")
    N = w / np.sqrt(norm_sq)[..., None]
    # outward orientation: positive pairing with the radial direction
    sign = np.sign(inner(N, X_r))
    if np.any(sign == 0):
        j, kk = np.argwhere(sign == 0)[0]
        raise ValueError(f"degenerate tangent plane at node ({j}, {kk})")
    N = N * sign[..., None]

    g = np.empty(grid.shape + (3,))
    g[..., 0] = inner(X_th, X_th)
    g[..., 1] = inner(X_th, X_ps)
    g[..., 2] = inner(X_ps, X_ps)
    if np.any(metric_det(g) <= 0):
        j, kk = np.argwhere(metric_det(g) <= 0)[0]
        raise ValueError(f"degenerate tangent plane at node ({j}, {kk})")

    h = _second_form(X_th, X_ps, N, grid)
    H0, detS = shape_operator(g, h)
    K = -(k**2) + detS

    return EmbeddedSurface(
        grid=grid, kappa=k, r=r, X=X, N=N, X_th=X_th, X_ps=X_ps,
        g=g, h=h, H0=H0, K=K, analytic=analytic,
    )


@dataclass(frozen=True)
class HypothesisReport:
    """Outcome of the hypothesis checks, one entry per condition.

    Each condition maps to (passed, margin, worst_node); a positive margin
    means the strict inequality holds with that much room.
    """

    conditions: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(ok for ok, _, _ in self.conditions.values())

    @property
    def failed_conditions(self) -> list[str]:
        return [name for name, (ok, _, _) in self.conditions.items() if not ok]

    def as_dict(self) -> dict:
        return {
            name: {"passed": bool(ok), "margin": float(m), "worst_node": [int(j), int(k)]}
            for name, (ok, m, (j, k)) in self.conditions.items()
        }


def _worst(field2d: np.ndarray):
    idx = np.unravel_index(np.argmin(field2d), field2d.shape)
    return float(field2d[idx]), idx


def validate_hypotheses(s: EmbeddedSurface, bd: BoundaryData) -> HypothesisReport:
    """Check K > -kappa^2, convexity (h > 0), H > 0 and H0 > 0."""
    conditions = {}

    margin, node = _worst(s.K + s.kappa**2)
    conditions["K > -kappa^2"] = (margin > 0, margin, node)

    lam_min, _ = principal_curvatures_of_form(s.h)
    margin, node = _worst(lam_min)
    conditions["convexity"] = (margin > 0, margin, node)

    H = np.broadcast_to(bd.H, s.grid.shape)
    margin, node = _worst(H)
    conditions["H > 0"] = (margin > 0, margin, node)

    margin, node = _worst(s.H0)
    conditions["H0 > 0"] = (margin > 0, margin, node)

    return HypothesisReport(conditions)


def principal_curvatures_of_form(h: np.ndarray):
    """Eigenvalues of a symmetric 2x2 form field (not the shape operator)."""
    half_tr = 0.5 * (h[..., 0] + h[..., 2])
    disc = np.sqrt(np.maximum((0.5 * (h[..., 0] - h[..., 2])) ** 2 + h[..., 1] ** 2, 0.0))
    return half_tr - disc, half_tr + disc


def radii_and_alpha(s: EmbeddedSurface):
    """Inscribed/circumscribed radii about o and the time-weight constant.

    For a convex radial graph about o the extrema of r are the radii of
    geodesic balls pinching the enclosed domain.  Returns (R1, R2, alpha, mu)
    with alpha = coth(kappa R1) + mu.
    """
    if np.any(s.r <= 0):
        raise ValueError("radial function must be positive everywhere")
    k = s.kappa
    R1 = float(np.min(s.r))
    R2 = float(np.max(s.r))
    ratio = np.sinh(k * R2) ** 2 / np.sinh(k * R1) ** 2 - 1.0
    mu = math.sqrt(max(ratio, 0.0)) / math.sinh(k * R1)
    alpha = 1.0 / math.tanh(k * R1) + mu
    return R1, R2, alpha, mu


def recenter_surface(s: EmbeddedSurface, p: HyperboloidPoint) -> EmbeddedSurface:
    """Boost the surface so that the interior point p becomes the base point.

    The boost is an isometry, so the fundamental forms and curvatures are
    carried over unchanged; only X, N, the tangents and r are remapped.
    """
    if abs(p.kappa - s.kappa) > 1e-12 * s.kappa:
        raise ValueError("incompatible curvature scales")
    B = boost_to_origin(p)
    X = apply_boost(B, s.X)
    r = np.arccosh(np.maximum(s.kappa * X[..., 3], 1.0)) / s.kappa
    return EmbeddedSurface(
        grid=s.grid, kappa=s.kappa, r=r, X=X, N=apply_boost(B, s.N),
        X_th=apply_boost(B, s.X_th), X_ps=apply_boost(B, s.X_ps),
        g=s.g, h=s.h, H0=s.H0, K=s.K, analytic=False,
    )
