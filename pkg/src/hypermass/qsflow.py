"""Quasi-spherical flow: evolve the lapse u outward along the foliation.

The parabolic equation

    2 H0 du/drho = 2 u^2 Lap_rho u + (u - u^3)(R^rho + 6 kappa^2),
    u(., 0) = H0 / H,

is integrated with explicit first-order steps under a conservative stability
bound; leaf geometry is regenerated from the closed-form foliation at every
step, so u is the only integrated quantity.  u == 1 is exactly stationary.
"""

from __future__ import annotations

import math
import os
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernel
from .foliation import FoliationLeaf, check_leaf_bounds, leaf_at
from .grid import laplace_beltrami, metric_det, metric_inv
from .surface import BoundaryData, EmbeddedSurface, radii_and_alpha

__all__ = [
    "FlowControls",
    "QSState",
    "FlowError",
    "initial_u",
    "step_u",
    "stable_step",
    "run_flow",
    "FlowSample",
    "FlowResult",
    "transport_scalars",
]


class FlowError(RuntimeError):
    """Numerical failure of the flow; carries the rho where it happened."""

    def __init__(self, message: str, rho: float):
        super().__init__(f"{message} (rho = {rho:.6g})")
        self.rho = rho


@dataclass(frozen=True)
class FlowControls:
    """Integration controls: extent, CFL fraction and sample spacing."""

    rho_max: float
    cfl: float = 0.4
    sample_every: float = 0.25
    max_principle_tol: float = 1e-8

    def __post_init__(self):
        if self.rho_max <= 0:
            raise ValueError("rho_max must be positive")
        if self.sample_every <= 0:
            raise ValueError("sample_every must be positive")
        if self.cfl <= 0:
            raise ValueError("cfl must be positive")
        if self.cfl > 1.0:
            warnings.warn(f"cfl = {self.cfl} clamped to 1", stacklevel=2)
            object.__setattr__(self, "cfl", 1.0)

    @classmethod
    def default_for(cls, kappa: float, **kw) -> "FlowControls":
        kw.setdefault("rho_max", 8.0 / kappa)
        kw.setdefault("sample_every", 0.25 / kappa)
        return cls(**kw)


@dataclass(frozen=True)
class QSState:
    """Flow state: the lapse u on the leaf at distance rho."""

    rho: float
    u: np.ndarray
    leaf: FoliationLeaf


def initial_u(s: EmbeddedSurface, bd: BoundaryData) -> np.ndarray:
    """Initial lapse H0 / H."""
    H = np.broadcast_to(bd.H, s.grid.shape)
    if np.any(H <= 0):
        raise ValueError("prescribed mean curvature H must be positive")
    if np.any(s.H0 <= 0):
        raise ValueError("surface mean curvature H0 must be positive")
    return s.H0 / H


def stable_step(leaf: FoliationLeaf, u: np.ndarray, cfl: float) -> float:
    """CFL-limited step: cfl * min(2 H0) * (min metric spacing)^2 / (2 max u^2).

    The spacing is measured in the leaf metric; the result is capped at
    1e-3 / kappa so the reaction term stays resolved on large leaves.
    """
    grid = leaf.grid
    sp2 = min(
        float(np.min(leaf.g[..., 0])) * grid.dtheta**2,
        float(np.min(leaf.g[..., 2])) * grid.dpsi**2,
    )
    d = cfl * float(np.min(2.0 * leaf.H0)) * sp2 / (2.0 * float(np.max(u**2)))
    return min(d, 1e-3 / leaf.kappa)


def step_u(state: QSState, d_rho: float) -> QSState:
    """One explicit update of u on the current leaf, then advance the leaf."""
    if d_rho <= 0:
        raise ValueError("d_rho must be positive")
    leaf = state.leaf
    k = leaf.kappa
    lap = laplace_beltrami(state.u, leaf.g, leaf.grid)
    rhs = (
        2.0 * state.u**2 * lap
        + (state.u - state.u**3) * (leaf.Rrho + 6.0 * k**2)
    ) / (2.0 * leaf.H0)
    u_new = state.u + d_rho * rhs
    if np.any(u_new <= 0):
        raise FlowError("stability violated; reduce cfl", state.rho)
    if not np.all(np.isfinite(u_new)):
        raise FlowError("non-finite values in u", state.rho)
    return QSState(state.rho + d_rho, u_new, leaf_at(leaf.base, state.rho + d_rho))


def _shape_invariants(s: EmbeddedSurface):
    """Per-node invariants driving the closed-form leaf transport."""
    gi = metric_inv(s.g)
    h = s.h

    def to22(m3):
        m = np.empty(m3.shape[:-1] + (2, 2))
        m[..., 0, 0] = m3[..., 0]
        m[..., 0, 1] = m3[..., 1]
        m[..., 1, 0] = m3[..., 1]
        m[..., 1, 1] = m3[..., 2]
        return m

    G_i = to22(gi)
    H_m = to22(h)
    S = G_i @ H_m
    t0 = S[..., 0, 0] + S[..., 1, 1]
    d0 = S[..., 0, 0] * S[..., 1, 1] - S[..., 0, 1] * S[..., 1, 0]

    w0 = np.sqrt(metric_det(s.g))
    GiHGi = G_i @ H_m @ G_i
    SGiSt = GiHGi @ H_m @ G_i
    hGih = H_m @ G_i @ H_m

    def comp(m):
        return m[..., 0, 0], m[..., 0, 1], m[..., 1, 1]

    a1 = tuple(w0 * c for c in comp(G_i))
    a2 = tuple(2.0 * w0 * c for c in comp(GiHGi))
    a3 = tuple(w0 * c for c in comp(SGiSt))
    b3 = tuple(np.ascontiguousarray(c) for c in comp(hGih))
    return np.ascontiguousarray(t0), np.ascontiguousarray(d0), w0, a1, a2, a3, b3


def transport_scalars(s: EmbeddedSurface, rho: float):
    """Leaf mean curvature and R^rho + 6 kappa^2 from the transported shape.

    Same closed-form coefficients the stepping kernel uses; handy as the
    scalar reduction of the flow on round data.
    """
    k = s.kappa
    t0, d0, *_ = _shape_invariants(s)
    ch, sh = math.cosh(k * rho), math.sinh(k * rho)
    dM = ch**2 + ch * (sh / k) * t0 + (sh / k) ** 2 * d0
    H0 = (2 * k * sh * ch + (ch**2 + sh**2) * t0 + (2 * ch * sh / k) * d0) / dM
    RR = 2.0 * (k**2 * sh**2 + k * sh * ch * t0 + ch**2 * d0) / dM + 4.0 * k**2
    return H0, RR


@dataclass(frozen=True)
class FlowSample:
    """Recorded state and diagnostics at one sampled rho."""

    rho: float
    u: np.ndarray
    min_u: float
    max_u: float
    bound_margins: dict
    chunk_min_u: float
    chunk_max_u: float


@dataclass(frozen=True)
class FlowResult:
    """Flow samples plus the frozen initial-surface data they refer to."""

    surface: EmbeddedSurface
    boundary: BoundaryData
    controls: FlowControls
    u0: np.ndarray
    samples: list[FlowSample] = field(default_factory=list)
    n_steps: int = 0
    R1: float = 0.0
    R2: float = 0.0
    alpha: float = 1.0
    mu: float = 0.0
    max_principle_ok: bool = True
    bracket: tuple[float, float] = (0.0, 0.0)

    @property
    def kappa(self) -> float:
        return self.surface.kappa

    @property
    def rhos(self) -> np.ndarray:
        return np.array([s.rho for s in self.samples])


def _numba_threads():
    cap = os.environ.get("HYPERMASS_THREADS")
    if cap:
        try:
            import numba

            numba.set_num_threads(max(1, min(int(cap), numba.config.NUMBA_NUM_THREADS)))
        except (ValueError, ImportError):
            pass


def run_flow(s: EmbeddedSurface, bd: BoundaryData, ctl: FlowControls) -> FlowResult:
    """Integrate the flow to rho_max, sampling every ctl.sample_every."""
    _numba_threads()
    grid = s.grid
    n_th, n_ps = grid.shape
    k = s.kappa

    u = initial_u(s, bd)
    R1, R2, alpha, mu = radii_and_alpha(s)

    t0, d0, w0, a1, a2, a3, b3 = _shape_invariants(s)
    iw0 = 1.0 / w0
    g11 = np.ascontiguousarray(s.g[..., 0])
    g22 = np.ascontiguousarray(s.g[..., 2])
    h11 = np.ascontiguousarray(s.h[..., 0])
    h22 = np.ascontiguousarray(s.h[..., 2])

    padded = lambda: np.zeros((n_th + 4, n_ps + 4))
    upad_a, upad_b = padded(), padded()
    Apad, Bpad, Cpad = padded(), padded(), padded()
    fth = np.zeros((n_th, n_ps + 4))
    work = [np.zeros(grid.shape) for _ in range(3)]
    kshift = (np.arange(n_ps) + n_ps // 2) % n_ps + 2

    n_samp = max(1, round(ctl.rho_max / ctl.sample_every))
    targets = [min(i * ctl.rho_max / n_samp, ctl.rho_max) for i in range(n_samp + 1)]

    directions = None
    samples: list[FlowSample] = []
    total_steps = 0
    rho = 0.0

    def record(rho_s, u_s, cmin, cmax):
        leaf = leaf_at(s, rho_s)
        rep = check_leaf_bounds(leaf, R1, R2, mu, directions)
        samples.append(
            FlowSample(
                rho=rho_s,
                u=u_s.copy(),
                min_u=float(np.min(u_s)),
                max_u=float(np.max(u_s)),
                bound_margins=rep.margins,
                chunk_min_u=cmin,
                chunk_max_u=cmax,
            )
        )

    record(0.0, u, float(np.min(u)), float(np.max(u)))

    cap = 1e-3 / k
    for target in targets[1:]:
        upad_a[2 : n_th + 2, 2 : n_ps + 2] = u
        rho_out, steps, cmin, cmax, status, which = _kernel.advance_chunk(
            upad_a, upad_b, rho, target, k, ctl.cfl, cap, 200_000_000,
            t0, d0, iw0,
            g11, g22, h11, h22, b3[0], b3[2],
            a1[0], a1[1], a1[2], a2[0], a2[1], a2[2], a3[0], a3[1], a3[2],
            Apad, Bpad, Cpad, fth,
            work[0], work[1], work[2],
            kshift,
            grid.dtheta, grid.dpsi, (0.5 * grid.dpsi) ** 2 / math.sin(0.5 * grid.dpsi) ** 2,
        )
        buf = upad_a if which == 0 else upad_b
        u = buf[2 : n_th + 2, 2 : n_ps + 2].copy()
        total_steps += steps
        rho = rho_out
        if status == 1:
            raise FlowError("stability violated; reduce cfl", rho)
        if status == 2:
            raise FlowError("non-finite values in u", rho)
        if status == 3:
            raise FlowError("step limit exceeded", rho)
        if steps == 0:
            cmin = float(np.min(u))
            cmax = float(np.max(u))
        record(rho, u, cmin, cmax)

    u0 = initial_u(s, bd)
    tol = ctl.max_principle_tol
    lo_b = min(1.0, float(np.min(u0))) - tol
    hi_b = max(1.0, float(np.max(u0))) + tol
    ok = all(lo_b <= smp.chunk_min_u and smp.chunk_max_u <= hi_b for smp in samples)

    return FlowResult(
        surface=s, boundary=bd, controls=ctl, u0=u0, samples=samples,
        n_steps=total_steps, R1=R1, R2=R2, alpha=alpha, mu=mu,
        max_principle_ok=ok, bracket=(lo_b, hi_b),
    )
