"""Radial meshes on [0, R], quadrature against r dr, and difference operators.

The coordinate singularity at r = 0 is handled per angular index m: fields
with m >= 1 vanish at the origin (Dirichlet row), the m = 0 field is evenly
extended (ghost node), which turns the radial Laplacian at the origin into
twice the limiting second derivative.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

__all__ = [
    "RadialGrid",
    "build_grid",
    "quadrature",
    "radial_derivative",
    "apply_radial_laplacian",
]

MIN_NODES = 16


@dataclass(frozen=True)
class RadialGrid:
    """Nodes 0 = r_0 < r_1 < ... < r_N = R with quadrature weights for r dr.

    Weights integrate the piecewise-linear interpolant exactly, so constants
    integrate to R^2/2 to machine precision and smooth integrands converge at
    second order.
    """

    nodes: np.ndarray
    weights: np.ndarray
    grading: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "nodes", np.asarray(self.nodes, dtype=float))
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def n_intervals(self) -> int:
        return len(self.nodes) - 1

    @property
    def rmax(self) -> float:
        return float(self.nodes[-1])


def _pl_weights(nodes: np.ndarray) -> np.ndarray:
    """Exact integrals of the piecewise-linear hat functions against r dr."""
    r = nodes
    h = np.diff(r)
    w = np.zeros_like(r)
    # interval [r_i, r_{i+1}] contributes h/6*(2 r_i + r_{i+1}) to node i
    # and h/6*(r_i + 2 r_{i+1}) to node i+1
    w[:-1] += h * (2.0 * r[:-1] + r[1:]) / 6.0
    w[1:] += h * (r[:-1] + 2.0 * r[1:]) / 6.0
    return w


def _geometric_spacings(first: float, length: float, m: int) -> np.ndarray:
    """m interval widths first*q, first*q^2, ... summing to length (q > 0)."""

    def total(q: float) -> float:
        if abs(q - 1.0) < 1e-13:
            return first * m
        if m * np.log(q) > 650.0:
            return np.inf
        return first * q * (q**m - 1.0) / (q - 1.0)

    lo, hi = 1e-6, 1.0 + 1e-12
    if total(hi) < length:
        lo = hi
        hi = 1.0 + 2.0 / m
        while total(hi) < length:
            hi = 1.0 + 2.0 * (hi - 1.0)
            if hi > 1e6:
                raise ValueError("geometric grading ratio out of range")
    q = brentq(lambda x: total(x) - length, lo, hi, xtol=1e-15, rtol=1e-15)
    return first * q ** np.arange(1, m + 1)


def build_grid(R: float, n: int, grading: str = "uniform", ratio: float | None = None) -> RadialGrid:
    """Build a grid with n intervals on [0, R].

    grading:
      * "uniform"   equispaced nodes.
      * "geometric" interval widths in fixed ratio (default chosen so the
        last interval is ~200x the first; pass ``ratio`` to override).
      * "composite" uniform core on [0, min(1, R/10)] holding a quarter of
        the intervals, geometric stretch outside; resolves the defect core
        while keeping algebraic-tail domains affordable.
    """
    if not R > 0.0:
        raise ValueError(f"R must be positive, got {R}")
    if n < MIN_NODES:
        raise ValueError(f"need at least {MIN_NODES} intervals, got {n}")

    if grading == "uniform":
        nodes = np.linspace(0.0, R, n + 1)
    elif grading == "geometric":
        q = 200.0 ** (1.0 / (n - 1)) if ratio is None else float(ratio)
        if q <= 0.0:
            raise ValueError("geometric ratio must be positive")
        widths = q ** np.arange(n)
        widths *= R / widths.sum()
        nodes = np.concatenate([[0.0], np.cumsum(widths)])
        nodes[-1] = R
    elif grading == "composite":
        r_core = min(1.0, R / 10.0)
        n_core = int(np.ceil(n / 4))
        n_out = n - n_core
        if n_out < 4:
            raise ValueError("composite grading needs more intervals")
        h_core = r_core / n_core
        inner = np.linspace(0.0, r_core, n_core + 1)
        outer_widths = _geometric_spacings(h_core, R - r_core, n_out)
        nodes = np.concatenate([inner, r_core + np.cumsum(outer_widths)])
        nodes[-1] = R
    else:
        raise ValueError(f"unknown grading {grading!r}")

    return RadialGrid(nodes=nodes, weights=_pl_weights(nodes), grading=grading)


def quadrature(g: RadialGrid, f: np.ndarray) -> float:
    """Integral of f(r) r dr over [0, R] from nodal samples."""
    f = np.asarray(f, dtype=float)
    if f.shape != g.nodes.shape:
        raise ValueError(f"expected {g.nodes.shape} samples, got {f.shape}")
    return float(g.weights @ f)


def _nonuniform_d1_coeffs(r: np.ndarray):
    """Three-point first-derivative coefficients at interior nodes."""
    hm = r[1:-1] - r[:-2]
    hp = r[2:] - r[1:-1]
    denom = hm * hp * (hm + hp)
    cm = -hp * hp / denom
    c0 = (hp * hp - hm * hm) / denom
    cp = hm * hm / denom
    return cm, c0, cp


def _nonuniform_d2_coeffs(r: np.ndarray):
    """Three-point second-derivative coefficients at interior nodes."""
    hm = r[1:-1] - r[:-2]
    hp = r[2:] - r[1:-1]
    denom = hm * hp * (hm + hp)
    cm = 2.0 * hp / denom
    c0 = -2.0 * (hm + hp) / denom
    cp = 2.0 * hm / denom
    return cm, c0, cp


def radial_derivative(g: RadialGrid, f: np.ndarray) -> np.ndarray:
    """Second-order first derivative; one-sided stencils at both ends."""
    f = np.asarray(f, dtype=float)
    if f.shape != g.nodes.shape:
        raise ValueError(f"expected {g.nodes.shape} samples, got {f.shape}")
    r = g.nodes
    out = np.empty_like(f)
    cm, c0, cp = _nonuniform_d1_coeffs(r)
    out[1:-1] = cm * f[:-2] + c0 * f[1:-1] + cp * f[2:]

    # one-sided second-order endpoints
    h1 = r[1] - r[0]
    h2 = r[2] - r[1]
    out[0] = (
        -f[0] * (2.0 * h1 + h2) / (h1 * (h1 + h2))
        + f[1] * (h1 + h2) / (h1 * h2)
        - f[2] * h1 / (h2 * (h1 + h2))
    )
    hm1 = r[-1] - r[-2]
    hm2 = r[-2] - r[-3]
    out[-1] = (
        f[-1] * (2.0 * hm1 + hm2) / (hm1 * (hm1 + hm2))
        - f[-2] * (hm1 + hm2) / (hm1 * hm2)
        + f[-3] * hm1 / (hm2 * (hm1 + hm2))
    )
    return out


def apply_radial_laplacian(g: RadialGrid, f: np.ndarray, m: int) -> np.ndarray:
    """Apply f'' + f'/r - m^2 f / r^2 on the grid.

    Origin row: for m = 0 the even extension gives twice the limiting second
    derivative, 4 (f_1 - f_0) / r_1^2; for m >= 1 the row is the boundary
    identity f_0 (the field must vanish there).  The last row uses one-sided
    stencils and is normally overwritten by a boundary condition downstream.
    """
    if m < 0:
        raise ValueError("m must be nonnegative")
    f = np.asarray(f, dtype=float)
    if f.shape != g.nodes.shape:
        raise ValueError(f"expected {g.nodes.shape} samples, got {f.shape}")
    r = g.nodes
    out = np.empty_like(f)

    d1m, d10, d1p = _nonuniform_d1_coeffs(r)
    d2m, d20, d2p = _nonuniform_d2_coeffs(r)
    ri = r[1:-1]
    out[1:-1] = (
        (d2m + d1m / ri) * f[:-2]
        + (d20 + d10 / ri - m * m / (ri * ri)) * f[1:-1]
        + (d2p + d1p / ri) * f[2:]
    )

    if m == 0:
        out[0] = 4.0 * (f[1] - f[0]) / (r[1] * r[1])
    else:
        out[0] = f[0]

    # one-sided last row (second order)
    h1 = r[-1] - r[-2]
    h2 = r[-2] - r[-3]
    d2_last = (
        2.0 * f[-1] / (h1 * (h1 + h2))
        - 2.0 * f[-2] / (h1 * h2)
        + 2.0 * f[-3] / (h2 * (h1 + h2))
    )
    d1_last = (
        f[-1] * (2.0 * h1 + h2) / (h1 * (h1 + h2))
        - f[-2] * (h1 + h2) / (h1 * h2)
        + f[-3] * h1 / (h2 * (h1 + h2))
    )
    out[-1] = d2_last + d1_last / r[-1] - m * m * f[-1] / (r[-1] * r[-1])
    return out
