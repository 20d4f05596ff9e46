"""Material parameters, derived constants, regimes and the bulk potential.

The order parameter of a half-integer defect of winding index k/2 reduces to
two radial amplitudes (u, v).  Everything downstream (solvers, bound checks,
stability forms) is driven by the quartic-plus-cubic bulk density in the
(u, v) plane and a handful of constants derived from the material triple
(a2, b2, c2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "MaterialParams",
    "DerivedConstants",
    "Regime",
    "RegimeTag",
    "derive_constants",
    "classify_regime",
    "bulk_density",
    "bulk_gradient",
    "bulk_hessian",
]

SQRT6 = math.sqrt(6.0)
SQRT23 = math.sqrt(2.0 / 3.0)

# Relative tolerance for detecting the degenerate regime b^4 = 3 a^2 c^2.
# Deliberately tight: the degenerate branch (v locked at its far-field value)
# is structurally different and must not be triggered by roundoff.
CRITICAL_REL_TOL = 1e-9


@dataclass(frozen=True)
class MaterialParams:
    """Material triple (a2, b2, c2) plus the half-winding index k.

    b2 == 0 is a diagnostic configuration (no entire-plane solution exists
    for it) and must be opted into explicitly via ``b_zero_diagnostic``.
    """

    a2: float
    b2: float
    c2: float
    k: int
    b_zero_diagnostic: bool = False

    def __post_init__(self) -> None:
        if not (self.a2 > 0.0):
            raise ValueError(f"a2 must be positive, got {self.a2}")
        if not (self.c2 > 0.0):
            raise ValueError(f"c2 must be positive, got {self.c2}")
        if self.b2 < 0.0:
            raise ValueError(f"b2 must be nonnegative, got {self.b2}")
        if self.b2 == 0.0 and not self.b_zero_diagnostic:
            raise ValueError(
                "b2 == 0 is accepted only with b_zero_diagnostic=True"
            )
        if int(self.k) != self.k or self.k == 0:
            raise ValueError(f"k must be a nonzero integer, got {self.k}")
        object.__setattr__(self, "k", int(self.k))


@dataclass(frozen=True)
class DerivedConstants:
    """Constants derived from a MaterialParams triple.

    s_plus/s_minus are the roots of 2 c2 s^2 - b2 s - 3 a2 = 0; the far-field
    amplitudes are u_inf = s_plus/sqrt(2), v_inf = -s_plus/sqrt(6); f_min is
    the bulk density at that state, used to renormalize energies on large
    domains.  mu = b2/sqrt(b2^2 + 24 a2 c2) lies in (0, 1) for b2 > 0 and is
    the contraction factor of the subcritical comparison problem.
    """

    s_plus: float
    s_minus: float
    mu: float
    u_inf: float
    v_inf: float
    f_min: float


class RegimeTag:
    """Regime labels keyed on the sign of b2^2 - 3 a2 c2."""

    SUPERCRITICAL = "SUPERCRITICAL"
    CRITICAL = "CRITICAL"
    SUBCRITICAL = "SUBCRITICAL"
    B_ZERO = "B_ZERO"


@dataclass(frozen=True)
class Regime:
    tag: str
    discriminant: float
    tolerance: float


def derive_constants(p: MaterialParams) -> DerivedConstants:
    """Closed-form constants for a parameter triple."""
    root = math.sqrt(p.b2 * p.b2 + 24.0 * p.a2 * p.c2)
    s_plus = (p.b2 + root) / (4.0 * p.c2)
    s_minus = (p.b2 - root) / (4.0 * p.c2)
    mu = p.b2 / root
    u_inf = s_plus / math.sqrt(2.0)
    v_inf = -s_plus / SQRT6
    f_min = (
        -p.a2 * s_plus**2 / 3.0
        + p.c2 * s_plus**4 / 9.0
        - 2.0 * p.b2 * s_plus**3 / 27.0
    )
    return DerivedConstants(
        s_plus=s_plus,
        s_minus=s_minus,
        mu=mu,
        u_inf=u_inf,
        v_inf=v_inf,
        f_min=f_min,
    )


def classify_regime(p: MaterialParams, tol: float = CRITICAL_REL_TOL) -> Regime:
    """Classify the parameter triple by the sign of b2^2 - 3 a2 c2.

    The degenerate (CRITICAL) band is |discriminant| <= tol * (b2^2 + 3 a2 c2).
    """
    if tol < 0.0:
        raise ValueError("tol must be nonnegative")
    disc = p.b2 * p.b2 - 3.0 * p.a2 * p.c2
    if p.b2 == 0.0:
        tag = RegimeTag.B_ZERO
    elif abs(disc) <= tol * (p.b2 * p.b2 + 3.0 * p.a2 * p.c2):
        tag = RegimeTag.CRITICAL
    elif disc > 0.0:
        tag = RegimeTag.SUPERCRITICAL
    else:
        tag = RegimeTag.SUBCRITICAL
    return Regime(tag=tag, discriminant=disc, tolerance=tol)


def bulk_density(p: MaterialParams, u, v):
    """Bulk free-energy density in the (u, v) plane.

    Accepts scalars or arrays (broadcast).
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    q = u * u + v * v
    val = -0.5 * p.a2 * q + 0.25 * p.c2 * q * q - p.b2 / (3.0 * SQRT6) * v * (
        v * v - 3.0 * u * u
    )
    return val if val.shape else float(val)


def bulk_gradient(p: MaterialParams, u, v):
    """Gradient (d/du, d/dv) of bulk_density; broadcasts like bulk_density.

    The u component equals u times the bracket of the u equation, the v
    component is the full right side of the v equation; this is what makes
    the coupled system the Euler-Lagrange system of the reduced energy.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    q = u * u + v * v
    gu = u * (-p.a2 + SQRT23 * p.b2 * v + p.c2 * q)
    gv = v * (-p.a2 - p.b2 / SQRT6 * v + p.c2 * q) + p.b2 / SQRT6 * u * u
    if gu.shape:
        return gu, gv
    return float(gu), float(gv)


def bulk_hessian(p: MaterialParams, u, v):
    """Second derivative matrix of bulk_density.

    For scalar inputs returns a (2, 2) array; for array inputs the components
    are stacked along the last axes, shape (..., 2, 2).
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    q = u * u + v * v
    huu = -p.a2 + SQRT23 * p.b2 * v + p.c2 * (q + 2.0 * u * u)
    huv = SQRT23 * p.b2 * u + 2.0 * p.c2 * u * v
    hvv = -p.a2 - 2.0 * p.b2 / SQRT6 * v + p.c2 * (q + 2.0 * v * v)
    out = np.stack(
        [np.stack([huu, huv], axis=-1), np.stack([huv, hvv], axis=-1)],
        axis=-2,
    )
    return out
