"""Qualitative-bound verification and far-field asymptotics of profiles.

Every converged sign-invariant profile must satisfy a stack of pointwise
bounds (positivity, the cone condition, the amplitude ball, a regime
dependent window for v, and a comparison ordering against the scalar
profiles).  At infinity both components relax to their limits like r^-2
with closed-form coefficients; fits against that law and decay-order
estimates of the corrected remainders are the truncation diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    MaterialParams,
    RegimeTag,
    classify_regime,
    derive_constants,
)
from .solver import ProfilePair, solve_scalar

__all__ = [
    "RegimeMismatch",
    "BoundRecord",
    "BoundsReport",
    "TailFit",
    "DecoupledTailReport",
    "predicted_tail_coeffs",
    "verify_bounds",
    "fit_tail",
    "decoupled_tail_check",
]

SQRT3 = math.sqrt(3.0)
SQRT6 = math.sqrt(6.0)


class RegimeMismatch(ValueError):
    """Profile parameters disagree with the regime the caller asked for."""


@dataclass(frozen=True)
class BoundRecord:
    name: str
    satisfied: bool
    worst_violation: float
    worst_location: float


@dataclass(frozen=True)
class BoundsReport:
    regime: str
    tol: float
    bounds: dict[str, BoundRecord] = field(default_factory=dict)

    @property
    def all_satisfied(self) -> bool:
        return all(b.satisfied for b in self.bounds.values())


@dataclass(frozen=True)
class TailFit:
    """Least-squares fit of c0 - c2 / r^2 on a far-field window.

    ``fitted_*_coeff`` are the deficit coefficients c2 (positive when the
    component approaches its limit from below/above as predicted), directly
    comparable with ``predicted_*_coeff``.  ``remainder_order_estimate`` is
    the binned log-log decay slope of the u fit residual (about 4 when the
    window is clean, meaningless at the roundoff floor).
    """

    window: tuple[float, float]
    fitted_u_const: float
    fitted_u_coeff: float
    fitted_v_const: float
    fitted_v_coeff: float
    predicted_u_coeff: float
    predicted_v_coeff: float
    rel_err_u: float
    rel_err_v: float
    remainder_order_estimate: float


@dataclass(frozen=True)
class DecoupledTailReport:
    """Decay diagnostics of the decoupled combinations of the tail.

    X = (u - u_inf) + sqrt(3) (v - v_inf) relaxes like -C r^-2 with
    C = k^2 / (sqrt(2) b2); after adding back the predicted r^-2 parts both
    corrected combinations should decay with order about 4.
    """

    window: tuple[float, float]
    x_coeff_fitted: float
    x_coeff_predicted: float
    x_rel_err: float
    xbar_order: float
    ybar_order: float


def predicted_tail_coeffs(p: MaterialParams) -> tuple[float, float]:
    """Closed-form r^-2 deficit coefficients (A_u, A_v) of the far field.

    u ~ u_inf - A_u / r^2 and v ~ v_inf - A_v / r^2.  The shared denominator
    b2 (4 c2 s_plus - b2) equals b2 sqrt(b2^2 + 24 a2 c2); in the degenerate
    regime c2 s_plus = b2 makes A_v vanish identically.
    """
    if p.b2 == 0.0:
        raise ValueError("tail coefficients are undefined for b2 = 0")
    d = derive_constants(p)
    k2 = float(p.k * p.k)
    cs = p.c2 * d.s_plus
    denom = p.b2 * (4.0 * cs - p.b2)
    a_u = (math.sqrt(2.0) * k2 / 2.0) * (2.0 * p.b2 + cs) / denom
    a_v = (SQRT6 * k2 / 2.0) * (cs - p.b2) / denom
    return a_u, a_v


def _worst(r: np.ndarray, excess: np.ndarray) -> tuple[float, float]:
    i = int(np.argmax(excess))
    return float(max(excess[i], 0.0)), float(r[i])


def verify_bounds(
    profile: ProfilePair,
    tol: float = 1e-6,
    expect_regime: str | None = None,
) -> BoundsReport:
    """Check every qualitative bound at the interior nodes.

    A bound is satisfied when its worst violation does not exceed ``tol``.
    The v window and the comparison profile depend on the regime; for the
    b2 = 0 diagnostic both are skipped (not defined there).
    """
    p = profile.params
    reg = classify_regime(p)
    if expect_regime is not None and expect_regime != reg.tag:
        raise RegimeMismatch(
            f"profile parameters classify as {reg.tag}, not {expect_regime}"
        )
    d = derive_constants(p)
    r = profile.r[1:-1]
    u = profile.u[1:-1]
    v = profile.v[1:-1]

    records: dict[str, BoundRecord] = {}

    def add(name: str, excess: np.ndarray) -> None:
        worst, where = _worst(r, excess)
        records[name] = BoundRecord(
            name=name,
            satisfied=bool(worst <= tol),
            worst_violation=worst,
            worst_location=where,
        )

    add("POSITIVITY", -u)
    add("NEGATIVITY", v)
    add("CONE", u + SQRT3 * v)
    add("BALL", u * u + v * v - 2.0 / 3.0 * d.s_plus**2)
    add("U_UPPER", u - d.u_inf)

    if reg.tag != RegimeTag.B_ZERO:
        lo_sub = math.sqrt(2.0 / 3.0) * d.s_minus
        if reg.tag == RegimeTag.SUPERCRITICAL:
            v_lo, v_hi = d.v_inf, lo_sub
        elif reg.tag == RegimeTag.CRITICAL:
            v_lo = v_hi = d.v_inf
        else:
            v_lo, v_hi = lo_sub, d.v_inf
        add("V_WINDOW", np.maximum(v_lo - v, v - v_hi))

        comparison_kind = (
            "U_I"
            if reg.tag in (RegimeTag.SUPERCRITICAL, RegimeTag.CRITICAL)
            else "U_III"
        )
        comp = solve_scalar(p, profile.grid, comparison_kind)
        add("COMPARISON", comp.w[1:-1] - u)

    return BoundsReport(regime=reg.tag, tol=tol, bounds=records)


def _window_slice(profile: ProfilePair, window: tuple[float, float], min_nodes: int):
    r_lo, r_hi = window
    r = profile.r
    if r_lo >= r_hi or r_lo < 0.0 or r_hi > profile.grid.rmax * (1 + 1e-12):
        raise ValueError(f"window {window} outside the solution domain")
    mask = (r >= r_lo) & (r <= r_hi)
    if int(mask.sum()) < min_nodes:
        raise ValueError(
            f"window {window} holds {int(mask.sum())} nodes, need {min_nodes}"
        )
    return mask


def _binned_order(r: np.ndarray, resid: np.ndarray, nbins: int = 4) -> float:
    """Decay order from binned RMS amplitudes on a log-log scale.

    Robust against sign changes of the residual, unlike a pointwise
    log|resid| regression.
    """
    edges = np.geomspace(r[0], r[-1] * (1 + 1e-12), nbins + 1)
    cent, amp = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        sel = (r >= a) & (r < b)
        if sel.sum() < 3:
            continue
        rms = float(np.sqrt(np.mean(resid[sel] ** 2)))
        if rms <= 0.0:
            continue
        cent.append(math.sqrt(a * b))
        amp.append(rms)
    if len(cent) < 2:
        return float("nan")
    slope = np.polyfit(np.log(cent), np.log(amp), 1)[0]
    return float(-slope)


def fit_tail(profile: ProfilePair, window: tuple[float, float]) -> TailFit:
    """Weighted least squares of u and v against the basis {1, r^-2}.

    The fitted constants are left free rather than pinned at the far-field
    values; their deviation from u_inf/v_inf is itself a truncation-error
    diagnostic.  Weights are the grid quadrature weights on the window.
    """
    mask = _window_slice(profile, window, min_nodes=20)
    r = profile.r[mask]
    wq = profile.grid.weights[mask]
    basis = np.column_stack([np.ones_like(r), r**-2.0])
    sw = np.sqrt(wq)

    def solve(y):
        coef, *_ = np.linalg.lstsq(basis * sw[:, None], y * sw, rcond=None)
        return float(coef[0]), float(-coef[1])  # deficit sign convention

    u_const, u_coeff = solve(profile.u[mask])
    v_const, v_coeff = solve(profile.v[mask])
    a_u, a_v = predicted_tail_coeffs(profile.params)
    rel_u = abs(u_coeff - a_u) / abs(a_u)
    rel_v = abs(v_coeff - a_v) / abs(a_v) if a_v != 0.0 else float("inf")

    # Order estimate of the next correction.  The two-term fit smears the
    # r^-4 remainder across the basis, so the {1, r^-2} part is re-estimated
    # with the r^-4 term present and only that part is subtracted.
    basis3 = np.column_stack([np.ones_like(r), r**-2.0, r**-4.0])
    coef3, *_ = np.linalg.lstsq(
        basis3 * sw[:, None], profile.u[mask] * sw, rcond=None
    )
    resid_u = profile.u[mask] - basis3[:, :2] @ coef3[:2]
    order = _binned_order(r, resid_u)
    return TailFit(
        window=(float(window[0]), float(window[1])),
        fitted_u_const=u_const,
        fitted_u_coeff=u_coeff,
        fitted_v_const=v_const,
        fitted_v_coeff=v_coeff,
        predicted_u_coeff=a_u,
        predicted_v_coeff=a_v,
        rel_err_u=rel_u,
        rel_err_v=rel_v,
        remainder_order_estimate=order,
    )


def decoupled_tail_check(
    profile: ProfilePair,
    window: tuple[float, float] | None = None,
) -> DecoupledTailReport:
    """Decay-order check of the decoupled tail combinations.

    Defaults to the outer half-domain.  Requires an entire-plane emulation
    profile with enough nodes in the window.
    """
    if profile.boundary.kind != "truncated_infinite":
        raise ValueError("decoupled tail check needs a truncated-infinite profile")
    if window is None:
        window = (profile.grid.rmax / 2.0, profile.grid.rmax)
    mask = _window_slice(profile, window, min_nodes=30)

    p = profile.params
    d = derive_constants(p)
    k2 = float(p.k * p.k)
    r = profile.r[mask]
    uhat = profile.u[mask] - d.u_inf
    vhat = profile.v[mask] - d.v_inf
    x = uhat + SQRT3 * vhat
    y = SQRT3 * uhat - vhat

    cx_pred = -k2 / (math.sqrt(2.0) * p.b2)
    cy_pred = -3.0 * SQRT3 * k2 / (
        math.sqrt(2.0) * (4.0 * p.c2 * d.s_plus - p.b2)
    )
    # single-basis fit of X against r^-2
    b = r**-2.0
    cx_fit = float((b @ x) / (b @ b))
    xbar = x - cx_pred * b
    ybar = y - cy_pred * b
    return DecoupledTailReport(
        window=(float(window[0]), float(window[1])),
        x_coeff_fitted=cx_fit,
        x_coeff_predicted=cx_pred,
        x_rel_err=abs(cx_fit - cx_pred) / abs(cx_pred),
        xbar_order=_binned_order(r, xbar, nbins=5),
        ybar_order=_binned_order(r, ybar, nbins=5),
    )
