"""Boundary-value solvers for the coupled (u, v) system and its comparisons.

Three solution paths live here:

* ``solve_finite``   damped Newton on the collocated system on [0, R];
* ``minimize_energy``  projected gradient descent on the discrete reduced
  energy over the cone v <= 0, used as an independent cross-check and as a
  robust initializer;
* ``solve_infinite``  continuation over a ladder of growing domains with
  asymptotics-corrected outer boundary values, emulating the entire plane.

The scalar comparison problems (``solve_scalar``) share the same Newton
machinery with a single unknown.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .core import (
    MaterialParams,
    bulk_gradient,
    bulk_hessian,
    derive_constants,
)
from .grid import RadialGrid, build_grid, quadrature, radial_derivative

__all__ = [
    "SolverError",
    "NoConvergence",
    "SignViolation",
    "BZeroRefused",
    "BoundarySpec",
    "ProfilePair",
    "ScalarProfile",
    "ode_residual",
    "residual_norm",
    "default_initializer",
    "solve_finite",
    "solve_scalar",
    "discrete_energy",
    "energy_gradient",
    "minimize_energy",
    "solve_infinite",
    "b_zero_drift_report",
]

DEFAULT_TOL = 1e-8
SQRT2 = math.sqrt(2.0)


class SolverError(RuntimeError):
    pass


class NoConvergence(SolverError):
    def __init__(self, iterations: int, last_norm: float, rung: float | None = None):
        self.iterations = iterations
        self.last_norm = last_norm
        self.rung = rung
        where = "" if rung is None else f" at continuation rung R={rung:g}"
        super().__init__(
            f"Newton did not converge{where}: residual {last_norm:.3e} "
            f"after {iterations} iterations"
        )


class SignViolation(SolverError):
    """Converged onto a branch violating u > 0 or v < 0."""


class BZeroRefused(SolverError):
    """Entire-plane solve requested with b2 = 0 and no diagnostic flag."""


@dataclass(frozen=True)
class BoundarySpec:
    """Where the outer boundary sits and which values were imposed there."""

    kind: str  # "finite" | "truncated_infinite"
    R: float
    bc_mode: str | None = None  # "dirichlet_const" | "asymptotic_corrected"


@dataclass(frozen=True)
class ProfilePair:
    """Converged (u, v) samples with solver provenance.

    ``residual_norm`` is the interior max-norm of the collocated residual for
    Newton solutions, and the preconditioned projected-gradient max-norm for
    ``method == "energy_min"``.
    """

    grid: RadialGrid
    u: np.ndarray
    v: np.ndarray
    params: MaterialParams
    residual_norm: float
    method: str
    boundary: BoundarySpec

    def __post_init__(self) -> None:
        object.__setattr__(self, "u", np.asarray(self.u, dtype=float))
        object.__setattr__(self, "v", np.asarray(self.v, dtype=float))
        self.u.setflags(write=False)
        self.v.setflags(write=False)

    @property
    def r(self) -> np.ndarray:
        return self.grid.nodes


@dataclass(frozen=True)
class ScalarProfile:
    """Solution of one of the scalar comparison problems."""

    grid: RadialGrid
    w: np.ndarray
    kind: str  # "U_I" | "U_II" | "U_III"
    params: MaterialParams
    residual_norm: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "w", np.asarray(self.w, dtype=float))
        self.w.setflags(write=False)

    @property
    def r(self) -> np.ndarray:
        return self.grid.nodes


# ---------------------------------------------------------------------------
# residual and Jacobian of the coupled system
# ---------------------------------------------------------------------------


def _stencils(r: np.ndarray):
    """Interior coefficients of d2 + d1/r as (lower, diag, upper) arrays."""
    hm = r[1:-1] - r[:-2]
    hp = r[2:] - r[1:-1]
    denom = hm * hp * (hm + hp)
    ri = r[1:-1]
    low = 2.0 * hp / denom + (-hp * hp / denom) / ri
    diag = -2.0 * (hm + hp) / denom + ((hp * hp - hm * hm) / denom) / ri
    up = 2.0 * hm / denom + (hm * hm / denom) / ri
    return low, diag, up


def _boundary_targets(p: MaterialParams, R: float, bc_mode: str | None):
    """Outer Dirichlet values for (u, v) at radius R."""
    d = derive_constants(p)
    if bc_mode in (None, "finite", "dirichlet_const"):
        return d.u_inf, d.v_inf
    if bc_mode == "asymptotic_corrected":
        from .analysis import predicted_tail_coeffs

        a_u, a_v = predicted_tail_coeffs(p)
        return d.u_inf - a_u / R**2, d.v_inf - a_v / R**2
    raise ValueError(f"unknown bc_mode {bc_mode!r}")


def ode_residual(
    p: MaterialParams,
    g: RadialGrid,
    u: np.ndarray,
    v: np.ndarray,
    bc_values: tuple[float, float] | None = None,
):
    """Collocated residual of the coupled system, boundary rows substituted.

    Interior rows evaluate the two equations (radial Bessel operator minus
    the bulk-potential gradient); the first/last u rows and the last v row
    are the Dirichlet identities, and the v row at the origin collocates the
    regularized equation with the even-extension operator.  ``bc_values``
    overrides the outer targets (defaults to the far-field constants).
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != g.nodes.shape or v.shape != g.nodes.shape:
        raise ValueError("u and v must be sampled on the grid")
    r = g.nodes
    k2 = float(p.k * p.k)
    if bc_values is None:
        uR, vR = _boundary_targets(p, g.rmax, None)
    else:
        uR, vR = bc_values

    low, diag, up = _stencils(r)
    gu, gv = bulk_gradient(p, u, v)

    res_u = np.empty_like(u)
    res_v = np.empty_like(v)
    ri = r[1:-1]
    res_u[1:-1] = (
        low * u[:-2]
        + (diag - k2 / (ri * ri)) * u[1:-1]
        + up * u[2:]
        - gu[1:-1]
    )
    res_v[1:-1] = low * v[:-2] + diag * v[1:-1] + up * v[2:] - gv[1:-1]
    res_u[0] = u[0]
    res_u[-1] = u[-1] - uR
    res_v[0] = 4.0 * (v[1] - v[0]) / (r[1] * r[1]) - gv[0]
    res_v[-1] = v[-1] - vR
    return res_u, res_v


def residual_norm(
    p: MaterialParams,
    g: RadialGrid,
    u: np.ndarray,
    v: np.ndarray,
    bc_values: tuple[float, float] | None = None,
) -> float:
    """Max-norm of the collocated residual at interior rows.

    The regularized v row at the origin is a collocated equation and is
    included; the three Dirichlet identity rows are not.
    """
    res_u, res_v = ode_residual(p, g, u, v, bc_values)
    return max(
        float(np.max(np.abs(res_u[1:-1]))),
        float(np.max(np.abs(res_v[:-1]))),
    )


def _coupled_jacobian_banded(p, g, u, v):
    """LAPACK band storage (l = u = 2) of the Jacobian, interleaved unknowns."""
    r = g.nodes
    npts = len(r)
    k2 = float(p.k * p.k)
    low, diag, up = _stencils(r)
    hess = bulk_hessian(p, u, v)
    huu = hess[..., 0, 0]
    huv = hess[..., 0, 1]
    hvv = hess[..., 1, 1]

    ab = np.zeros((5, 2 * npts))
    # ab[2 + row - col, col] = J[row, col]
    idx = np.arange(1, npts - 1)
    ucol = 2 * idx
    vcol = 2 * idx + 1
    ri = r[1:-1]

    # u rows (2i): u_{i-1}, u_i, u_{i+1}, v_i
    ab[4, ucol - 2] += low
    ab[2, ucol] += diag - k2 / (ri * ri) - huu[1:-1]
    ab[0, ucol + 2] += up
    ab[1, vcol] += -huv[1:-1]
    # v rows (2i+1): v_{i-1}, v_i, v_{i+1}, u_i
    ab[4, vcol - 2] += low
    ab[2, vcol] += diag - hvv[1:-1]
    ab[0, vcol + 2] += up
    ab[3, ucol] += -huv[1:-1]

    # boundary identity rows: u_0, u_N, v_N
    ab[2, 0] = 1.0
    ab[2, 2 * npts - 2] = 1.0
    ab[2, 2 * npts - 1] = 1.0
    # regularized v row at the origin (row 1): v_0, v_1, u_0
    c0 = 4.0 / (r[1] * r[1])
    ab[2, 1] = -c0 - hvv[0]
    ab[0, 3] = c0
    ab[3, 0] = -huv[0]
    return ab


def _newton_coupled(p, g, u, v, bc_values, tol, max_iter):
    """Damped Newton iteration; returns  (u, v, norm, iterations)."""
    u = u.copy()
    v = v.copy()
    uR, vR = bc_values
    u[0] = 0.0
    u[-1] = uR
    v[-1] = vR

    def norm_of(uu, vv):
        return residual_norm(p, g, uu, vv, bc_values)

    norm = norm_of(u, v)
    for it in range(1, max_iter + 1):
        if norm <= tol:
            # one polishing step pushes the accepted branch to the roundoff
            # floor, which downstream quadratic-form identities rely on
            un, vn, new = _newton_step(p, g, u, v, bc_values, norm_of)
            if new < norm:
                u, v, norm = un, vn, new
            return u, v, norm, it - 1
        u, v, norm = _newton_step(p, g, u, v, bc_values, norm_of, norm)
    if norm <= tol:
        return u, v, norm, max_iter
    raise NoConvergence(max_iter, norm)


def _newton_step(p, g, u, v, bc_values, norm_of, norm=None):
    res_u, res_v = ode_residual(p, g, u, v, bc_values)
    rhs = np.empty(2 * len(u))
    rhs[0::2] = -res_u
    rhs[1::2] = -res_v
    ab = _coupled_jacobian_banded(p, g, u, v)
    delta = solve_banded((2, 2), ab, rhs)
    du = delta[0::2]
    dv = delta[1::2]
    if norm is None:
        norm = norm_of(u, v)
    lam = 1.0
    for _ in range(31):
        un = u + lam * du
        vn = v + lam * dv
        new = norm_of(un, vn)
        if new < norm:
            return un, vn, new
        lam *= 0.5
    # no decrease found; take the smallest step and let the caller judge
    return un, vn, new


def default_initializer(p: MaterialParams, g: RadialGrid):
    """Sign-correct initial guess matching the core exponent and far field."""
    d = derive_constants(p)
    r = g.nodes
    shape = np.tanh(r / SQRT2)
    if abs(p.k) > 1:
        shape = shape * (r / (1.0 + r)) ** (abs(p.k) - 1)
    u0 = d.u_inf * shape
    v0 = np.full_like(r, d.v_inf)
    return u0, v0


def _check_signs(u: np.ndarray, v: np.ndarray) -> str | None:
    if np.any(u[1:-1] <= 0.0):
        i = int(np.argmin(u[1:-1])) + 1
        return f"u <= 0 at node {i} (u = {u[i]:.3e})"
    if np.any(v[:-1] >= 0.0):
        i = int(np.argmax(v[:-1]))
        return f"v >= 0 at node {i} (v = {v[i]:.3e})"
    return None


def solve_finite(
    p: MaterialParams,
    g: RadialGrid,
    init: ProfilePair | None = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = 60,
) -> ProfilePair:
    """Solve the coupled system on [0, R] with far-field Dirichlet data.

    Converged branches violating the sign invariance (u > 0, v < 0 at
    interior nodes) are rejected; when a custom ``init`` led there, one retry
    from the default initializer is attempted before raising SignViolation.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    bc = _boundary_targets(p, g.rmax, None)
    if init is not None:
        u0, v0 = init.u.copy(), init.v.copy()
        if u0.shape != g.nodes.shape:
            raise ValueError("init profile is not sampled on the grid")
    else:
        u0, v0 = default_initializer(p, g)

    u, v, norm, _ = _newton_coupled(p, g, u0, v0, bc, tol, max_iter)
    bad = _check_signs(u, v)
    if bad is not None and init is not None:
        u0, v0 = default_initializer(p, g)
        u, v, norm, _ = _newton_coupled(p, g, u0, v0, bc, tol, max_iter)
        bad = _check_signs(u, v)
    if bad is not None:
        raise SignViolation(f"converged to a sign-violating branch: {bad}")
    return ProfilePair(
        grid=g,
        u=u,
        v=v,
        params=p,
        residual_norm=norm,
        method="newton",
        boundary=BoundarySpec(kind="finite", R=g.rmax),
    )


# ---------------------------------------------------------------------------
# scalar comparison problems
# ---------------------------------------------------------------------------


def _scalar_nonlinearity(p: MaterialParams, kind: str):
    d = derive_constants(p)
    if kind == "U_I":
        b = SQRT2 / 3.0 * p.b2
        c43 = 4.0 * p.c2 / 3.0

        def rhs(w):
            return w * (-p.a2 - b * w + c43 * w * w)

        def drhs(w):
            return -p.a2 - 2.0 * b * w + 3.0 * c43 * w * w

        return rhs, drhs
    if kind in ("U_II", "U_III"):
        coef = p.c2 if kind == "U_II" else d.mu * p.c2
        half_s2 = 0.5 * d.s_plus**2

        def rhs(w):
            return coef * w * (w * w - half_s2)

        def drhs(w):
            return coef * (3.0 * w * w - half_s2)

        return rhs, drhs
    raise ValueError(f"unknown scalar kind {kind!r}")


def solve_scalar(
    p: MaterialParams,
    g: RadialGrid,
    kind: str,
    tol: float = DEFAULT_TOL,
    max_iter: int = 60,
) -> ScalarProfile:
    """Solve one of the three scalar comparison problems on [0, R]."""
    rhs, drhs = _scalar_nonlinearity(p, kind)
    d = derive_constants(p)
    r = g.nodes
    npts = len(r)
    k2 = float(p.k * p.k)
    low, diag, up = _stencils(r)
    ri = r[1:-1]
    wtarget = d.u_inf

    def residual(w):
        res = np.empty_like(w)
        res[1:-1] = (
            low * w[:-2]
            + (diag - k2 / (ri * ri)) * w[1:-1]
            + up * w[2:]
            - rhs(w[1:-1])
        )
        res[0] = w[0]
        res[-1] = w[-1] - wtarget
        return res

    def norm_of(w):
        return float(np.max(np.abs(residual(w)[1:-1])))

    w = wtarget * np.tanh(r / SQRT2)
    if abs(p.k) > 1:
        w = w * (r / (1.0 + r)) ** (abs(p.k) - 1)
    w[0] = 0.0
    w[-1] = wtarget

    def step(w, norm):
        res = residual(w)
        ab = np.zeros((3, npts))
        ab[0, 2:] = up
        ab[1, 1:-1] = diag - k2 / (ri * ri) - drhs(w[1:-1])
        ab[2, :-2] = low
        ab[1, 0] = 1.0
        ab[1, -1] = 1.0
        delta = solve_banded((1, 1), ab, -res)
        lam = 1.0
        for _ in range(31):
            wn = w + lam * delta
            new = norm_of(wn)
            if new < norm:
                return wn, new
            lam *= 0.5
        return wn, new

    norm = norm_of(w)
    converged = False
    for _ in range(max_iter):
        if norm <= tol:
            converged = True
            wn, new = step(w, norm)
            if new < norm:
                w, norm = wn, new
            break
        w, norm = step(w, norm)
    if not converged and norm > tol:
        raise NoConvergence(max_iter, norm)
    if np.any(w[1:-1] <= 0.0) or np.any(w[1:-1] >= wtarget):
        raise SignViolation(f"{kind} profile left the window (0, s_plus/sqrt(2))")
    return ScalarProfile(grid=g, w=w, kind=kind, params=p, residual_norm=norm)


# ---------------------------------------------------------------------------
# discrete reduced energy and its constrained minimization
# ---------------------------------------------------------------------------


def _inv_r2_masked(g: RadialGrid) -> np.ndarray:
    """1/r^2 with the origin sample zeroed (u vanishes there like r^|k|)."""
    out = np.zeros_like(g.nodes)
    out[1:] = 1.0 / g.nodes[1:] ** 2
    return out


def discrete_energy(
    p: MaterialParams,
    g: RadialGrid,
    u: np.ndarray,
    v: np.ndarray,
    renormalize: bool = False,
) -> float:
    """Quadrature of the reduced energy density against r dr.

    Derivatives are the second-order nodal differences; the angular term
    k^2 u^2 / r^2 is taken as zero at the origin node.  With ``renormalize``
    the far-field bulk level is subtracted, keeping values finite as R grows.
    """
    from .core import bulk_density

    up = radial_derivative(g, u)
    vp = radial_derivative(g, v)
    k2 = float(p.k * p.k)
    dens = 0.5 * (up * up + vp * vp + k2 * np.asarray(u) ** 2 * _inv_r2_masked(g))
    dens = dens + bulk_density(p, np.asarray(u), np.asarray(v))
    if renormalize:
        dens = dens - derive_constants(p).f_min
    return quadrature(g, dens)


def _d1_matrix(g: RadialGrid):
    """The nodal derivative as a sparse matrix (for energy gradients)."""
    from scipy.sparse import coo_matrix

    r = g.nodes
    npts = len(r)
    hm = r[1:-1] - r[:-2]
    hp = r[2:] - r[1:-1]
    denom = hm * hp * (hm + hp)
    rows = np.repeat(np.arange(1, npts - 1), 3)
    cols = (rows.reshape(-1, 3) + np.array([-1, 0, 1])).ravel()
    vals = np.column_stack(
        [-hp * hp / denom, (hp * hp - hm * hm) / denom, hm * hm / denom]
    ).ravel()

    h1 = r[1] - r[0]
    h2 = r[2] - r[1]
    hm1 = r[-1] - r[-2]
    hm2 = r[-2] - r[-3]
    rows = np.concatenate([rows, [0, 0, 0, npts - 1, npts - 1, npts - 1]])
    cols = np.concatenate([cols, [0, 1, 2, npts - 1, npts - 2, npts - 3]])
    vals = np.concatenate(
        [
            vals,
            [
                -(2.0 * h1 + h2) / (h1 * (h1 + h2)),
                (h1 + h2) / (h1 * h2),
                -h1 / (h2 * (h1 + h2)),
                (2.0 * hm1 + hm2) / (hm1 * (hm1 + hm2)),
                -(hm1 + hm2) / (hm1 * hm2),
                hm1 / (hm2 * (hm1 + hm2)),
            ],
        ]
    )
    return coo_matrix((vals, (rows, cols)), shape=(npts, npts)).tocsr()


def energy_gradient(p: MaterialParams, g: RadialGrid, u: np.ndarray, v: np.ndarray):
    """Exact gradient of ``discrete_energy`` with respect to nodal values."""
    d1 = _d1_matrix(g)
    w = g.weights
    k2 = float(p.k * p.k)
    gu_b, gv_b = bulk_gradient(p, u, v)
    grad_u = d1.T @ (w * (d1 @ u)) + w * (k2 * u * _inv_r2_masked(g)) + w * gu_b
    grad_v = d1.T @ (w * (d1 @ v)) + w * gv_b
    return grad_u, grad_v


def minimize_energy(
    p: MaterialParams,
    g: RadialGrid,
    init: ProfilePair | None = None,
    step_rule: str | float = "bb",
    tol: float = 1e-6,
    max_iter: int = 5000,
) -> ProfilePair:
    """Projected gradient descent on the discrete energy over the cone v <= 0.

    Steps are diagonally preconditioned (Barzilai-Borwein proposals by
    default, or a fixed step when ``step_rule`` is a float) and backtracked,
    so the energy decreases monotonically.  Once the constraint is inactive,
    monotone Newton steps on the stationarity system finish the job.
    Convergence is declared on the weight-preconditioned projected-gradient
    max-norm, which has the same scale as the collocated residual.  The
    Newton path remains the canonical solver; this one exists for
    cross-validation and for reaching the sign-invariant basin from poor
    initial data.
    """
    from scipy.sparse import diags
    from scipy.sparse.linalg import splu

    d = derive_constants(p)
    npts = len(g.nodes)
    if init is not None:
        u, v = init.u.copy(), init.v.copy()
        if u.shape != g.nodes.shape:
            raise ValueError("init profile is not sampled on the grid")
    else:
        u, v = default_initializer(p, g)
    u[0] = 0.0
    u[-1] = d.u_inf
    v[-1] = d.v_inf
    v = np.minimum(v, 0.0)

    fixed = None
    if not isinstance(step_rule, str):
        fixed = float(step_rule)
    elif step_rule != "bb":
        raise ValueError(f"unknown step_rule {step_rule!r}")

    w = g.weights
    k2 = float(p.k * p.k)
    inv_r2 = _inv_r2_masked(g)
    d1 = _d1_matrix(g)
    d1t = d1.T.tocsr()
    hess_d1_diag = np.asarray(d1.multiply(d1).T @ w).ravel()

    free_u = np.ones(npts, dtype=bool)
    free_u[0] = free_u[-1] = False
    free_v = np.ones(npts, dtype=bool)
    free_v[-1] = False

    def energy(uu, vv):
        return discrete_energy(p, g, uu, vv)

    def gradient(uu, vv):
        gu_b, gv_b = bulk_gradient(p, uu, vv)
        gu = d1t @ (w * (d1 @ uu)) + w * (k2 * uu * inv_r2) + w * gu_b
        gv = d1t @ (w * (d1 @ vv)) + w * gv_b
        gu[~free_u] = 0.0
        gv[~free_v] = 0.0
        return gu, gv

    def precond(uu, vv):
        hess = bulk_hessian(p, uu, vv)
        du = hess_d1_diag + w * k2 * inv_r2 + w * np.maximum(hess[..., 0, 0], 0.1)
        dv = hess_d1_diag + w * np.maximum(hess[..., 1, 1], 0.1)
        return du, dv

    def kkt_norm(uu, vv, gu, gv):
        # pointwise Euler-Lagrange scale; on the active set only the
        # inward-pointing gradient part counts
        eu = np.abs(gu[free_u]) / w[free_u]
        gvv = np.where((vv >= 0.0) & (gv < 0.0), 0.0, gv)
        ev = np.abs(gvv[free_v]) / w[free_v]
        return max(float(eu.max()), float(ev.max()))

    def newton_direction(uu, vv, gu, gv):
        from scipy.sparse import bmat

        hess = bulk_hessian(p, uu, vv)
        kmat = d1t @ diags(w) @ d1
        h_uu = kmat + diags(w * k2 * inv_r2 + w * hess[..., 0, 0])
        h_vv = kmat + diags(w * hess[..., 1, 1])
        h_uv = diags(w * hess[..., 0, 1])
        full = bmat([[h_uu, h_uv], [h_uv, h_vv]], format="csr").tolil()
        fixed_idx = np.concatenate(
            [np.nonzero(~free_u)[0], npts + np.nonzero(~free_v)[0]]
        )
        for i in fixed_idx:
            full.rows[i] = [int(i)]
            full.data[i] = [1.0]
        rhs = -np.concatenate([gu, gv])
        rhs[fixed_idx] = 0.0
        delta = splu(full.tocsc()).solve(rhs)
        return delta[:npts], delta[npts:]

    e_old = energy(u, v)
    gu, gv = gradient(u, v)
    alpha = 1.0
    bb_pair = None
    norm = math.inf
    for _ in range(max_iter):
        norm = kkt_norm(u, v, gu, gv)
        if norm <= tol:
            break

        moved = False
        if not np.any(v[free_v] >= 0.0):
            # constraint inactive: try a monotone Newton step on stationarity
            try:
                du_n, dv_n = newton_direction(u, v, gu, gv)
                step = 1.0
                for _ in range(30):
                    un = u + step * du_n
                    vn = np.minimum(v + step * dv_n, 0.0)
                    vn[~free_v] = v[~free_v]
                    e_new = energy(un, vn)
                    if e_new < e_old:
                        u, v, e_old = un, vn, e_new
                        gu, gv = gradient(u, v)
                        bb_pair = None
                        moved = True
                        break
                    step *= 0.5
            except RuntimeError:
                pass

        if not moved:
            if fixed is not None:
                alpha = fixed
            elif bb_pair is not None:
                su, sv, yu, yv = bb_pair
                sy = float(su @ yu + sv @ yv)
                ss = float(su @ su + sv @ sv)
                if sy > 1e-300:
                    alpha = min(max(ss / sy, 1e-12), 1e12)
            du_p, dv_p = precond(u, v)
            step = alpha
            accepted = False
            for _ in range(60):
                un = u - step * gu / du_p
                vn = np.minimum(v - step * gv / dv_p, 0.0)
                un[~free_u] = u[~free_u]
                vn[~free_v] = v[~free_v]
                e_new = energy(un, vn)
                dec = float(((u - un) ** 2).sum() + ((v - vn) ** 2).sum())
                if e_new <= e_old - 1e-4 / max(step, 1e-300) * dec:
                    accepted = True
                    break
                step *= 0.5
            if not accepted and e_new >= e_old:
                break  # stalled at the arithmetic floor
            gu_new, gv_new = gradient(un, vn)
            bb_pair = (un - u, vn - v, gu_new - gu, gv_new - gv)
            u, v, e_old = un, vn, e_new
            gu, gv = gu_new, gv_new

    if norm > tol:
        raise NoConvergence(max_iter, norm)
    return ProfilePair(
        grid=g,
        u=u,
        v=v,
        params=p,
        residual_norm=norm,
        method="energy_min",
        boundary=BoundarySpec(kind="finite", R=g.rmax),
    )


# ---------------------------------------------------------------------------
# entire-plane emulation
# ---------------------------------------------------------------------------


def solve_infinite(
    p: MaterialParams,
    R_max: float,
    n: int,
    bc_mode: str = "asymptotic_corrected",
    tol: float = DEFAULT_TOL,
    grading: str = "composite",
    max_iter: int = 60,
) -> ProfilePair:
    """Continuation over domains R_max/8, R_max/4, R_max/2, R_max.

    Each rung is initialized from the previous solution, interpolated and
    tail-extended by the far-field expansion.  With the default bc_mode the
    outer Dirichlet values carry the r^-2 correction, which reduces the
    domain-truncation error from O(R^-2) to O(R^-4).

    For b2 = 0 no entire-plane solution exists; such requests are refused
    unless the parameters carry the diagnostic flag, and then only the
    constant outer values are meaningful.
    """
    if R_max < 50.0:
        raise ValueError("R_max must be at least 50")
    if p.b2 == 0.0:
        if not p.b_zero_diagnostic:
            raise BZeroRefused(
                "no entire-plane solution exists for b2 = 0; "
                "set the diagnostic flag to study the truncation drift"
            )
        if bc_mode == "asymptotic_corrected":
            raise BZeroRefused(
                "tail correction is undefined for b2 = 0; use dirichlet_const"
            )
    d = derive_constants(p)

    def tail(rr, R):
        if bc_mode == "asymptotic_corrected":
            from .analysis import predicted_tail_coeffs

            a_u, a_v = predicted_tail_coeffs(p)
            return d.u_inf - a_u / rr**2, d.v_inf - a_v / rr**2
        return np.full_like(rr, d.u_inf), np.full_like(rr, d.v_inf)

    rungs = [R_max / 8.0, R_max / 4.0, R_max / 2.0, R_max]
    prev: ProfilePair | None = None
    for R in rungs:
        g = build_grid(R, n, grading)
        if prev is None:
            u0, v0 = default_initializer(p, g)
        else:
            rr = g.nodes
            ut, vt = tail(np.maximum(rr, 1e-30), R)
            u0 = np.where(
                rr <= prev.grid.rmax, np.interp(rr, prev.r, prev.u), ut
            )
            v0 = np.where(
                rr <= prev.grid.rmax, np.interp(rr, prev.r, prev.v), vt
            )
        bc = _boundary_targets(p, R, bc_mode)
        try:
            u, v, norm, _ = _newton_coupled(p, g, u0, v0, bc, tol, max_iter)
        except NoConvergence as exc:
            raise NoConvergence(exc.iterations, exc.last_norm, rung=R) from None
        prev = ProfilePair(
            grid=g,
            u=u,
            v=v,
            params=p,
            residual_norm=norm,
            method="newton",
            boundary=BoundarySpec(
                kind="truncated_infinite", R=R, bc_mode=bc_mode
            ),
        )
    bad = _check_signs(prev.u, prev.v)
    if bad is not None and p.b2 > 0.0:
        raise SignViolation(f"converged to a sign-violating branch: {bad}")
    return prev


def b_zero_drift_report(
    p: MaterialParams,
    R_max: float = 200.0,
    n: int = 2000,
    tol: float = DEFAULT_TOL,
) -> list[dict]:
    """Truncation-drift diagnostic for b2 = 0 (report-only, nothing asserted).

    Solves the finite-domain problem on a doubling ladder of radii and
    records max |v| over the inner half [0, R/2]; on the entire plane no
    sign-invariant solution exists and the inner amplitude drains away as
    the domain grows.
    """
    if p.b2 != 0.0:
        raise ValueError("drift report is a b2 = 0 diagnostic")
    out = []
    R = R_max / 4.0
    while R <= R_max * (1.0 + 1e-12):
        g = build_grid(R, n, "composite")
        prof = solve_finite(p, g, tol=tol)
        inner = prof.r <= R / 2.0
        out.append(
            {
                "R": float(R),
                "max_abs_v_inner": float(np.max(np.abs(prof.v[inner]))),
                "min_u_interior": float(np.min(prof.u[1:-1])),
            }
        )
        R *= 2.0
    return out
