"""Second-variation quadratic forms and the numerical instability certificate.

The out-of-plane perturbation mode reduces the second variation to a 1D
quadratic form in a radial amplitude w.  Substituting w = u * xi moves the
form onto a weighted one in xi whose only negative ingredient is an inverse
square potential: for |k| >= 2 its strength beats the critical constant of
the weighted Hardy inequality, so slowly oscillating functions of ln r make
the form negative.  ``minimize_rayleigh`` discretizes the weighted form on
an annulus and returns the minimal generalized eigenvalue together with the
minimizing perturbation whenever it certifies instability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .core import MaterialParams, derive_constants
from .grid import RadialGrid
from .solver import ProfilePair

__all__ = [
    "SupportError",
    "EigenFailure",
    "LogSine",
    "RescaledLogSine",
    "GaussianBump",
    "QuadraticFormSpec",
    "StabilityReport",
    "parity_constant",
    "w_form",
    "xi_form",
    "test_function",
    "minimize_rayleigh",
    "farfield_potential_residual",
]

SQRT3 = math.sqrt(3.0)
SQRT2 = math.sqrt(2.0)
SQRT23 = math.sqrt(2.0 / 3.0)
TWO_PI = 2.0 * math.pi


class SupportError(ValueError):
    """Test function support incompatible with the grid or the form."""


class EigenFailure(RuntimeError):
    pass


def parity_constant(k: int) -> float:
    """Angular parity constant: 1 for odd k, 0 for even k."""
    return 1.0 if k % 2 else 0.0


@dataclass(frozen=True)
class QuadraticFormSpec:
    """Which reduced 1D form is being evaluated on which profile."""

    profile: ProfilePair
    k: int
    c_k: float
    form_kind: str  # "W_FORM" | "XI_FORM"

    def __post_init__(self) -> None:
        if self.form_kind not in ("W_FORM", "XI_FORM"):
            raise ValueError(f"unknown form kind {self.form_kind!r}")
        if self.c_k != parity_constant(self.k):
            raise ValueError("c_k does not match the parity of k")

    @classmethod
    def for_profile(cls, profile: ProfilePair, form_kind: str) -> "QuadraticFormSpec":
        k = profile.params.k
        return cls(profile=profile, k=k, c_k=parity_constant(k), form_kind=form_kind)

    def evaluate(self, arg: np.ndarray) -> float:
        if self.form_kind == "W_FORM":
            return w_form(self.profile, arg)
        return xi_form(self.profile, arg)


@dataclass(frozen=True)
class StabilityReport:
    form_values: dict[str, float]
    min_rayleigh: float
    certificate: np.ndarray | None
    support: tuple[float, float]
    hardy_identity_error: float
    k: int
    c_k: float
    open_question: bool  # |k| = 1: sign carries no claim either way


# ---------------------------------------------------------------------------
# test-function families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LogSine:
    """sin((ln r - 2 pi n)/2) on (e^{2 pi n}, e^{2 pi (n+1)})."""

    n: int = 0


@dataclass(frozen=True)
class RescaledLogSine:
    """sin(omega ln(r/r_start)) on (r_start, r_start e^{pi/omega}).

    One half-period of a log-variable sine, squeezed to fit desk-scale
    domains; omega = 1/2 with r_start = e^{2 pi n} reproduces LogSine(n)
    exactly.
    """

    r_start: float
    omega: float


@dataclass(frozen=True)
class GaussianBump:
    """Smooth compactly supported bump on (center - width, center + width)."""

    center: float
    width: float


def _smoothstep(x: np.ndarray) -> np.ndarray:
    x = np.clip(x, 0.0, 1.0)
    return x * x * x * (10.0 + x * (-15.0 + 6.0 * x))


def test_function(grid: RadialGrid, family, smoothing: float = 0.0) -> np.ndarray:
    """Sample a compactly supported test function on the grid.

    For the log-sine families ``smoothing`` mollifies the endpoints with
    quintic ramps of the given width in ln r; zero keeps the raw sine, whose
    endpoint values already vanish.
    """
    r = grid.nodes
    out = np.zeros_like(r)
    if isinstance(family, LogSine):
        t_a = TWO_PI * family.n
        t_b = TWO_PI * (family.n + 1)
        r_a, r_b = math.exp(t_a), math.exp(t_b)
        if r_b > grid.rmax * (1.0 + 1e-12):
            raise SupportError(
                f"log-sine support ({r_a:g}, {r_b:g}) exceeds the domain"
            )
        inside = (r > r_a) & (r < r_b)
        t = np.log(r[inside])
        out[inside] = np.sin(0.5 * (t - t_a))
        if smoothing > 0.0:
            ramp = _smoothstep((t - t_a) / smoothing) * _smoothstep(
                (t_b - t) / smoothing
            )
            out[inside] *= ramp
        out[np.abs(out) < 1e-13] = 0.0
        return out
    if isinstance(family, RescaledLogSine):
        if family.omega <= 0.0 or family.r_start <= 0.0:
            raise SupportError("rescaled log-sine needs r_start > 0, omega > 0")
        t_a = math.log(family.r_start)
        t_b = t_a + math.pi / family.omega
        r_a, r_b = family.r_start, math.exp(t_b)
        if r_b > grid.rmax * (1.0 + 1e-12):
            raise SupportError(
                f"log-sine support ({r_a:g}, {r_b:g}) exceeds the domain"
            )
        inside = (r > r_a) & (r < r_b)
        t = np.log(r[inside])
        out[inside] = np.sin(family.omega * (t - t_a))
        if smoothing > 0.0:
            ramp = _smoothstep((t - t_a) / smoothing) * _smoothstep(
                (t_b - t) / smoothing
            )
            out[inside] *= ramp
        out[np.abs(out) < 1e-13] = 0.0
        return out
    if isinstance(family, GaussianBump):
        r_a = family.center - family.width
        r_b = family.center + family.width
        if r_a <= 0.0 or r_b > grid.rmax * (1.0 + 1e-12):
            raise SupportError(
                f"bump support ({r_a:g}, {r_b:g}) must sit inside (0, R]"
            )
        s = (r - family.center) / family.width
        inside = np.abs(s) < 1.0
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
        return out
    raise TypeError(f"unknown test-function family {family!r}")


test_function.__test__ = False  # name collides with pytest's collection rule


# ---------------------------------------------------------------------------
# the two quadratic forms
# ---------------------------------------------------------------------------


def _check_support(grid: RadialGrid, f: np.ndarray) -> None:
    if f.shape != grid.nodes.shape:
        raise ValueError("argument must be sampled on the profile grid")
    tiny = 1e-12 * (1.0 + float(np.max(np.abs(f))))
    if abs(f[0]) > tiny or abs(f[-1]) > tiny:
        raise SupportError("argument must vanish at the origin and outer nodes")


def _fe_gradient_energy(grid: RadialGrid, f: np.ndarray, weight: np.ndarray) -> float:
    """Integral of |f'|^2 weight(r) r dr with piecewise-linear f exactly."""
    r = grid.nodes
    h = np.diff(r)
    wr = weight * r
    coef = 0.5 * (wr[:-1] + wr[1:]) * h
    slope = np.diff(f) / h
    return float(np.sum(coef * slope * slope))


def _potential_b(p: MaterialParams, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """- (b2/sqrt(2)) (u + sqrt(3) v): positive on sign-invariant profiles."""
    return -p.b2 / SQRT2 * (u + SQRT3 * v)


def w_form(profile: ProfilePair, w: np.ndarray) -> float:
    """Second-variation value (2/pi scaled) of the radial amplitude w.

    w must be compactly supported away from the origin.  The integrand
    couples the Hardy term (k^2 + c_k)/(4 r^2), the u-equation bracket as a
    potential, and the cone combination u + sqrt(3) v.
    """
    w = np.asarray(w, dtype=float)
    g = profile.grid
    _check_support(g, w)
    p = profile.params
    d2 = derive_constants(p)
    ck = parity_constant(p.k)
    k2 = float(p.k * p.k)
    r = g.nodes
    u, v = profile.u, profile.v

    inv_r2 = np.zeros_like(r)
    inv_r2[1:] = 1.0 / r[1:] ** 2
    bracket = -p.a2 + SQRT23 * p.b2 * v + p.c2 * (u * u + v * v)
    potential = (k2 + ck) / 4.0 * inv_r2 + bracket + _potential_b(p, u, v)
    val = _fe_gradient_energy(g, w, np.ones_like(r))
    val += float(g.weights @ (potential * w * w))
    return val


def xi_form(
    profile: ProfilePair,
    xi: np.ndarray,
    include_potential: bool = True,
    unit_weight: bool = False,
) -> float:
    """Weighted form after the substitution w = u xi.

    The weight is u^2 r dr; the inverse-square coefficient is
    -(3 k^2 - c_k)/4.  ``include_potential=False`` together with
    ``unit_weight=True`` evaluates the bare weighted Hardy form, used as an
    analytic oracle.
    """
    xi = np.asarray(xi, dtype=float)
    g = profile.grid
    _check_support(g, xi)
    p = profile.params
    ck = parity_constant(p.k)
    k2 = float(p.k * p.k)
    r = g.nodes
    u, v = profile.u, profile.v
    weight = np.ones_like(r) if unit_weight else u * u

    inv_r2 = np.zeros_like(r)
    inv_r2[1:] = 1.0 / r[1:] ** 2
    potential = -(3.0 * k2 - ck) / 4.0 * inv_r2
    if include_potential:
        potential = potential + _potential_b(p, u, v)
    val = _fe_gradient_energy(g, xi, weight)
    val += float(g.weights @ (potential * weight * xi * xi))
    return val


def farfield_potential_residual(
    profile: ProfilePair, r_lo: float, r_hi: float
) -> float:
    """max over the window of |r^2 (b2/sqrt(2))(u + sqrt(3) v) + k^2/2|.

    The cone combination relaxes like -k^2/(sqrt(2) b2 r^2), so this residual
    measures how far the tail is from the regime the instability argument
    uses.
    """
    p = profile.params
    r = profile.r
    mask = (r >= r_lo) & (r <= r_hi)
    if not np.any(mask):
        raise ValueError("window contains no nodes")
    val = r[mask] ** 2 * (p.b2 / SQRT2) * (
        profile.u[mask] + SQRT3 * profile.v[mask]
    )
    return float(np.max(np.abs(val + 0.5 * p.k * p.k)))


# ---------------------------------------------------------------------------
# minimal Rayleigh quotient on an annulus
# ---------------------------------------------------------------------------


def _random_support_bumps(
    grid: RadialGrid, r_a: float, r_b: float, rng: np.random.Generator
) -> np.ndarray:
    """A random smooth function compactly supported in (r_a, r_b)."""
    t_a, t_b = math.log(r_a), math.log(r_b)
    span = t_b - t_a
    out = np.zeros_like(grid.nodes)
    t = np.zeros_like(grid.nodes)
    pos = grid.nodes > 0.0
    t[pos] = np.log(grid.nodes[pos])
    for _ in range(rng.integers(1, 3)):
        c = rng.uniform(t_a + 0.25 * span, t_b - 0.25 * span)
        hw = rng.uniform(0.15 * span, 0.24 * span)
        amp = rng.uniform(0.3, 1.0) * rng.choice([-1.0, 1.0])
        s = (t - c) / hw
        inside = pos & (np.abs(s) < 1.0)
        out[inside] += amp * np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
    out[~pos] = 0.0
    return out


def hardy_identity_error(
    profile: ProfilePair,
    n_samples: int = 5,
    support: tuple[float, float] | None = None,
    seed: int = 0,
) -> float:
    """max over random xi of |w_form(u xi) - xi_form(xi)| / (1 + |xi_form|).

    The two forms agree exactly on solutions of the continuous equation;
    discretely the defect shrinks at second order in the mesh.
    """
    g = profile.grid
    if support is None:
        support = (g.rmax / 8.0, 0.9 * g.rmax)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_samples):
        xi = _random_support_bumps(g, support[0], support[1], rng)
        a = xi_form(profile, xi)
        b = w_form(profile, profile.u * xi)
        worst = max(worst, abs(b - a) / (1.0 + abs(a)))
    return worst


def minimize_rayleigh(
    profile: ProfilePair,
    support: tuple[float, float] | None = None,
    certificate_tol: float = 0.0,
    seed: int = 0,
) -> StabilityReport:
    """Minimal generalized Rayleigh quotient of the weighted form.

    Assembles the discrete xi form restricted to grid nodes inside the
    support annulus (zero Dirichlet at its end nodes) against the mass
    integral of xi^2 u^2 r dr and solves the symmetric tridiagonal
    eigenproblem.  The minimizing perturbation is attached as a certificate
    exactly when the minimal value is below ``-certificate_tol``.

    For |k| = 1 the report carries the open-question flag: the sign of the
    value claims nothing there.
    """
    if profile.boundary.kind != "truncated_infinite":
        raise ValueError("stability analysis expects a truncated-infinite profile")
    g = profile.grid
    if support is None:
        support = (g.rmax / 4.0, g.rmax)
    r_a, r_b = support
    if not (0.0 < r_a < r_b <= g.rmax * (1.0 + 1e-12)):
        raise SupportError(f"support {support} must sit inside (0, R]")
    idx = np.nonzero((g.nodes >= r_a) & (g.nodes <= r_b))[0]
    if len(idx) < 30:
        raise SupportError(f"support holds {len(idx)} nodes, need at least 30")

    p = profile.params
    ck = parity_constant(p.k)
    k2 = float(p.k * p.k)
    r = g.nodes
    u, v = profile.u, profile.v

    # tridiagonal stiffness of the weighted gradient over support intervals
    lo, hi = idx[0], idx[-1]
    h = np.diff(r[lo : hi + 1])
    wr = (u * u * r)[lo : hi + 1]
    ke = 0.5 * (wr[:-1] + wr[1:]) / h  # (d xi)^2 coefficient per interval

    inv_r2 = 1.0 / r[lo : hi + 1] ** 2
    potential = -(3.0 * k2 - ck) / 4.0 * inv_r2 + _potential_b(
        p, u[lo : hi + 1], v[lo : hi + 1]
    )
    diag_pot = g.weights[lo : hi + 1] * potential * (u * u)[lo : hi + 1]
    mass = g.weights[lo : hi + 1] * (u * u)[lo : hi + 1]

    # interior unknowns: strict inside of the support window
    d_main = ke[:-1] + ke[1:] + diag_pot[1:-1]
    d_off = -ke[1:-1]
    m_int = mass[1:-1]
    scale = 1.0 / np.sqrt(m_int)
    d_sym = d_main * scale * scale
    e_sym = d_off * scale[:-1] * scale[1:]
    try:
        vals, vecs = eigh_tridiagonal(d_sym, e_sym, select="i", select_range=(0, 0))
    except Exception as exc:  # pragma: no cover - LAPACK failure is exotic
        raise EigenFailure(f"tridiagonal eigensolve failed: {exc}") from exc
    lam = float(vals[0])
    xi_min = np.zeros_like(r)
    xi_min[lo + 1 : hi] = scale * vecs[:, 0]
    peak = np.argmax(np.abs(xi_min))
    if xi_min[peak] != 0.0:
        xi_min = xi_min / xi_min[peak]

    omega = math.pi / math.log(r_b / r_a)
    probes = {
        "log_sine_support": test_function(
            g, RescaledLogSine(r_start=r_a, omega=omega)
        ),
        "bump_center": test_function(
            g,
            GaussianBump(
                center=0.5 * (r_a + r_b), width=0.45 * (r_b - r_a)
            ),
        ),
    }
    form_values = {name: xi_form(profile, f) for name, f in probes.items()}
    form_values["minimizer"] = xi_form(profile, xi_min)

    report = StabilityReport(
        form_values=form_values,
        min_rayleigh=lam,
        certificate=xi_min if lam < -certificate_tol else None,
        support=(float(r_a), float(r_b)),
        hardy_identity_error=hardy_identity_error(
            profile, support=(r_a, min(r_b, 0.98 * g.rmax)), seed=seed
        ),
        k=p.k,
        c_k=ck,
        open_question=abs(p.k) == 1,
    )
    return report
