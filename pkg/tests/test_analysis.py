import math

import numpy as np
import pytest

from nematic_profile import (
    BoundarySpec,
    MaterialParams,
    ProfilePair,
    RegimeMismatch,
    build_grid,
    decoupled_tail_check,
    derive_constants,
    fit_tail,
    predicted_tail_coeffs,
    verify_bounds,
)

SQRT3 = math.sqrt(3.0)


def test_predicted_coeffs_unit_triple():
    a_u, a_v = predicted_tail_coeffs(MaterialParams(1.0, 1.0, 1.0, 1))
    assert a_u == pytest.approx(0.494975, abs=1e-6)
    assert a_v == pytest.approx(0.122474, abs=1e-6)


def test_predicted_coeffs_critical():
    b2 = SQRT3
    a_u, a_v = predicted_tail_coeffs(MaterialParams(1.0, b2, 1.0, 1))
    assert a_v == 0.0
    assert a_u == pytest.approx(1.0 / (math.sqrt(2.0) * b2), rel=1e-13)


def test_predicted_coeffs_k_squared_scaling():
    for trip in [(1.0, 1.0, 1.0), (0.5, 2.0, 1.5)]:
        a1 = predicted_tail_coeffs(MaterialParams(*trip, 1))
        a2 = predicted_tail_coeffs(MaterialParams(*trip, 2))
        assert a2[0] / a1[0] == pytest.approx(4.0, rel=1e-14)
        assert a2[1] == pytest.approx(4.0 * a1[1], rel=1e-14)


def test_predicted_coeffs_denominator_identity():
    rng = np.random.default_rng(0)
    for _ in range(50):
        a2, b2, c2 = rng.uniform(0.1, 4.0, size=3)
        p = MaterialParams(a2, b2, c2, 1)
        d = derive_constants(p)
        assert 4.0 * c2 * d.s_plus - b2 == pytest.approx(
            math.sqrt(b2 * b2 + 24.0 * a2 * c2), rel=1e-12
        )


def test_predicted_coeffs_reject_b_zero():
    p = MaterialParams(1.0, 0.0, 1.0, 1, b_zero_diagnostic=True)
    with pytest.raises(ValueError):
        predicted_tail_coeffs(p)


# ---------------------------------------------------------------------------
# bounds
# ---------------------------------------------------------------------------


def test_bounds_critical_regime(profile_crit_r20):
    rep = verify_bounds(profile_crit_r20, tol=1e-6)
    assert rep.regime == "CRITICAL"
    assert rep.all_satisfied
    # the window degenerates onto the constant value
    assert rep.bounds["V_WINDOW"].worst_violation <= 1e-6


def test_bounds_supercritical_window():
    p = MaterialParams(1.0, 3.0, 1.0, 1)
    g = build_grid(20.0, 800, "composite")
    from nematic_profile import solve_finite

    prof = solve_finite(p, g)
    rep = verify_bounds(prof, tol=1e-6)
    assert rep.all_satisfied
    d = derive_constants(p)
    lo = d.v_inf
    hi = math.sqrt(2.0 / 3.0) * d.s_minus
    assert lo == pytest.approx(-0.89249, abs=1e-5)
    assert hi == pytest.approx(-0.56023, abs=1e-5)
    assert np.all(prof.v[1:-1] >= lo - 1e-6)
    assert np.all(prof.v[1:-1] <= hi + 1e-6)


def test_bounds_flag_constructed_violation(profile_sub_r20):
    p = profile_sub_r20.params
    d = derive_constants(p)
    bad = ProfilePair(
        grid=profile_sub_r20.grid,
        u=np.full_like(profile_sub_r20.u, d.s_plus),
        v=np.zeros_like(profile_sub_r20.v),
        params=p,
        residual_norm=np.inf,
        method="newton",
        boundary=BoundarySpec(kind="finite", R=profile_sub_r20.grid.rmax),
    )
    rep = verify_bounds(bad, tol=1e-6)
    rec = rep.bounds["BALL"]
    assert not rec.satisfied
    assert rec.worst_violation == pytest.approx(d.s_plus**2 / 3.0, rel=1e-12)


def test_bounds_regime_mismatch(profile_sub_r20):
    with pytest.raises(RegimeMismatch):
        verify_bounds(profile_sub_r20, expect_regime="SUPERCRITICAL")
    rep = verify_bounds(profile_sub_r20, expect_regime="SUBCRITICAL")
    assert rep.all_satisfied


def test_bounds_b_zero_skips_regime_specific():
    from nematic_profile import solve_finite

    p = MaterialParams(1.0, 0.0, 1.0, 1, b_zero_diagnostic=True)
    g = build_grid(5.0, 400, "composite")
    prof = solve_finite(p, g)
    rep = verify_bounds(prof, tol=1e-6)
    assert "V_WINDOW" not in rep.bounds
    assert "COMPARISON" not in rep.bounds
    assert rep.all_satisfied


def test_bounds_regression_regimes_k123():
    from nematic_profile import solve_finite

    g = build_grid(20.0, 800, "composite")
    for b2 in (1.0, SQRT3, 3.0):
        for k in (1, 2, 3):
            prof = solve_finite(MaterialParams(1.0, b2, 1.0, k), g)
            rep = verify_bounds(prof, tol=1e-6)
            assert rep.all_satisfied, (b2, k, rep.bounds)


# ---------------------------------------------------------------------------
# tail fitting
# ---------------------------------------------------------------------------


def _synthetic_profile(c0u, c2u, c0v, c2v, R=200.0, n=2000):
    p = MaterialParams(1.0, 1.0, 1.0, 1)
    g = build_grid(R, n, "composite")
    r = np.maximum(g.nodes, 1e-9)
    u = c0u - c2u / r**2
    v = c0v - c2v / r**2
    return ProfilePair(
        grid=g,
        u=u,
        v=v,
        params=p,
        residual_norm=0.0,
        method="newton",
        boundary=BoundarySpec(kind="truncated_infinite", R=R, bc_mode="dirichlet_const"),
    )


def test_fit_tail_recovers_synthetic_model():
    prof = _synthetic_profile(1.06, 0.3, -0.61, 0.05)
    for window in [(100.0, 200.0), (50.0, 150.0)]:
        fit = fit_tail(prof, window)
        assert fit.fitted_u_coeff == pytest.approx(0.3, abs=1e-10)
        assert fit.fitted_u_const == pytest.approx(1.06, abs=1e-12)
        assert fit.fitted_v_coeff == pytest.approx(0.05, abs=1e-10)


def test_fit_tail_window_validation(infinite_sub_k1):
    with pytest.raises(ValueError):
        fit_tail(infinite_sub_k1, (150.0, 100.0))
    with pytest.raises(ValueError):
        fit_tail(infinite_sub_k1, (100.0, 300.0))
    with pytest.raises(ValueError):
        fit_tail(infinite_sub_k1, (199.5, 200.0))  # too few nodes


def test_fit_tail_on_solver_output(infinite_sub_k1):
    fit = fit_tail(infinite_sub_k1, (100.0, 200.0))
    assert fit.rel_err_u <= 0.02
    assert fit.rel_err_v <= 0.02
    assert fit.remainder_order_estimate >= 3.5


def test_decoupled_check_critical_ratio(infinite_crit_k1):
    # v is pinned at its far-field value, so Y = sqrt(3) X on the tail
    p = infinite_crit_k1.params
    d = derive_constants(p)
    r = infinite_crit_k1.r
    mask = r >= 100.0
    x = (infinite_crit_k1.u - d.u_inf) + SQRT3 * (infinite_crit_k1.v - d.v_inf)
    y = SQRT3 * (infinite_crit_k1.u - d.u_inf) - (infinite_crit_k1.v - d.v_inf)
    assert np.max(np.abs(y[mask] / x[mask] - SQRT3)) <= 1e-8


def test_decoupled_synthetic_exact():
    a_u, a_v = predicted_tail_coeffs(MaterialParams(1.0, 1.0, 1.0, 1))
    d = derive_constants(MaterialParams(1.0, 1.0, 1.0, 1))
    prof = _synthetic_profile(d.u_inf, a_u, d.v_inf, a_v)
    rep = decoupled_tail_check(prof, (50.0, 200.0))
    assert rep.x_rel_err <= 1e-10


def test_decoupled_requires_infinite(profile_sub_r20):
    with pytest.raises(ValueError):
        decoupled_tail_check(profile_sub_r20)


def test_decoupled_orders_on_solver_output(infinite_sub_k1):
    rep = decoupled_tail_check(infinite_sub_k1)
    assert rep.xbar_order >= 3.5
    assert rep.ybar_order >= 3.5
    assert rep.x_rel_err <= 0.02
