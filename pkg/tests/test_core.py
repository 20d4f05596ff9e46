import math

import numpy as np
import pytest

from nematic_profile import (
    MaterialParams,
    RegimeTag,
    bulk_density,
    bulk_gradient,
    bulk_hessian,
    classify_regime,
    derive_constants,
)


def test_derived_constants_unit_triple():
    d = derive_constants(MaterialParams(1.0, 1.0, 1.0, 1))
    assert d.s_plus == pytest.approx(1.5, abs=0)
    assert d.s_minus == pytest.approx(-1.0, abs=0)
    assert d.mu == pytest.approx(0.2, rel=1e-15)
    assert d.u_inf == pytest.approx(1.060660, abs=1e-6)
    assert d.v_inf == pytest.approx(-0.612372, abs=1e-6)
    assert d.f_min == pytest.approx(-0.4375, rel=1e-14)


def test_derived_constants_critical_triple():
    d = derive_constants(MaterialParams(1.0, math.sqrt(3.0), 1.0, 1))
    assert d.s_plus == pytest.approx(math.sqrt(3.0), rel=1e-15)
    assert d.v_inf == pytest.approx(-1.0 / math.sqrt(2.0), rel=1e-15)


def test_derived_constants_small_b_limit():
    d = derive_constants(MaterialParams(1.0, 1e-14, 1.0, 1))
    assert d.s_plus == pytest.approx(math.sqrt(6.0) / 2.0, rel=1e-12)
    assert d.s_minus == pytest.approx(-math.sqrt(6.0) / 2.0, rel=1e-12)


def test_s_plus_quadratic_identity():
    rng = np.random.default_rng(0)
    for _ in range(100):
        a2, b2, c2 = rng.uniform(0.1, 5.0, size=3)
        d = derive_constants(MaterialParams(a2, b2, c2, 1))
        lhs = (4.0 * c2 * d.s_plus - b2) ** 2
        rhs = b2 * b2 + 24.0 * a2 * c2
        assert lhs == pytest.approx(rhs, rel=1e-12)
        assert d.s_minus < 0.0 < d.s_plus
        assert 0.0 < d.mu < 1.0
        assert d.u_inf**2 + d.v_inf**2 == pytest.approx(
            2.0 / 3.0 * d.s_plus**2, rel=1e-13
        )


def test_critical_identity_c2_s_plus():
    # degenerate regime: c2 s_plus equals b2
    for a2, c2 in [(1.0, 1.0), (0.5, 2.0), (3.0, 0.7)]:
        b2 = math.sqrt(3.0 * a2 * c2)
        d = derive_constants(MaterialParams(a2, b2, c2, 1))
        assert c2 * d.s_plus == pytest.approx(b2, rel=1e-12)


def test_classify_regime_examples():
    assert classify_regime(MaterialParams(1, 1, 1, 1)).tag == RegimeTag.SUBCRITICAL
    assert classify_regime(MaterialParams(1, 1, 1, 1)).discriminant == pytest.approx(-2.0)
    assert (
        classify_regime(MaterialParams(1, math.sqrt(3.0), 1, 1)).tag
        == RegimeTag.CRITICAL
    )
    reg = classify_regime(MaterialParams(1, 3, 1, 1))
    assert reg.tag == RegimeTag.SUPERCRITICAL
    assert reg.discriminant == pytest.approx(6.0)
    assert (
        classify_regime(MaterialParams(1, 0.0, 1, 1, b_zero_diagnostic=True)).tag
        == RegimeTag.B_ZERO
    )


def test_regime_sign_matches_brute_recomputation():
    rng = np.random.default_rng(1)
    for _ in range(200):
        a2, b2, c2 = rng.uniform(0.05, 4.0, size=3)
        t = rng.uniform(0.1, 10.0)
        disc_sign = np.sign(b2 * b2 - 3.0 * a2 * c2)
        scaled = classify_regime(MaterialParams(t * a2, b2, c2 / t, 1))
        assert np.sign(scaled.discriminant) == disc_sign


def test_material_params_validation():
    with pytest.raises(ValueError):
        MaterialParams(0.0, 1.0, 1.0, 1)
    with pytest.raises(ValueError):
        MaterialParams(1.0, -1.0, 1.0, 1)
    with pytest.raises(ValueError):
        MaterialParams(1.0, 1.0, 0.0, 1)
    with pytest.raises(ValueError):
        MaterialParams(1.0, 1.0, 1.0, 0)
    with pytest.raises(ValueError):
        MaterialParams(1.0, 0.0, 1.0, 1)
    # diagnostic flag admits b2 = 0
    MaterialParams(1.0, 0.0, 1.0, 1, b_zero_diagnostic=True)


def test_bulk_density_examples():
    p = MaterialParams(1.0, 1.0, 1.0, 1)
    assert bulk_density(p, 0.0, 0.0) == 0.0
    d = derive_constants(p)
    assert bulk_density(p, d.u_inf, d.v_inf) == pytest.approx(d.f_min, rel=1e-13)
    # only the cubic term is odd in v
    gap = bulk_density(p, 0.0, 1.0) - bulk_density(p, 0.0, -1.0)
    assert gap == pytest.approx(-2.0 / (3.0 * math.sqrt(6.0)), rel=1e-13)


def test_bulk_gradient_critical_points():
    p = MaterialParams(1.0, 1.0, 1.0, 1)
    assert bulk_gradient(p, 0.0, 0.0) == (0.0, 0.0)
    rng = np.random.default_rng(2)
    for _ in range(100):
        a2, b2, c2 = rng.uniform(0.1, 5.0, size=3)
        q = MaterialParams(a2, b2, c2, 1)
        d = derive_constants(q)
        gu, gv = bulk_gradient(q, d.u_inf, d.v_inf)
        assert abs(gu) <= 1e-10
        assert abs(gv) <= 1e-10


def test_bulk_hessian_symmetric_and_matches_fd():
    rng = np.random.default_rng(3)
    step = 1e-5
    for _ in range(30):
        a2, b2, c2 = rng.uniform(0.1, 3.0, size=3)
        p = MaterialParams(a2, b2, c2, 1)
        u, v = rng.uniform(-2.0, 2.0, size=2)
        h = bulk_hessian(p, u, v)
        assert h[0, 1] == h[1, 0]
        fd = np.empty((2, 2))
        for j, (du, dv) in enumerate([(step, 0.0), (0.0, step)]):
            gp = bulk_gradient(p, u + du, v + dv)
            gm = bulk_gradient(p, u - du, v - dv)
            fd[0, j] = (gp[0] - gm[0]) / (2.0 * step)
            fd[1, j] = (gp[1] - gm[1]) / (2.0 * step)
        assert np.allclose(h, fd, rtol=1e-6, atol=1e-6)


def test_bulk_functions_broadcast():
    p = MaterialParams(1.0, 1.0, 1.0, 1)
    u = np.linspace(0.0, 1.0, 7)
    v = np.linspace(-1.0, 0.0, 7)
    assert bulk_density(p, u, v).shape == (7,)
    gu, gv = bulk_gradient(p, u, v)
    assert gu.shape == gv.shape == (7,)
    assert bulk_hessian(p, u, v).shape == (7, 2, 2)
