"""Shared fixtures: the expensive solves are session-scoped and reused."""

import math

import pytest

from nematic_profile import (
    MaterialParams,
    build_grid,
    solve_finite,
    solve_infinite,
)

SQRT3 = math.sqrt(3.0)


@pytest.fixture(scope="session")
def params_sub():
    return MaterialParams(1.0, 1.0, 1.0, 1)


@pytest.fixture(scope="session")
def params_crit():
    return MaterialParams(1.0, SQRT3, 1.0, 1)


@pytest.fixture(scope="session")
def params_super():
    return MaterialParams(1.0, 3.0, 1.0, 1)


@pytest.fixture(scope="session")
def grid_r20():
    return build_grid(20.0, 800, "composite")


@pytest.fixture(scope="session")
def profile_sub_r20(params_sub, grid_r20):
    return solve_finite(params_sub, grid_r20)


@pytest.fixture(scope="session")
def profile_crit_r20(params_crit, grid_r20):
    return solve_finite(params_crit, grid_r20)


@pytest.fixture(scope="session")
def infinite_sub_k1():
    return solve_infinite(MaterialParams(1.0, 1.0, 1.0, 1), 200.0, 4000)


@pytest.fixture(scope="session")
def infinite_sub_k2():
    return solve_infinite(MaterialParams(1.0, 1.0, 1.0, 2), 200.0, 4000)


@pytest.fixture(scope="session")
def infinite_crit_k1():
    return solve_infinite(MaterialParams(1.0, SQRT3, 1.0, 1), 200.0, 4000)


@pytest.fixture(scope="session")
def infinite_crit_k2():
    return solve_infinite(MaterialParams(1.0, SQRT3, 1.0, 2), 200.0, 4000)


@pytest.fixture(scope="session")
def criterion3_profiles(
    infinite_sub_k1, infinite_sub_k2, infinite_crit_k1, infinite_crit_k2
):
    return {
        ("sub", 1): infinite_sub_k1,
        ("sub", 2): infinite_sub_k2,
        ("crit", 1): infinite_crit_k1,
        ("crit", 2): infinite_crit_k2,
    }


@pytest.fixture(scope="session")
def instability_profiles():
    """R_max = 400 solves for the instability certificate runs."""
    out = {}
    for name, (a2, b2, c2) in {"sub": (1.0, 1.0, 1.0), "super": (1.0, 3.0, 1.0)}.items():
        for k in (2, 3):
            p = MaterialParams(a2, b2, c2, k)
            out[(name, k)] = solve_infinite(p, 400.0, 6000)
    return out
