"""Solver and verification toolkit for radial half-integer defect profiles
in the 2D Q-tensor liquid-crystal model."""

from .core import (
    DerivedConstants,
    MaterialParams,
    Regime,
    RegimeTag,
    bulk_density,
    bulk_gradient,
    bulk_hessian,
    classify_regime,
    derive_constants,
)
from .grid import RadialGrid, apply_radial_laplacian, build_grid, quadrature, radial_derivative
from .solver import (
    BoundarySpec,
    BZeroRefused,
    NoConvergence,
    ProfilePair,
    ScalarProfile,
    SignViolation,
    SolverError,
    b_zero_drift_report,
    default_initializer,
    discrete_energy,
    energy_gradient,
    minimize_energy,
    ode_residual,
    residual_norm,
    solve_finite,
    solve_infinite,
    solve_scalar,
)
from .analysis import (
    BoundsReport,
    DecoupledTailReport,
    RegimeMismatch,
    TailFit,
    decoupled_tail_check,
    fit_tail,
    predicted_tail_coeffs,
    verify_bounds,
)
from .stability import (
    EigenFailure,
    GaussianBump,
    LogSine,
    RescaledLogSine,
    StabilityReport,
    SupportError,
    farfield_potential_residual,
    hardy_identity_error,
    minimize_rayleigh,
    parity_constant,
    test_function,
    w_form,
    xi_form,
)
from .tensor import (
    QField,
    disk_energy,
    energy_density_2d,
    export_csv,
    q_matrix,
    reconstruct,
    rotation_matrix,
)

__version__ = "0.1.0"
