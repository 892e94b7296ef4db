"""Ekman-layer wind spirals for piecewise-constant eddy viscosity."""

__version__ = "0.1.0"

from .analysis import (  # noqa: E402
    Solution,
    SpiralSample,
    angle_profile,
    evaluate_psi,
    evaluate_psi_prime,
    hodograph,
    limit_angle_suite,
    one_jump,
    solve,
    surface_deflection_angle,
)
from .profile import (  # noqa: E402
    GeostrophicWind,
    NondimScaling,
    ProfileError,
    StepViscosity,
    new_step_profile,
    nondimensionalize,
    viscosity_at,
)
from .solver import (  # noqa: E402
    LayerCoefficients,
    LinearSystem,
    SingularSystemError,
    assemble_dense_system,
    solve_dense,
    solve_transfer,
    transfer_step,
    uniqueness_margin,
)
