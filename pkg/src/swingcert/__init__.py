"""swingcert: stability certification and simulation of a grid-connected
synchronous generator / synchronverter.

The package models a constant-field-current machine on an infinite bus,
finds and classifies its equilibria, evaluates a computable sufficient
condition for almost global asymptotic stability, and cross-validates the
certificate by direct simulation of the full fourth-order model, its
exact swing-equation reduction, and the underlying forced pendulum.
"""

from .core import (
    DerivedConstants,
    NumericalError,
    ParameterError,
    SgParameters,
    SgState,
    derive_constants,
    emf,
    full_rhs,
    inverse_park,
    model_rhs,
    park,
    storage_energy,
    wrap_angle,
)
from .design import (
    NominalSpec,
    apply_virtual_inductor,
    field_flux,
    inverter_voltage_command,
    size_parameters,
)
from .equilibria import (
    EquilibriumPoint,
    Stability,
    a0_closed_form,
    char_poly,
    classify,
    linearize,
    solve_equilibria,
)
from .certificate import (
    CertificateReport,
    VelocityBand,
    certificate_csv,
    check_certificate,
    envelope_g,
    envelope_h,
    exp_sin_moment,
    nscr,
    p_bounds,
    rest_angles,
    velocity_band,
)
from .simulator import (
    BasinStatistics,
    ConvergedToEquilibrium,
    IntegratorConfig,
    PeriodicOrbit,
    StiffnessError,
    Trajectory,
    Undecided,
    basin_sample,
    cross_validate,
    detect_convergence,
    detect_periodic,
    integrate,
    simulate_ese,
    simulate_full,
    trajectory_csv,
)
from .swing import (
    EseState,
    PendulumParams,
    ese_from_full,
    ese_rhs,
    ese_rhs_fn,
    forcing_gamma,
    from_pendulum_coords,
    gamma_along,
    pendulum_energy,
    pendulum_rhs,
    pendulum_rhs_fn,
    reconstruct_iq,
    to_pendulum_coords,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
