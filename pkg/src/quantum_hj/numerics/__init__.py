"""
Numerics module exports.
"""

# Special functions
from .specfun import ScaledValue, airy_ai, airy_bi, airy_phase, airy_scaled, log_sum

# Potentials and microstates
from .potentials import FreeParticle, LinearPotential, StepBarrier, basis, schrodinger_residual
from .microstate import (
    Microstate,
    PhysicalSetup,
    coefficients_from_initials,
    indeterminacy_signature,
    initials_from_coefficients,
    validate,
)

# Trajectory
from .trajectory import (
    ReducedActionConvention,
    TrajectoryPoint,
    conjugate_momentum,
    jacobi_time,
    momentum_derivatives,
    principal_function,
    qshje_residual,
    quantum_term,
    reduced_action,
    trajectory_table,
)

__all__ = [
    # Special functions
    "ScaledValue",
    "airy_ai",
    "airy_bi",
    "airy_phase",
    "airy_scaled",
    "log_sum",
    # Potentials and microstates
    "FreeParticle",
    "StepBarrier",
    "LinearPotential",
    "basis",
    "schrodinger_residual",
    "Microstate",
    "PhysicalSetup",
    "validate",
    "initials_from_coefficients",
    "coefficients_from_initials",
    "indeterminacy_signature",
    # Trajectory
    "ReducedActionConvention",
    "TrajectoryPoint",
    "conjugate_momentum",
    "momentum_derivatives",
    "quantum_term",
    "qshje_residual",
    "reduced_action",
    "jacobi_time",
    "principal_function",
    "trajectory_table",
]
