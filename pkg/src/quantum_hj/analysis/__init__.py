"""
Analysis module exports.
"""

# Classical limit
from .climit import (
    Observable,
    cycle_average,
    envelope,
    eta_family_sweep,
    hbar_sweep,
    turning_region_width,
)

# Oracles
from .oracle import (
    IntegratorConfig,
    fd_derivative,
    integrate_schrodinger,
    numeric_conjugate_momentum,
    quad_cycle_average,
)

__all__ = [
    # Classical limit
    "Observable",
    "cycle_average",
    "envelope",
    "hbar_sweep",
    "turning_region_width",
    "eta_family_sweep",
    # Oracles
    "IntegratorConfig",
    "integrate_schrodinger",
    "numeric_conjugate_momentum",
    "fd_derivative",
    "quad_cycle_average",
]
