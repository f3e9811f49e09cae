"""
Quantum Trajectory Toolkit.

Closed-form trajectories of the quantum stationary Hamilton-Jacobi equation
for the free particle, the step barrier and the linear potential, with
classical-limit sweeps and brute-force oracles.
"""

__version__ = "0.1.0"
