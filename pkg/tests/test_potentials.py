import math

import numpy as np
import pytest
from hypothesis import given
from scipy.optimize import brentq
import hypothesis.strategies as st

from src.quantum_hj.numerics.microstate import PhysicalSetup
from src.quantum_hj.numerics.potentials import (
    FreeParticle,
    LinearPotential,
    StepBarrier,
    airy_argument,
    basis,
    check_admissible,
    classical_momentum,
    local_length,
    phase_ratio,
    potential_value,
    schrodinger_residual,
    turning_point,
    wavenumber,
    wronskian,
)
from src.quantum_hj.utils.errors import DomainError


def test_free_basis_at_origin():
    setup = PhysicalSetup(m=1.0, E=0.5, hbar=1.0)
    pair = basis(setup, 0.0)
    assert pair.phi.value == 1.0
    assert pair.theta.value == 0.0
    assert pair.phi_prime.value == 0.0
    assert pair.theta_prime.value == pytest.approx(1.0)


def test_wronskian_constants(free_setup, step_setup, linear_setup):
    assert wronskian(free_setup) == pytest.approx(1.0 / 1e-2)
    assert wronskian(step_setup) == pytest.approx(2.0 * 1.0 / 1e-1)
    alpha = 2.0 ** (1.0 / 3.0) / 1e-2 ** (2.0 / 3.0)
    assert wronskian(linear_setup) == pytest.approx(alpha / math.pi, rel=1e-14)


@pytest.mark.parametrize("x", [-3.7, -0.2, 0.0, 0.4, 2.9])
def test_free_sampled_wronskian(free_setup, x):
    assert basis(free_setup, x).wronskian() == pytest.approx(wronskian(free_setup), rel=1e-12)


@pytest.mark.parametrize("x", [0.0, 0.05, 0.7, 3.0, 40.0])
def test_step_sampled_wronskian_deep_in_the_barrier(step_setup, x):
    assert basis(step_setup, x).wronskian() == pytest.approx(wronskian(step_setup), rel=1e-12)


@given(st.floats(min_value=-20.0, max_value=30.0))
def test_linear_sampled_wronskian(zeta):
    setup = PhysicalSetup(m=1.0, E=0.5, hbar=1e-2, potential=LinearPotential(f=1.0))
    x = 0.5 + zeta / wavenumber(setup)
    assert basis(setup, x).wronskian() == pytest.approx(wronskian(setup), rel=1e-10)


def test_potential_values():
    assert potential_value(FreeParticle(), 3.0) == 0.0
    assert potential_value(StepBarrier(U=2.0), -1.0) == 0.0
    assert potential_value(StepBarrier(U=2.0), 0.0) == 2.0
    assert potential_value(LinearPotential(f=3.0), 2.0) == 6.0


def test_turning_points_and_classical_momentum(free_setup, step_setup, linear_setup):
    assert turning_point(free_setup) is None
    assert turning_point(step_setup) == 0.0
    assert turning_point(linear_setup) == 0.5
    assert classical_momentum(free_setup, 12.0) == pytest.approx(1.0)
    assert classical_momentum(step_setup, 0.5) == 0.0
    assert classical_momentum(step_setup, -0.5) == pytest.approx(1.0)
    assert classical_momentum(linear_setup, -1.5) == pytest.approx(2.0)
    assert classical_momentum(linear_setup, 1.0) == 0.0


@pytest.mark.parametrize(
    "setup, x, message",
    [
        (PhysicalSetup(1.0, 0.5, 0.1, StepBarrier(U=1.0)), -0.1, "x >= 0"),
        (PhysicalSetup(1.0, 1.5, 0.1, StepBarrier(U=1.0)), 0.1, "U > E"),
        (PhysicalSetup(1.0, 0.5, 0.1, LinearPotential(f=-1.0)), 0.0, "f > 0"),
        (PhysicalSetup(1.0, -0.5, 0.1), 0.0, "E > 0"),
        (PhysicalSetup(1.0, 0.5, 0.1), math.nan, "finite"),
    ],
)
def test_inadmissible_inputs(setup, x, message):
    with pytest.raises(DomainError, match=message):
        check_admissible(setup, x)
    with pytest.raises(DomainError):
        basis(setup, x)


def test_airy_argument_only_for_linear(free_setup, linear_setup):
    assert airy_argument(linear_setup, 0.5) == 0.0
    with pytest.raises(DomainError):
        airy_argument(free_setup, 0.5)


def test_free_phase_ratio_branches(free_setup):
    k = wavenumber(free_setup)
    for x in np.linspace(-1.0, 1.0, 41):
        ratio, branch = phase_ratio(free_setup, float(x))
        v = k * x
        assert abs(v - branch * math.pi) <= 0.5 * math.pi + 1e-12
        assert ratio.value == pytest.approx(math.tan(v), rel=1e-9, abs=1e-12)


def test_step_phase_ratio_is_log_scaled(step_setup):
    ratio, branch = phase_ratio(step_setup, 50.0)
    assert branch == 0
    assert ratio.log_magnitude == pytest.approx(2.0 * 1.0 * 50.0 / 0.1)


def test_linear_phase_ratio_branches_count_ai_zeros(linear_setup):
    alpha = wavenumber(linear_setup)
    # zeta = -3.2 lies between the first two zeros of Ai, -4.5 between the second and third
    between = 0.5 + (-3.2) / alpha
    left = 0.5 + (-4.5) / alpha
    _, branch_between = phase_ratio(linear_setup, between)
    _, branch_left = phase_ratio(linear_setup, left)
    assert branch_between == -1
    assert branch_left == -2
    _, branch_forbidden = phase_ratio(linear_setup, 0.5 + 3.0 / alpha)
    assert branch_forbidden == 0


def test_local_length(free_setup, linear_setup):
    assert local_length(free_setup, 0.0) == pytest.approx(1e-2)
    alpha = wavenumber(linear_setup)
    assert local_length(linear_setup, 0.5) == pytest.approx(1.0 / alpha)
    assert local_length(linear_setup, 0.5 - 16.0 / alpha) == pytest.approx(1.0 / (4.0 * alpha))


@pytest.mark.parametrize("x", [-2.0, 0.0, 0.3, 1.7])
def test_free_basis_solves_schrodinger(free_setup, x):
    res_phi, res_theta = schrodinger_residual(free_setup, x)
    assert res_phi < 1e-6 and res_theta < 1e-6


@pytest.mark.parametrize("x", [0.0, 1e-4, 0.2, 2.0, 30.0])
def test_step_basis_solves_schrodinger(step_setup, x):
    res_phi, res_theta = schrodinger_residual(step_setup, x)
    assert res_phi < 1e-6 and res_theta < 1e-6


@pytest.mark.parametrize("zeta", [-25.0, -8.0, -2.3, 0.0, 1.5, 9.0, 40.0])
def test_linear_basis_solves_schrodinger(linear_setup, zeta):
    x = 0.5 + zeta / wavenumber(linear_setup)
    res_phi, res_theta = schrodinger_residual(linear_setup, x)
    assert res_phi < 1e-6 and res_theta < 1e-6


@pytest.mark.parametrize("f", [1e-2, 1e-4, 1e-6])
def test_linear_basis_tends_to_free_sinusoid_as_force_vanishes(f):
    setup = PhysicalSetup(m=1.0, E=0.5, hbar=1e-2, potential=LinearPotential(f=f))
    wavelength = 2.0 * math.pi * setup.hbar / math.sqrt(2.0 * setup.m * setup.E)

    def phi(x):
        return basis(setup, float(x)).phi.value

    xs = np.linspace(-wavelength, wavelength, 81)
    values = [phi(x) for x in xs]
    zeros = [
        brentq(phi, xs[i], xs[i + 1], xtol=1e-15)
        for i in range(len(xs) - 1)
        if values[i] * values[i + 1] < 0.0
    ]
    assert len(zeros) >= 3
    np.testing.assert_allclose(2.0 * np.diff(zeros), wavelength, rtol=1e-3)
