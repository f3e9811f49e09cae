import math

import numpy as np
import pytest

from src.quantum_hj.analysis.climit import (
    EtaFamily,
    Observable,
    average_principal_function,
    average_time,
    cycle_average,
    envelope,
    eta_family_sweep,
    eta_microstate,
    fit_exponential_rate,
    fit_power_law,
    free_cycle_reference,
    free_envelope,
    geometric_grid,
    hbar_sweep,
    local_wavelength,
    observable_function,
    potential_gap,
    turning_region_width,
    turning_width_sweep,
)
from src.quantum_hj.numerics.microstate import Microstate, PhysicalSetup, indeterminacy_signature
from src.quantum_hj.numerics.potentials import LinearPotential, StepBarrier, classical_momentum, wavenumber
from src.quantum_hj.numerics.trajectory import conjugate_momentum, log_conjugate_momentum
from src.quantum_hj.utils.errors import DomainError


def test_free_cycle_reference_values():
    setup = PhysicalSetup(1.0, 0.5, 1e-2)
    ref = free_cycle_reference(setup, Microstate(2.0, 1.0, 0.0))
    assert ref.mean == pytest.approx(1.0)
    assert ref.mean_square == pytest.approx(1.0606602, abs=1e-7)
    assert ref.variance == pytest.approx(0.0606602, abs=1e-7)
    assert ref.quantum_term_mean == pytest.approx(-0.0303301, abs=1e-7)
    assert ref.wavelength == pytest.approx(0.01 * math.pi)


def test_free_cycle_average_matches_closed_form(free_setup, make_microstates):
    for ms in make_microstates(6):
        got = cycle_average(free_setup, ms, 0.37)
        ref = free_cycle_reference(free_setup, ms)
        assert got.mean == pytest.approx(1.0, rel=1e-8)
        assert got.mean_square == pytest.approx(ref.mean_square, rel=1e-8)
        assert got.variance == pytest.approx(ref.variance, rel=1e-6, abs=1e-9)
        assert got.quantum_term_mean == pytest.approx(ref.quantum_term_mean, rel=1e-6, abs=1e-9)
        assert got.quantum_term_mean == pytest.approx(-0.5 * got.variance, rel=1e-6, abs=1e-9)


def test_classical_microstate_has_no_variance(free_setup, classical_ms):
    got = cycle_average(free_setup, classical_ms, -1.2)
    assert got.variance == pytest.approx(0.0, abs=1e-10)
    assert got.quantum_term_mean == pytest.approx(0.0, abs=1e-10)


def test_linear_cycle_average_tracks_classical_momentum():
    setup = PhysicalSetup(1.0, 0.5, 1e-3, LinearPotential(f=1.0))
    x = -1.0
    got = cycle_average(setup, Microstate(2.0, 1.0, 0.5), x)
    assert got.mean == pytest.approx(classical_momentum(setup, x), rel=5e-3)


def test_cycle_average_needs_an_oscillation(step_setup, linear_setup, classical_ms):
    with pytest.raises(DomainError, match="no oscillation cycle"):
        cycle_average(step_setup, classical_ms, 0.5)
    with pytest.raises(DomainError, match="no oscillation cycle"):
        cycle_average(linear_setup, classical_ms, 0.6)


def test_local_wavelength(free_setup, linear_setup):
    assert local_wavelength(free_setup, 5.0) == pytest.approx(0.01 * math.pi)
    alpha = wavenumber(linear_setup)
    zeta = -50.0
    approx = math.pi / (alpha * math.sqrt(-zeta))
    assert local_wavelength(linear_setup, 0.5 + zeta / alpha) == pytest.approx(approx, rel=1e-3)


def test_average_time_vanishes_at_the_origin(free_setup, make_microstates):
    assert average_time(free_setup, make_microstates(1)[0], 0.0) == 0.0


@pytest.mark.slow
def test_average_time_is_classical_for_every_microstate(make_microstates):
    setup = PhysicalSetup(1.0, 0.5, 1e-4)
    x = 0.7
    expected = math.sqrt(setup.m / (2.0 * setup.E)) * x
    for ms in make_microstates(20):
        assert average_time(setup, ms, x) == pytest.approx(expected, rel=1e-8)


def test_average_principal_function_tends_to_energy_times_time():
    setup = PhysicalSetup(1.0, 0.5, 1e-4)
    ms = Microstate(1.7, 0.9, -0.4)
    x = 0.7
    s_bar = average_principal_function(setup, ms, x)
    assert s_bar == pytest.approx(setup.E * average_time(setup, ms, x), abs=1e-3)


def test_free_only_averages_reject_other_potentials(linear_setup, classical_ms):
    with pytest.raises(DomainError, match="free particle"):
        average_time(linear_setup, classical_ms, 0.1)
    with pytest.raises(DomainError, match="free particle"):
        free_envelope(linear_setup, classical_ms)


def test_free_envelope_brackets_momentum(free_setup):
    ms = Microstate(2.0, 1.0, 0.0)
    lo, hi = free_envelope(free_setup, ms)
    assert lo == pytest.approx(math.sqrt(2.0) / 2.0)
    assert hi == pytest.approx(math.sqrt(2.0))
    samples = [conjugate_momentum(free_setup, ms, float(x)) for x in np.linspace(0.0, 0.05, 501)]
    assert min(samples) >= lo * (1.0 - 1e-12)
    assert max(samples) <= hi * (1.0 + 1e-12)


def test_sampled_envelope_brackets_value(linear_setup):
    ms = Microstate(2.0, 1.0, 0.5)
    x = 0.3
    value = conjugate_momentum(linear_setup, ms, x)
    lo, hi = envelope(linear_setup, ms, x, Observable.WX, value)
    assert lo <= value <= hi
    assert hi - lo > 0.1 * value


def test_step_log_momentum_decay_rate():
    setup = PhysicalSetup(1.0, 0.5, 1e-1, StepBarrier(U=1.0))
    hbars = geometric_grid(1e-1, 1e-4, 16)
    records = hbar_sweep(setup, Microstate(1.4, 0.6, 0.3), 1.0, hbars, Observable.LOG_WX)
    assert all(r.error is None for r in records)
    assert all(r.envelope_min <= r.value <= r.envelope_max for r in records)
    fit = fit_exponential_rate([r.hbar for r in records], [r.value for r in records])
    # log W_x ~ log(2 kappa s / b) - 2 kappa x / hbar with kappa = 1, x = 1
    assert fit.slope == pytest.approx(-2.0, rel=1e-2)


def test_step_reduced_action_saturates():
    setup = PhysicalSetup(1.0, 0.5, 1e-1, StepBarrier(U=1.0))
    records = hbar_sweep(
        setup, Microstate(1.0, 2.0, -0.5), 1.0, geometric_grid(1e-1, 1e-4, 7), "W_over_hbar"
    )
    values = [r.value for r in records]
    assert values[-1] == pytest.approx(0.5 * math.pi, abs=1e-6)
    assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))


def test_step_time_sweep_shrinks(step_setup):
    records = hbar_sweep(
        step_setup, Microstate(1.0, 1.0, 0.0), 1.0, geometric_grid(1e-1, 1e-2, 6), Observable.T_MINUS_T0
    )
    magnitudes = [abs(r.value) for r in records]
    assert all(b < a for a, b in zip(magnitudes, magnitudes[1:]))


def test_free_sweep_envelope_is_constant(free_setup):
    ms = Microstate(2.0, 1.0, 0.0)
    records = hbar_sweep(free_setup, ms, 0.3, geometric_grid(1e-1, 1e-3, 5), Observable.WX)
    lo, hi = free_envelope(free_setup, ms)
    for r in records:
        assert r.envelope_min == pytest.approx(lo)
        assert r.envelope_max == pytest.approx(hi)
        assert r.observable_name == "Wx"


def test_sweep_records_failed_points():
    setup = PhysicalSetup(1.0, 0.5, 1e-1, StepBarrier(U=1.0))
    records = hbar_sweep(setup, Microstate(1.0, 1.0, 0.0), -0.5, [1e-1, 1e-2], Observable.WX)
    assert len(records) == 2
    assert all(r.error is not None and math.isnan(r.value) for r in records)


def test_sweep_rejects_bad_grids(free_setup, classical_ms):
    with pytest.raises(DomainError, match="empty"):
        hbar_sweep(free_setup, classical_ms, 0.0, [], Observable.WX)
    with pytest.raises(DomainError, match="positive"):
        hbar_sweep(free_setup, classical_ms, 0.0, [1e-2, 0.0], Observable.WX)


def test_eta_microstate_is_unit_gauge():
    for eta in (0.0, 1e-3, 1.25, 40.0):
        ms = eta_microstate(eta)
        assert ms.normalization == pytest.approx(1.0, rel=1e-12)
        assert indeterminacy_signature(ms).amplitude_sq == pytest.approx(eta, abs=1e-12)
    assert eta_microstate(0.0).as_tuple() == pytest.approx((1.0, 1.0, 0.0))
    with pytest.raises(DomainError):
        eta_microstate(-1e-3)


def test_vanishing_eta_collapses_the_envelope(free_setup):
    hbars = geometric_grid(1e-1, 1e-4, 7)
    records = eta_family_sweep(free_setup, EtaFamily(lambda h: h, label="hbar"), hbars, 0.3)
    widths = [r.envelope_max - r.envelope_min for r in records]
    assert all(b < a for a, b in zip(widths, widths[1:]))
    # width = k eta^(1/2) in the unit gauge
    fit = fit_power_law(hbars, widths)
    assert fit.slope == pytest.approx(0.5, rel=1e-8)


@pytest.mark.slow
def test_vanishing_eta_reaches_the_classical_trajectory(free_setup):
    hbars = geometric_grid(1e-1, 1e-6, 11)
    records = eta_family_sweep(free_setup, EtaFamily(lambda h: h, label="hbar"), hbars, 0.3)
    assert all(r.error is None for r in records)
    k = classical_momentum(free_setup, 0.3)
    final = records[-1]
    assert final.hbar == pytest.approx(1e-6)
    assert final.envelope_max - final.envelope_min == pytest.approx(1e-3 * k, rel=1e-6)
    assert final.envelope_min <= final.value <= final.envelope_max
    assert abs(final.value - k) <= 1e-3 * k
    widths = [r.envelope_max - r.envelope_min for r in records]
    assert fit_power_law(hbars, widths).slope == pytest.approx(0.5, rel=1e-6)


def test_constant_eta_keeps_the_envelope(free_setup):
    hbars = geometric_grid(1e-1, 1e-4, 7)
    records = eta_family_sweep(free_setup, EtaFamily(lambda h: 1.25, label="1.25"), hbars, 0.3)
    widths = [r.envelope_max - r.envelope_min for r in records]
    assert widths == pytest.approx([math.sqrt(1.25)] * len(widths), rel=1e-10)


def test_eta_family_records_bad_eta(free_setup):
    records = eta_family_sweep(free_setup, EtaFamily(lambda h: -h), [1e-2], 0.3)
    assert records[0].error is not None


def test_turning_width_requires_linear_potential(free_setup, linear_setup, classical_ms):
    with pytest.raises(DomainError):
        turning_region_width(free_setup, classical_ms, 1e-3, 0.05)
    with pytest.raises(DomainError, match="epsilon"):
        turning_region_width(linear_setup, classical_ms, 1e-3, 0.0)


def test_turning_width_straddles_turning_point(linear_setup, classical_ms):
    width = turning_region_width(linear_setup, classical_ms, 1e-2, 0.05)
    alpha = wavenumber(linear_setup)
    assert 0.0 < width < 20.0 / alpha


@pytest.mark.slow
@pytest.mark.parametrize("abc", [(1.0, 1.0, 0.0), (2.0, 1.0, 0.0), (5.0, 1.0, 1.0)])
def test_turning_width_scales_as_two_thirds_power(linear_setup, abc):
    result = turning_width_sweep(linear_setup, Microstate(*abc), geometric_grid(1e-9, 1e-6, 4), 0.05)
    assert all(r.error is None for r in result.records)
    assert 0.6167 <= result.fit.slope <= 0.7167
    assert result.fit.slope == pytest.approx(2.0 / 3.0, abs=1e-6)


def test_fit_helpers():
    xs = np.array([1.0, 2.0, 4.0, 8.0])
    fit = fit_power_law(xs, 3.0 * xs**2)
    assert fit.slope == pytest.approx(2.0)
    assert fit.intercept == pytest.approx(math.log(3.0))
    assert fit.residual == pytest.approx(0.0, abs=1e-12)
    assert fit.points == 4
    rate = fit_exponential_rate([0.1, 0.2, 0.5], [1.0 - 3.0 / h for h in (0.1, 0.2, 0.5)])
    assert rate.slope == pytest.approx(-3.0)
    with pytest.raises(DomainError):
        fit_power_law([1.0, 2.0], [1.0, math.nan])


def test_observable_function_dispatch(free_setup, classical_ms):
    assert observable_function(Observable.WX) is conjugate_momentum
    assert observable_function("log_Wx") is log_conjugate_momentum
    w_over_hbar = observable_function(Observable.W_OVER_HBAR)
    assert w_over_hbar(free_setup, classical_ms, 0.25) == pytest.approx(25.0)
    with pytest.raises(ValueError):
        observable_function("momentum")


def test_geometric_grid():
    grid = geometric_grid(1e-1, 1e-3, 3)
    np.testing.assert_allclose(grid, [1e-1, 1e-2, 1e-3])
    with pytest.raises(DomainError):
        geometric_grid(1e-1, 1e-3, 0)
    with pytest.raises(DomainError):
        geometric_grid(0.0, 1e-3, 5)


def test_potential_gap(linear_setup):
    assert potential_gap(linear_setup, 2.0) == pytest.approx(1.5)
