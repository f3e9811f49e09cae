import math

import pytest
from hypothesis import given
import hypothesis.strategies as st

from src.quantum_hj.numerics.microstate import (
    Microstate,
    PhysicalSetup,
    coefficients_from_initials,
    denominator_forms,
    indeterminacy_signature,
    initials_from_coefficients,
    momentum_constant,
    validate,
)
from src.quantum_hj.numerics.potentials import LinearPotential, StepBarrier, wavenumber
from src.quantum_hj.utils.errors import DomainError, NonPositiveDefinite, NoRealSolution


@pytest.mark.parametrize(
    "triple, message",
    [
        ((1.0, 1.0, 2.0), "ab - c\\^2/4 > 0"),
        ((1.0, 1.0, -2.5), "ab - c\\^2/4 > 0"),
        ((0.0, 1.0, 0.0), "a > 0"),
        ((-1.0, -1.0, 0.0), "a > 0"),
        ((1.0, 0.0, 0.0), "b > 0"),
        ((1.0, math.nan, 0.0), "non-finite"),
    ],
)
def test_validate_rejects(triple, message):
    with pytest.raises(NonPositiveDefinite, match=message):
        validate(Microstate(*triple))


def test_validate_accepts_and_returns_input():
    ms = Microstate(2.0, 1.0, 0.5)
    assert validate(ms) is ms
    assert ms.normalization == pytest.approx(2.0 - 0.0625)
    assert ms.scaled(2.0).as_tuple() == (4.0, 2.0, 1.0)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"m": 0.0, "E": 0.5, "hbar": 0.1},
        {"m": 1.0, "E": math.inf, "hbar": 0.1},
        {"m": 1.0, "E": 0.5, "hbar": 0.0},
        {"m": 1.0, "E": 0.5, "hbar": -1e-3},
    ],
)
def test_setup_rejects_bad_parameters(kwargs):
    with pytest.raises(DomainError):
        PhysicalSetup(**kwargs)


def test_setup_copies():
    setup = PhysicalSetup(m=1.0, E=0.5, hbar=0.1)
    assert setup.with_hbar(1e-3).hbar == 1e-3
    assert setup.with_energy(2.0).E == 2.0
    assert setup.hbar == 0.1


@pytest.mark.parametrize("x0", [-1.3, 0.0, 0.25, 7.0])
def test_classical_microstate_initials(x0):
    setup = PhysicalSetup(m=1.0, E=0.5, hbar=1.0)
    wx0, wxx0 = initials_from_coefficients(setup, Microstate(1.0, 1.0, 0.0), x0)
    assert wx0 == pytest.approx(1.0, rel=1e-14)
    assert wxx0 == pytest.approx(0.0, abs=1e-14)


def _cases():
    linear = PhysicalSetup(1.0, 0.5, 1e-2, LinearPotential(f=1.0))
    alpha = wavenumber(linear)
    return [
        (PhysicalSetup(1.0, 0.5, 1e-2), [-0.3, 0.0, 0.021]),
        (PhysicalSetup(1.0, 0.5, 1e-1, StepBarrier(U=1.0)), [0.0, 0.05, 0.3]),
        (linear, [0.5 + zeta / alpha for zeta in (-5.0, -1.1, 0.0, 2.0)]),
    ]


def test_initials_recover_unit_gauge_microstate(make_microstates):
    for setup, positions in _cases():
        for ms in make_microstates(5):
            unit = ms.scaled(1.0 / math.sqrt(ms.normalization))
            for x0 in positions:
                wx0, wxx0 = initials_from_coefficients(setup, ms, x0)
                recovered = coefficients_from_initials(setup, x0, wx0, wxx0)
                assert recovered.normalization == pytest.approx(1.0, rel=1e-8)
                assert recovered.as_tuple() == pytest.approx(unit.as_tuple(), rel=1e-8, abs=1e-9)


def test_initials_must_be_positive_and_finite():
    setup = PhysicalSetup(1.0, 0.5, 1e-2)
    with pytest.raises(DomainError, match="positive"):
        coefficients_from_initials(setup, 0.0, 0.0, 0.0)
    with pytest.raises(DomainError, match="positive"):
        coefficients_from_initials(setup, 0.0, -1.0, 0.0)
    with pytest.raises(DomainError, match="finite"):
        coefficients_from_initials(setup, 0.0, 1.0, math.nan)


def test_unrepresentable_initials_have_no_real_solution():
    setup = PhysicalSetup(1.0, 0.5, 1.0)
    with pytest.raises(NoRealSolution):
        coefficients_from_initials(setup, 0.0, 1.0, 1e200)


def test_initials_are_gauge_invariant():
    setup = PhysicalSetup(1.0, 0.5, 1e-2)
    ms = Microstate(2.0, 1.0, 0.4)
    assert initials_from_coefficients(setup, ms, 0.013) == pytest.approx(
        initials_from_coefficients(setup, ms.scaled(17.0), 0.013), rel=1e-13
    )


def test_momentum_constant():
    setup = PhysicalSetup(1.0, 0.5, 1e-2)
    ms = Microstate(2.0, 2.0, 0.0)
    assert momentum_constant(setup, ms).value == pytest.approx(1e-2 * 2.0 * 100.0)


def test_free_denominator_forms_match_definition():
    setup = PhysicalSetup(1.0, 0.5, 1e-2)
    ms = Microstate(2.0, 1.0, 0.6)
    x = 0.0123
    v = 100.0 * x
    phi, theta = math.cos(v), math.sin(v)
    dphi, dtheta = -100.0 * math.sin(v), 100.0 * math.cos(v)
    forms = denominator_forms(setup, ms, x)
    assert forms.value.value == pytest.approx(2.0 * phi**2 + theta**2 + 0.6 * phi * theta, rel=1e-13)
    assert forms.slope.value == pytest.approx(
        4.0 * phi * dphi + 2.0 * theta * dtheta + 0.6 * (dphi * theta + phi * dtheta), rel=1e-12
    )
    assert forms.curvature.value == pytest.approx(
        2.0 * dphi**2 + dtheta**2 + 0.6 * dphi * dtheta, rel=1e-12
    )


def test_indeterminacy_signature():
    sig = indeterminacy_signature(Microstate(2.0, 1.0, 0.0))
    assert sig.amplitude_sq == pytest.approx(1.0)
    assert sig.phase == pytest.approx(0.5 * math.pi)
    assert indeterminacy_signature(Microstate(1.0, 1.0, 1.0)).phase == pytest.approx(0.0)
    assert indeterminacy_signature(Microstate(1.0, 1.0, -1.0)).phase == 0.0
    assert 0.0 < indeterminacy_signature(Microstate(1.5, 1.0, -0.5)).phase < math.pi
    degenerate = indeterminacy_signature(Microstate(1.0, 1.0, 0.0))
    assert degenerate.amplitude_sq == 0.0
    assert degenerate.phase is None
    assert not degenerate.phase_defined


@given(
    st.floats(min_value=0.1, max_value=10.0),
    st.floats(min_value=0.1, max_value=10.0),
    st.floats(min_value=-0.99, max_value=0.99),
)
def test_signature_phase_in_half_open_range(a, b, fraction):
    ms = Microstate(a, b, fraction * 2.0 * math.sqrt(a * b))
    sig = indeterminacy_signature(ms)
    assert sig.amplitude_sq == pytest.approx((a - b) ** 2 + ms.c**2)
    if sig.phase_defined:
        assert 0.0 <= sig.phase < math.pi
    if abs(a - b) > 1e-6:
        assert 0.0 < sig.phase < math.pi
