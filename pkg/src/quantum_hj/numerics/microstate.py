"""
Microstates of the stationary quantum Hamilton-Jacobi equation.

A microstate (a, b, c) selects one solution through the denominator

    D(x) = a phi^2 + b theta^2 + c phi theta

of the conjugate momentum W_x = hbar s w / D, where s = (ab - c^2/4)^(1/2) and
w is the constant Wronskian of the unnormalized basis. (a, b, c) and
(lambda a, lambda b, lambda c) give the same W_x; the unit gauge
ab - c^2/4 = 1 makes the triple unique.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Tuple

from ..utils.errors import DomainError, NonPositiveDefinite, NoRealSolution
from ..utils.logging import get_logger
from .potentials import (
    FreeParticle,
    PotentialModel,
    basis,
    check_admissible,
    wavenumber,
    wronskian,
)
from .specfun import ScaledValue, log_sum

logger = get_logger()


@dataclass(frozen=True)
class Microstate:
    """Coefficient triple (a, b, c) of the denominator D."""

    a: float
    b: float
    c: float

    @property
    def normalization(self) -> float:
        """ab - c^2/4, the gauge constant."""
        return self.a * self.b - 0.25 * self.c * self.c

    def scaled(self, factor: float) -> "Microstate":
        """Same microstate in another gauge."""
        return Microstate(self.a * factor, self.b * factor, self.c * factor)

    def as_tuple(self) -> Tuple[float, float, float]:
        return (self.a, self.b, self.c)


@dataclass(frozen=True)
class PhysicalSetup:
    """
    Mass, energy, hbar and potential of one evaluation.

    hbar is an independent variable: the classical limit is reached by sweeping
    it toward zero, never by setting it to zero.
    """

    m: float
    E: float
    hbar: float
    potential: PotentialModel = FreeParticle()

    def __post_init__(self):
        if not (math.isfinite(self.m) and self.m > 0.0):
            raise DomainError(f"Mass must be positive and finite, got m={self.m}")
        if not math.isfinite(self.E):
            raise DomainError(f"Energy must be finite, got E={self.E}")
        if not (math.isfinite(self.hbar) and self.hbar > 0.0):
            raise DomainError(f"hbar must be positive and finite, got hbar={self.hbar}")

    def with_hbar(self, hbar: float) -> "PhysicalSetup":
        return replace(self, hbar=hbar)

    def with_energy(self, energy: float) -> "PhysicalSetup":
        return replace(self, E=energy)


@dataclass(frozen=True)
class IndeterminacySignature:
    """
    Amplitude and phase of the microstate's residual indeterminacy.

    phase is None for a = b, c = 0, where the oscillating term vanishes, and
    0 for a = b, c != 0; every other microstate has a phase in (0, pi).
    """

    amplitude_sq: float
    phase: Optional[float]

    @property
    def phase_defined(self) -> bool:
        return self.phase is not None


@dataclass(frozen=True)
class DenominatorForms:
    """D, D' and P = a phi'^2 + b theta'^2 + c phi' theta' at one x."""

    value: ScaledValue
    slope: ScaledValue
    curvature: ScaledValue


def validate(ms: Microstate) -> Microstate:
    """
    Check positive definiteness of the microstate.

    Args:
        ms: Candidate microstate.

    Returns:
        The microstate unchanged.

    Raises:
        NonPositiveDefinite: If a <= 0, b <= 0 or ab - c^2/4 <= 0.
    """
    values = (ms.a, ms.b, ms.c)
    if not all(math.isfinite(v) for v in values):
        raise NonPositiveDefinite(f"Microstate {values} has non-finite coefficients")
    if ms.a <= 0.0:
        raise NonPositiveDefinite(f"Microstate {values} violates a > 0")
    if ms.b <= 0.0:
        raise NonPositiveDefinite(f"Microstate {values} violates b > 0")
    if ms.normalization <= 0.0:
        raise NonPositiveDefinite(
            f"Microstate {values} violates ab - c^2/4 > 0 (got {ms.normalization})"
        )
    return ms


def denominator_forms(setup: PhysicalSetup, ms: Microstate, x: float) -> DenominatorForms:
    """
    Quadratic forms of the basis entering W_x and its derivatives.

    The free particle uses double-angle closed forms so that D' and P carry
    no rounding from products of cosines and sines.
    """
    if isinstance(setup.potential, FreeParticle):
        check_admissible(setup, x)
        w = wavenumber(setup)
        two_v = 2.0 * w * x
        cos2, sin2 = math.cos(two_v), math.sin(two_v)
        mean = 0.5 * (ms.a + ms.b)
        swing = 0.5 * (ms.a - ms.b) * cos2 + 0.5 * ms.c * sin2
        return DenominatorForms(
            value=ScaledValue.from_float(mean + swing),
            slope=ScaledValue.from_float(w * (-(ms.a - ms.b) * sin2 + ms.c * cos2)),
            curvature=ScaledValue.from_float(w * w * (mean - swing)),
        )

    pair = basis(setup, x)
    phi, theta, dphi, dtheta = pair.phi, pair.theta, pair.phi_prime, pair.theta_prime
    value = log_sum([phi * phi * ms.a, theta * theta * ms.b, phi * theta * ms.c])
    slope = log_sum(
        [
            phi * dphi * (2.0 * ms.a),
            theta * dtheta * (2.0 * ms.b),
            dphi * theta * ms.c,
            phi * dtheta * ms.c,
        ]
    )
    curvature = log_sum([dphi * dphi * ms.a, dtheta * dtheta * ms.b, dphi * dtheta * ms.c])
    return DenominatorForms(value=value, slope=slope, curvature=curvature)


def momentum_constant(setup: PhysicalSetup, ms: Microstate) -> ScaledValue:
    """hbar s w, the numerator of W_x = hbar s w / D."""
    return ScaledValue.from_float(setup.hbar * math.sqrt(ms.normalization) * wronskian(setup))


def initials_from_coefficients(
    setup: PhysicalSetup, ms: Microstate, x0: float
) -> Tuple[float, float]:
    """
    Initial values [W_x(x0), W_xx(x0)] of a microstate.

    Args:
        setup: Physical setup.
        ms: Valid microstate.
        x0: Admissible position.

    Returns:
        Tuple (Wx0, Wxx0).

        # free, m = 1, E = 1/2, hbar = 1, (1, 1, 0) -> (1.0, 0.0) at any x0
    """
    validate(ms)
    forms = denominator_forms(setup, ms, x0)
    wx = momentum_constant(setup, ms) / forms.value
    wxx = -(wx * forms.slope / forms.value)
    return wx.value, wxx.value


def coefficients_from_initials(
    setup: PhysicalSetup, x0: float, Wx0: float, Wxx0: float
) -> Microstate:
    """
    Recover the unit-gauge microstate from initial values.

    The initial values fix D(x0) and D'(x0); the Wronskian identity
    P D - D'^2/4 = s^2 w^2 with s = 1 fixes P. Writing the forms as
    G = A M A^T with A = [[phi, theta], [phi', theta']] and
    M = [[a, c/2], [c/2, b]] gives M = A^-1 G A^-T.

    Args:
        setup: Physical setup.
        x0: Admissible position.
        Wx0: Conjugate momentum at x0, strictly positive.
        Wxx0: Its derivative at x0.

    Returns:
        Microstate with ab - c^2/4 = 1.

    Raises:
        DomainError: If Wx0 <= 0 or the inputs are not finite.
        NoRealSolution: If the recovered triple is not positive definite or
            not representable in double precision.
    """
    if not (math.isfinite(Wx0) and math.isfinite(Wxx0)):
        raise DomainError(f"Initial values must be finite, got Wx0={Wx0}, Wxx0={Wxx0}")
    if Wx0 <= 0.0:
        raise DomainError(f"Initial conjugate momentum must be positive, got Wx0={Wx0}")

    w = wronskian(setup)
    pair = basis(setup, x0)
    d0 = setup.hbar * w / Wx0
    d1 = -Wxx0 * d0 / Wx0
    p = (w * w + 0.25 * d1 * d1) / d0

    forms = (ScaledValue.from_float(d0), ScaledValue.from_float(0.5 * d1), ScaledValue.from_float(p))
    rows = (
        (pair.theta_prime, -pair.theta),
        (-pair.phi_prime, pair.phi),
    )

    def entry(i: int, j: int) -> float:
        ri, rj = rows[i], rows[j]
        total = log_sum(
            [
                ri[0] * rj[0] * forms[0],
                ri[0] * rj[1] * forms[1],
                ri[1] * rj[0] * forms[1],
                ri[1] * rj[1] * forms[2],
            ]
        )
        return (total / ScaledValue.from_float(w * w)).value

    ms = Microstate(a=entry(0, 0), b=entry(1, 1), c=2.0 * entry(0, 1))
    logger.debug("Microstate from initials", x0=x0, Wx0=Wx0, Wxx0=Wxx0, a=ms.a, b=ms.b, c=ms.c)
    try:
        return validate(ms)
    except NonPositiveDefinite as e:
        raise NoRealSolution(
            f"Initial values Wx0={Wx0}, Wxx0={Wxx0} at x0={x0} admit no positive-definite "
            f"microstate for E={setup.E}: {e}"
        ) from e


def indeterminacy_signature(ms: Microstate) -> IndeterminacySignature:
    """
    Amplitude (a - b)^2 + c^2 and phase arccot[c/(a - b)] in [0, pi).

    For a != b the phase lies in the open interval (0, pi). For a = b, c != 0
    the cotangent argument is infinite and both limits 0 and pi name the same
    phase modulo pi; it is reported as 0 for either sign of c.

    Returns:
        IndeterminacySignature; phase None when a = b and c = 0.

        # (2, 1, 0) -> amplitude_sq = 1, phase = pi/2
    """
    validate(ms)
    diff = ms.a - ms.b
    amplitude_sq = diff * diff + ms.c * ms.c
    if amplitude_sq == 0.0:
        return IndeterminacySignature(amplitude_sq=0.0, phase=None)
    phase = math.atan2(diff, ms.c) % math.pi
    if phase >= math.pi:
        # -tiny % pi rounds up to pi
        phase = 0.0
    return IndeterminacySignature(amplitude_sq=amplitude_sq, phase=phase)
