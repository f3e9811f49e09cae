"""
Closed-form Schrödinger bases for the free particle, the step barrier and the
linear potential.

Bases are unnormalized:

    free     phi = cos(kx/hbar),   theta = sin(kx/hbar),   k = (2mE)^(1/2)
    step     phi = exp(-kx/hbar),  theta = exp(+kx/hbar),  k = [2m(U-E)]^(1/2), x >= 0
    linear   phi = Ai(zeta),       theta = Bi(zeta),       zeta = alpha (x - E/f)

with alpha = (2mf)^(1/3) / hbar^(2/3). Normalization constants live in the
trajectory closed forms through the constant Wronskian of each pair. Every
value is returned as a ScaledValue so the step exponentials and the growing
Airy function survive hbar -> 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, ClassVar, List, Optional, Tuple, Union

from ..utils.errors import DomainError
from .specfun import ScaledValue, airy_phase, airy_scaled, log_sum

if TYPE_CHECKING:
    from .microstate import PhysicalSetup


@dataclass(frozen=True)
class FreeParticle:
    """V = 0 everywhere."""

    name: ClassVar[str] = "free"


@dataclass(frozen=True)
class StepBarrier:
    """
    Infinite step of height U at x = 0; only the forbidden interior x >= 0 is
    modelled here, the allowed side x < 0 is a free particle.
    """

    U: float
    name: ClassVar[str] = "step"


@dataclass(frozen=True)
class LinearPotential:
    """V = f x with a constant force f > 0; the turning point is x = E/f."""

    f: float
    name: ClassVar[str] = "linear"


PotentialModel = Union[FreeParticle, StepBarrier, LinearPotential]


@dataclass(frozen=True)
class BasisPair:
    """Independent Schrödinger solutions and first derivatives at x."""

    phi: ScaledValue
    theta: ScaledValue
    phi_prime: ScaledValue
    theta_prime: ScaledValue
    x: float

    def wronskian(self) -> float:
        """phi theta' - phi' theta evaluated from the sampled values."""
        return log_sum([self.phi * self.theta_prime, -(self.phi_prime * self.theta)]).value


def potential_value(model: PotentialModel, x: float) -> float:
    """V(x) for the given model."""
    if isinstance(model, FreeParticle):
        return 0.0
    if isinstance(model, StepBarrier):
        return model.U if x >= 0.0 else 0.0
    if isinstance(model, LinearPotential):
        return model.f * x
    raise DomainError(f"Unknown potential model: {model!r}")


def turning_point(setup: PhysicalSetup) -> Optional[float]:
    """
    WKB turning point where E = V(x).

    Returns:
        E/f for the linear potential, 0 for the step, None for the free particle.
    """
    model = setup.potential
    if isinstance(model, LinearPotential):
        return setup.E / model.f
    if isinstance(model, StepBarrier):
        return 0.0
    return None


def classical_momentum(setup: PhysicalSetup, x: float) -> float:
    """[2m(E - V)]^(1/2) in the allowed region, 0 in the forbidden region."""
    kinetic = setup.E - potential_value(setup.potential, x)
    return math.sqrt(2.0 * setup.m * kinetic) if kinetic > 0.0 else 0.0


def check_admissible(setup: PhysicalSetup, x: float) -> None:
    """
    Raise DomainError unless the basis of ``setup`` can be evaluated at x.

    Raises:
        DomainError: Non-finite x, free particle with E <= 0, step with U <= E
            or x < 0, linear with f <= 0.
    """
    if not math.isfinite(x):
        raise DomainError(f"x must be finite, got {x}")
    model = setup.potential
    if isinstance(model, FreeParticle):
        if setup.E <= 0.0:
            raise DomainError(f"Free particle requires E > 0, got E={setup.E}")
    elif isinstance(model, StepBarrier):
        if model.U <= setup.E:
            raise DomainError(f"Step barrier requires U > E, got U={model.U}, E={setup.E}")
        if x < 0.0:
            raise DomainError(
                f"Step basis covers the forbidden interior x >= 0, got x={x}; "
                "use the free particle for x < 0"
            )
    elif isinstance(model, LinearPotential):
        if model.f <= 0.0:
            raise DomainError(f"Linear potential requires f > 0, got f={model.f}")
    else:
        raise DomainError(f"Unknown potential model: {model!r}")


def wavenumber(setup: PhysicalSetup) -> float:
    """
    The potential's characteristic inverse length.

    Returns:
        k/hbar (free), kappa/hbar (step) or alpha (linear).
    """
    model = setup.potential
    if isinstance(model, FreeParticle):
        return math.sqrt(2.0 * setup.m * setup.E) / setup.hbar
    if isinstance(model, StepBarrier):
        return math.sqrt(2.0 * setup.m * (model.U - setup.E)) / setup.hbar
    return (2.0 * setup.m * model.f) ** (1.0 / 3.0) / setup.hbar ** (2.0 / 3.0)


def airy_argument(setup: PhysicalSetup, x: float) -> float:
    """zeta = alpha (x - E/f) for the linear potential."""
    model = setup.potential
    if not isinstance(model, LinearPotential):
        raise DomainError("Airy argument is only defined for the linear potential")
    return wavenumber(setup) * (x - setup.E / model.f)


def wronskian(setup: PhysicalSetup) -> float:
    """
    Constant phi theta' - phi' theta of the unnormalized basis.

    Returns:
        k/hbar (free), 2 kappa/hbar (step), alpha/pi (linear).
    """
    check_admissible(setup, 0.0)
    scale = wavenumber(setup)
    if isinstance(setup.potential, StepBarrier):
        return 2.0 * scale
    if isinstance(setup.potential, LinearPotential):
        return scale / math.pi
    return scale


def basis(setup: PhysicalSetup, x: float) -> BasisPair:
    """
    Evaluate the basis pair of ``setup`` at x.

    Args:
        setup: Physical setup carrying the potential model.
        x: Position, admissible for the potential.

    Returns:
        BasisPair with log-scaled values and derivatives.

        # free, m = 1, E = 1/2, hbar = 1, x = 0 -> phi = 1, theta = 0, theta' = 1

    Raises:
        DomainError: If x or the parameters are inadmissible.
    """
    check_admissible(setup, x)
    model = setup.potential
    scale = wavenumber(setup)
    if isinstance(model, FreeParticle):
        v = scale * x
        cos_v, sin_v = math.cos(v), math.sin(v)
        return BasisPair(
            phi=ScaledValue.from_float(cos_v),
            theta=ScaledValue.from_float(sin_v),
            phi_prime=ScaledValue.from_float(-scale * sin_v),
            theta_prime=ScaledValue.from_float(scale * cos_v),
            x=x,
        )
    if isinstance(model, StepBarrier):
        exponent = scale * x
        log_scale = math.log(scale)
        return BasisPair(
            phi=ScaledValue(-exponent, 1),
            theta=ScaledValue(exponent, 1),
            phi_prime=ScaledValue(log_scale - exponent, -1),
            theta_prime=ScaledValue(log_scale + exponent, 1),
            x=x,
        )
    ai, ai_prime, bi, bi_prime = airy_scaled(scale * (x - setup.E / model.f))
    return BasisPair(
        phi=ai,
        theta=bi,
        phi_prime=ai_prime * scale,
        theta_prime=bi_prime * scale,
        x=x,
    )


def phase_ratio(setup: PhysicalSetup, x: float) -> Tuple[ScaledValue, int]:
    """
    theta/phi reduced to its principal branch.

    The ratio has poles at the zeros of phi. Writing theta/phi = tan(psi) with
    a continuous increasing phase psi, the branch index is j = round(psi/pi)
    and the returned ratio is tan(psi - j pi), which is continuous between
    poles. For the step the ratio is exp(2 kappa x / hbar) and j = 0.

    Returns:
        Tuple (ratio, branch).
    """
    check_admissible(setup, x)
    model = setup.potential
    scale = wavenumber(setup)
    if isinstance(model, FreeParticle):
        v = scale * x
        branch = round(v / math.pi)
        return ScaledValue.from_float(math.tan(v - branch * math.pi)), branch
    if isinstance(model, StepBarrier):
        return ScaledValue(2.0 * scale * x, 1), 0
    zeta = scale * (x - setup.E / model.f)
    if zeta > 0.0:
        ai, _, bi, _ = airy_scaled(zeta)
        return bi / ai, 0
    psi = airy_phase(zeta)
    branch = round(psi / math.pi)
    return ScaledValue.from_float(math.tan(psi - branch * math.pi)), branch


def local_length(setup: PhysicalSetup, x: float) -> float:
    """Length over which the basis changes appreciably near x."""
    model = setup.potential
    scale = wavenumber(setup)
    if isinstance(model, LinearPotential):
        zeta = scale * (x - setup.E / model.f)
        return 1.0 / (scale * math.sqrt(max(1.0, abs(zeta))))
    return 1.0 / scale


def _second_difference(samples: List[ScaledValue], h: float) -> Tuple[float, float]:
    """Five-point second derivative of samples relative to their largest member."""
    reference = max(samples, key=lambda s: s.log_magnitude if s.sign else -math.inf)
    if reference.sign == 0:
        return 0.0, 0.0
    y = [(s / reference).value for s in samples]
    fd = (-y[0] + 16.0 * y[1] - 30.0 * y[2] + 16.0 * y[3] - y[4]) / (12.0 * h * h)
    return fd, y[2]


def schrodinger_residual(setup: PhysicalSetup, x: float) -> Tuple[float, float]:
    """
    Finite-difference check of y'' + (2m/hbar^2)(E - V) y = 0 for phi and theta.

    Values on the stencil are normalized by their largest member before
    differencing, so the check also runs deep in the step interior.

    Returns:
        (res_phi, res_theta), each |FD y'' - analytic y''| divided by
        max(|2m(E - V)|/hbar^2, 1/L^2) with L the local length scale.
    """
    check_admissible(setup, x)
    length = local_length(setup, x)
    h = 1e-3 * length
    stencil = [x + j * h for j in (-2, -1, 0, 1, 2)]
    if isinstance(setup.potential, StepBarrier) and stencil[0] < 0.0:
        stencil = [x + j * h for j in range(5)]
        center = 0
    else:
        center = 2
    pairs = [basis(setup, s) for s in stencil]
    q = 2.0 * setup.m * (setup.E - potential_value(setup.potential, x)) / setup.hbar**2
    norm = max(abs(q), 1.0 / length**2)
    residuals = []
    for attr in ("phi", "theta"):
        samples = [getattr(p, attr) for p in pairs]
        if center == 2:
            fd, y0 = _second_difference(samples, h)
        else:
            fd, y0 = _forward_second_difference(samples, h)
        residuals.append(abs(fd + q * y0) / norm)
    return residuals[0], residuals[1]


def _forward_second_difference(samples: List[ScaledValue], h: float) -> Tuple[float, float]:
    """One-sided second derivative at the first sample (used at the step wall)."""
    reference = max(samples, key=lambda s: s.log_magnitude if s.sign else -math.inf)
    y = [(s / reference).value for s in samples]
    fd = (35.0 * y[0] - 104.0 * y[1] + 114.0 * y[2] - 56.0 * y[3] + 11.0 * y[4]) / (12.0 * h * h)
    return fd, y[0]
