"""
Closed-form trajectory quantities at one (setup, microstate, x).

With D = a phi^2 + b theta^2 + c phi theta, s = (ab - c^2/4)^(1/2) and w the
basis Wronskian:

    W_x     = hbar s w / D
    W_xx    = -W_x D'/D
    W_xxx   = W_x [2 (D'/D)^2 - D''/D],    D'' = 2P - 2QD
    <W;x>   = (D'/D)^2 / 2 - 2P/D + 2Q

where P = a phi'^2 + b theta'^2 + c phi' theta' and
Q = (2m/hbar^2)(E - V). The reduced action is
W = hbar arctan[(b theta/phi + c/2)/s] + j hbar pi with K = 0, j counting
the poles of theta/phi already passed.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

from ..utils.errors import DomainError, QuantumHJError
from ..utils.logging import get_logger
from .microstate import (
    Microstate,
    PhysicalSetup,
    denominator_forms,
    momentum_constant,
    validate,
)
from .potentials import (
    FreeParticle,
    LinearPotential,
    StepBarrier,
    airy_argument,
    classical_momentum,
    phase_ratio,
    potential_value,
    wavenumber,
)
from .specfun import LOG_MAX, ScaledValue, log_sum

logger = get_logger()


class ReducedActionConvention(str, Enum):
    """Branch convention for the arctan in the reduced action."""

    UNWRAPPED = "unwrapped"
    PRINCIPAL = "principal"


@dataclass(frozen=True)
class TrajectoryPoint:
    """All trajectory quantities at one x; error is set when evaluation failed."""

    x: float
    W: float
    Wx: float
    Wxx: float
    Wxxx: float
    quantum_term: float
    t_minus_t0: float
    residual: float
    S: float
    error: Optional[str] = None

    @classmethod
    def failed(cls, x: float, message: str) -> "TrajectoryPoint":
        nan = math.nan
        return cls(x, nan, nan, nan, nan, nan, nan, nan, nan, error=message)


@dataclass(frozen=True)
class _LocalState:
    wx: ScaledValue
    slope_ratio: float  # D'/D
    curvature_ratio: float  # P/D
    q: float  # (2m/hbar^2)(E - V)


def _wave_factor(setup: PhysicalSetup, x: float) -> float:
    """(2m/hbar^2)(E - V) written through the basis scale."""
    model = setup.potential
    scale = wavenumber(setup)
    if isinstance(model, FreeParticle):
        return scale * scale
    if isinstance(model, StepBarrier):
        return -scale * scale
    return -scale * scale * airy_argument(setup, x)


def _local_state(setup: PhysicalSetup, ms: Microstate, x: float) -> _LocalState:
    validate(ms)
    forms = denominator_forms(setup, ms, x)
    return _LocalState(
        wx=momentum_constant(setup, ms) / forms.value,
        slope_ratio=(forms.slope / forms.value).value,
        curvature_ratio=(forms.curvature / forms.value).value,
        q=_wave_factor(setup, x),
    )


def log_conjugate_momentum(setup: PhysicalSetup, ms: Microstate, x: float) -> float:
    """
    Natural log of W_x.

    Stays finite where W_x itself underflows, e.g. deep in the step interior
    where log W_x ~ -2 kappa x / hbar.
    """
    return _local_state(setup, ms, x).wx.log_magnitude


def conjugate_momentum(setup: PhysicalSetup, ms: Microstate, x: float) -> float:
    """
    Conjugate momentum W_x = hbar s w / D.

    Args:
        setup: Physical setup.
        ms: Valid microstate.
        x: Admissible position.

    Returns:
        W_x > 0 (may underflow to 0.0 deep in the forbidden region).

        # free, (1, 1, 0), m = 1, E = 1/2 -> 1.0 at every x
        # step, (1, 1, 0), m = 1, U = 1, E = 1/2, hbar = 0.1, x = 0.5 -> 1/cosh(10)
    """
    return _local_state(setup, ms, x).wx.value


def momentum_derivatives(setup: PhysicalSetup, ms: Microstate, x: float) -> Tuple[float, float]:
    """Analytic (W_xx, W_xxx)."""
    state = _local_state(setup, ms, x)
    r = state.slope_ratio
    second_ratio = 2.0 * state.curvature_ratio - 2.0 * state.q
    wxx = -(state.wx * r).value
    wxxx = (state.wx * (2.0 * r * r - second_ratio)).value
    return wxx, wxxx


def schwarzian(setup: PhysicalSetup, ms: Microstate, x: float) -> float:
    """<W;x> = W_xxx/W_x - (3/2)(W_xx/W_x)^2, formed from ratios so it survives underflow of W_x."""
    state = _local_state(setup, ms, x)
    r = state.slope_ratio
    return 0.5 * r * r - 2.0 * state.curvature_ratio + 2.0 * state.q


def quantum_term(setup: PhysicalSetup, ms: Microstate, x: float) -> float:
    """hbar^2 <W;x> / (4m)."""
    return setup.hbar**2 / (4.0 * setup.m) * schwarzian(setup, ms, x)


def qshje_residual(setup: PhysicalSetup, ms: Microstate, x: float) -> float:
    """W_x^2/(2m) + V - E + quantum_term; zero for an exact solution."""
    wx = conjugate_momentum(setup, ms, x)
    v = potential_value(setup.potential, x)
    return wx * wx / (2.0 * setup.m) + v - setup.E + quantum_term(setup, ms, x)


def _arctan(value: ScaledValue) -> float:
    if value.sign == 0:
        return 0.0
    if value.log_magnitude > LOG_MAX:
        return math.copysign(0.5 * math.pi, value.sign)
    return math.atan(value.value)


def reduced_action(
    setup: PhysicalSetup,
    ms: Microstate,
    x: float,
    convention: ReducedActionConvention = ReducedActionConvention.UNWRAPPED,
) -> float:
    """
    Reduced action W with K = 0.

    Args:
        setup: Physical setup.
        ms: Valid microstate.
        x: Admissible position.
        convention: UNWRAPPED adds hbar pi per pole of theta/phi passed, which
            keeps W continuous and increasing; PRINCIPAL keeps the arctan range.

    Returns:
        W(x). W(0) = hbar arctan[c / (2s)] for the free particle.

        # free, (1, 1, 0), m = 1, E = 1/2 -> W = x
    """
    validate(ms)
    ratio, branch = phase_ratio(setup, x)
    s = math.sqrt(ms.normalization)
    argument = log_sum([ratio * ms.b, ScaledValue.from_float(0.5 * ms.c)]) / s
    angle = _arctan(argument)
    if ReducedActionConvention(convention) is ReducedActionConvention.UNWRAPPED:
        angle += branch * math.pi
    return setup.hbar * angle


def jacobi_time(setup: PhysicalSetup, ms: Microstate, x: float) -> float:
    """
    t - t0 = dW/dE of the unwrapped reduced action at fixed microstate.

    Returns:
        x W_x / (2E) for the free particle, -x W_x / [2(U - E)] for the step
        interior and -W_x / f for the linear potential.
    """
    wx = conjugate_momentum(setup, ms, x)
    model = setup.potential
    if isinstance(model, FreeParticle):
        return x * wx / (2.0 * setup.E)
    if isinstance(model, StepBarrier):
        return -x * wx / (2.0 * (model.U - setup.E))
    return -wx / model.f


def principal_function(setup: PhysicalSetup, ms: Microstate, x: float) -> float:
    """Hamilton's principal function S = W - E (t - t0), W unwrapped."""
    w = reduced_action(setup, ms, x, ReducedActionConvention.UNWRAPPED)
    return w - setup.E * jacobi_time(setup, ms, x)


def _classical_phase(setup: PhysicalSetup, x: float) -> Tuple[float, float]:
    """Classical momentum and twice the leading-order basis phase."""
    model = setup.potential
    if isinstance(model, FreeParticle):
        k = classical_momentum(setup, x)
        return k, 2.0 * k * x / setup.hbar
    if isinstance(model, LinearPotential):
        zeta = airy_argument(setup, x)
        if zeta >= 0.0:
            raise DomainError(f"x={x} is not in the allowed region of the linear potential")
        return classical_momentum(setup, x), 0.5 * math.pi - 4.0 / 3.0 * (-zeta) ** 1.5
    raise DomainError("Classical-limit forms exist for the free particle and the linear potential")


def classical_limit_momentum(setup: PhysicalSetup, ms: Microstate, x: float) -> float:
    """
    Small-hbar form of W_x on the allowed side:

        p s / [(a + b)/2 + ((a - b)/2) cos 2psi + (c/2) sin 2psi]

    with p the classical momentum and psi the leading-order basis phase. Exact
    for the free particle; for the linear potential the relative error is
    O(hbar^2) away from the turning point.
    """
    validate(ms)
    p, two_psi = _classical_phase(setup, x)
    swing = 0.5 * (ms.a - ms.b) * math.cos(two_psi) + 0.5 * ms.c * math.sin(two_psi)
    return p * math.sqrt(ms.normalization) / (0.5 * (ms.a + ms.b) + swing)


def classical_limit_time(setup: PhysicalSetup, ms: Microstate, x: float) -> float:
    """jacobi_time with W_x replaced by classical_limit_momentum."""
    wx = classical_limit_momentum(setup, ms, x)
    if isinstance(setup.potential, FreeParticle):
        return x * wx / (2.0 * setup.E)
    return -wx / setup.potential.f


def evaluate_point(
    setup: PhysicalSetup,
    ms: Microstate,
    x: float,
    convention: ReducedActionConvention = ReducedActionConvention.UNWRAPPED,
) -> TrajectoryPoint:
    """Every trajectory quantity at x, from a single denominator evaluation."""
    state = _local_state(setup, ms, x)
    wx = state.wx.value
    r = state.slope_ratio
    wxx = -(state.wx * r).value
    wxxx = (state.wx * (2.0 * r * r - 2.0 * state.curvature_ratio + 2.0 * state.q)).value
    qterm = setup.hbar**2 / (4.0 * setup.m) * (0.5 * r * r - 2.0 * state.curvature_ratio + 2.0 * state.q)
    residual = wx * wx / (2.0 * setup.m) + potential_value(setup.potential, x) - setup.E + qterm
    t = jacobi_time(setup, ms, x)
    w_unwrapped = reduced_action(setup, ms, x, ReducedActionConvention.UNWRAPPED)
    if ReducedActionConvention(convention) is ReducedActionConvention.UNWRAPPED:
        w = w_unwrapped
    else:
        w = reduced_action(setup, ms, x, convention)
    return TrajectoryPoint(
        x=x,
        W=w,
        Wx=wx,
        Wxx=wxx,
        Wxxx=wxxx,
        quantum_term=qterm,
        t_minus_t0=t,
        residual=residual,
        S=w_unwrapped - setup.E * t,
    )


def trajectory_table(
    setup: PhysicalSetup,
    ms: Microstate,
    x_grid: Sequence[float],
    convention: ReducedActionConvention = ReducedActionConvention.UNWRAPPED,
) -> List[TrajectoryPoint]:
    """
    Evaluate a trajectory over a sorted grid.

    Args:
        setup: Physical setup.
        ms: Valid microstate.
        x_grid: Nondecreasing positions.
        convention: Reduced-action branch convention for the W column.

    Returns:
        One TrajectoryPoint per grid point, in grid order. Points that fail
        carry NaN values and the error message.

    Raises:
        DomainError: If the grid is empty or not sorted.
        NonPositiveDefinite: If the microstate is invalid.
    """
    validate(ms)
    grid = [float(x) for x in x_grid]
    if not grid:
        raise DomainError("x grid is empty")
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise DomainError("x grid must be sorted in increasing order")

    points: List[TrajectoryPoint] = []
    for x in grid:
        try:
            points.append(evaluate_point(setup, ms, x, convention))
        except QuantumHJError as e:
            logger.warning("Trajectory point failed", x=x, error=str(e))
            points.append(TrajectoryPoint.failed(x, str(e)))

    residuals = [abs(p.residual) for p in points if p.error is None]
    logger.debug(
        "Trajectory table evaluated",
        potential=setup.potential.name,
        points=len(points),
        failures=len(points) - len(residuals),
        max_residual=max(residuals) if residuals else math.nan,
    )
    return points
