"""
Brute-force oracles for the closed forms.

Nothing here calls the closed-form bases or the Airy module: the Schrödinger
equation is integrated with classical RK4 from initial data built with math
and scipy.special, derivatives come from central differences, and averages
from scipy's adaptive quadrature. Agreement with the closed forms is
therefore independent evidence.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicHermiteSpline
from scipy.special import airy, airye, logsumexp

from ..numerics.microstate import Microstate, PhysicalSetup, validate
from ..numerics.potentials import FreeParticle, LinearPotential, StepBarrier, potential_value
from ..utils.errors import ConvergenceError, DomainError, GaugeMismatchError, QuadratureError
from ..utils.logging import get_logger
from ..utils.settings import config

logger = get_logger()

_RENORMALIZE_ABOVE = 1e50


@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed-step RK4 settings; x_end < x_start integrates backward."""

    step: float
    x_start: float
    x_end: float
    method_order: int = 4
    check_convergence: bool = True

    def __post_init__(self):
        if not (math.isfinite(self.step) and self.step > 0.0):
            raise DomainError(f"Integrator step must be positive, got {self.step}")
        if self.method_order != 4:
            raise DomainError(f"Only fourth-order integration is available, got {self.method_order}")
        if not (math.isfinite(self.x_start) and math.isfinite(self.x_end)):
            raise DomainError("Integration range must be finite")


@dataclass(frozen=True)
class SampledSolution:
    """
    RK4 samples of one solution.

    The true solution at node i is (values[i], slopes[i]) * exp(log_scale[i]).
    """

    xs: np.ndarray
    values: np.ndarray
    slopes: np.ndarray
    log_scale: np.ndarray

    def __call__(self, x: float) -> Tuple[float, float, float]:
        """
        Hermite-interpolated (y, y', log_scale) at x; y and y' are relative to exp(log_scale).
        """
        order = np.argsort(self.xs)
        grid = self.xs[order]
        lo, hi = float(grid[0]), float(grid[-1])
        slack = 1e-12 * max(1.0, abs(lo), abs(hi))
        if not lo - slack <= x <= hi + slack:
            raise DomainError(f"x={x} outside the integrated range [{lo}, {hi}]")
        i = int(np.clip(np.searchsorted(grid, x) - 1, 0, len(grid) - 2))
        i0, i1 = order[i], order[i + 1]
        shift = math.exp(self.log_scale[i1] - self.log_scale[i0])
        spline = CubicHermiteSpline(
            [self.xs[i0], self.xs[i1]],
            [self.values[i0], self.values[i1] * shift],
            [self.slopes[i0], self.slopes[i1] * shift],
        )
        return float(spline(x)), float(spline(x, 1)), float(self.log_scale[i0])


@dataclass(frozen=True)
class SampledMomentum:
    """Numerically assembled W_x on a grid."""

    xs: np.ndarray
    Wx: np.ndarray
    log_Wx: np.ndarray


def _wave_factor(setup: PhysicalSetup, x: float) -> float:
    """(2m/hbar^2)(E - V(x))."""
    return 2.0 * setup.m * (setup.E - potential_value(setup.potential, x)) / setup.hbar**2


def _rk4_step(setup: PhysicalSetup, x: float, y: float, p: float, h: float) -> Tuple[float, float]:
    q0 = _wave_factor(setup, x)
    qm = _wave_factor(setup, x + 0.5 * h)
    q1 = _wave_factor(setup, x + h)
    k1y, k1p = p, -q0 * y
    k2y, k2p = p + 0.5 * h * k1p, -qm * (y + 0.5 * h * k1y)
    k3y, k3p = p + 0.5 * h * k2p, -qm * (y + 0.5 * h * k2y)
    k4y, k4p = p + h * k3p, -q1 * (y + h * k3y)
    return (
        y + h * (k1y + 2.0 * k2y + 2.0 * k3y + k4y) / 6.0,
        p + h * (k1p + 2.0 * k2p + 2.0 * k3p + k4p) / 6.0,
    )


def _march(
    setup: PhysicalSetup,
    y0: float,
    p0: float,
    log0: float,
    integrator: "IntegratorConfig",
    step: float,
    length: float,
) -> SampledSolution:
    x_start, x_end = integrator.x_start, integrator.x_end
    n_steps = max(1, math.ceil(abs(x_end - x_start) / step))
    h = (x_end - x_start) / n_steps
    xs = x_start + h * np.arange(n_steps + 1)
    xs[-1] = x_end
    values = np.empty(n_steps + 1)
    slopes = np.empty(n_steps + 1)
    logs = np.empty(n_steps + 1)
    y, p, log_scale = y0, p0, log0
    values[0], slopes[0], logs[0] = y, p, log_scale
    for i in range(n_steps):
        y, p = _rk4_step(setup, float(xs[i]), y, p, h)
        size = max(abs(y), abs(p) * length)
        if size > _RENORMALIZE_ABOVE:
            y, p = y / size, p / size
            log_scale += math.log(size)
        values[i + 1], slopes[i + 1], logs[i + 1] = y, p, log_scale
    return SampledSolution(xs=xs, values=values, slopes=slopes, log_scale=logs)


def _endpoint_gap(coarse: SampledSolution, fine: SampledSolution, length: float) -> float:
    """Relative endpoint difference between two runs, in a common log scale."""
    shift = math.exp(coarse.log_scale[-1] - fine.log_scale[-1])
    yc, pc = coarse.values[-1] * shift, coarse.slopes[-1] * shift
    yf, pf = fine.values[-1], fine.slopes[-1]
    scale = max(abs(yf) + abs(pf) * length, 1e-300)
    return (abs(yc - yf) + abs(pc - pf) * length) / scale


def integrate_schrodinger(
    setup: PhysicalSetup,
    y0: float,
    y0_prime: float,
    integrator: IntegratorConfig,
    log_scale0: float = 0.0,
) -> SampledSolution:
    """
    Integrate y'' = -(2m/hbar^2)(E - V) y with classical RK4.

    Args:
        setup: Physical setup.
        y0: Initial value at x_start, relative to exp(log_scale0).
        y0_prime: Initial slope at x_start, relative to exp(log_scale0).
        integrator: Step and range.
        log_scale0: Log of the scale of the initial data.

    Returns:
        SampledSolution on the step grid. The run is repeated at half step
        and the finer run is returned when the convergence gate is on.

    Raises:
        ConvergenceError: If halving the step changes the endpoint by more
            than the configured tolerance.
    """
    length = 1.0 / _local_inverse_length(setup, integrator.x_start, integrator.x_end)
    coarse = _march(setup, y0, y0_prime, log_scale0, integrator, integrator.step, length)
    if not integrator.check_convergence or (y0 == 0.0 and y0_prime == 0.0):
        return coarse
    fine = _march(setup, y0, y0_prime, log_scale0, integrator, 0.5 * integrator.step, length)
    gap = _endpoint_gap(coarse, fine, length)
    if gap > config.oracle.convergence_tol:
        raise ConvergenceError(
            f"Step {integrator.step} changes the endpoint by {gap:.3e} when halved "
            f"(tolerance {config.oracle.convergence_tol:.1e})"
        )
    logger.debug("Schrodinger integration converged", step=integrator.step, gap=gap)
    return fine


def _local_inverse_length(setup: PhysicalSetup, x_lo: float, x_hi: float) -> float:
    scale = max(math.sqrt(abs(_wave_factor(setup, x_lo))), math.sqrt(abs(_wave_factor(setup, x_hi))))
    if isinstance(setup.potential, LinearPotential):
        scale = max(scale, (2.0 * setup.m * setup.potential.f) ** (1.0 / 3.0) / setup.hbar ** (2.0 / 3.0))
    if scale == 0.0:
        raise DomainError("E = V on the whole range: no length scale for the integrator")
    return scale


def default_step(setup: PhysicalSetup, x_lo: float, x_hi: float) -> float:
    """step_fraction of the shortest local wavelength (or decay length) on the range."""
    return config.oracle.step_fraction * 2.0 * math.pi / _local_inverse_length(setup, x_lo, x_hi)


def _reference_data(setup: PhysicalSetup, x: float) -> Tuple[Tuple[float, float, float], Tuple[float, float, float], float]:
    """
    Independent initial data (y, y', log scale) for both basis members at x,
    plus the Wronskian they must keep.
    """
    model = setup.potential
    hbar = setup.hbar
    if isinstance(model, FreeParticle):
        k = math.sqrt(2.0 * setup.m * setup.E) / hbar
        return (
            (math.cos(k * x), -k * math.sin(k * x), 0.0),
            (math.sin(k * x), k * math.cos(k * x), 0.0),
            k,
        )
    if isinstance(model, StepBarrier):
        kappa = math.sqrt(2.0 * setup.m * (model.U - setup.E)) / hbar
        return ((1.0, -kappa, -kappa * x), (1.0, kappa, kappa * x), 2.0 * kappa)
    alpha = (2.0 * setup.m * model.f) ** (1.0 / 3.0) / hbar ** (2.0 / 3.0)
    zeta = alpha * (x - setup.E / model.f)
    if zeta > 0.0:
        e_ai, e_aip, e_bi, e_bip = airye(zeta)
        growth = 2.0 / 3.0 * zeta**1.5
    else:
        e_ai, e_aip, e_bi, e_bip = airy(zeta)
        growth = 0.0
    return (
        (float(e_ai), alpha * float(e_aip), -growth),
        (float(e_bi), alpha * float(e_bip), growth),
        alpha / math.pi,
    )


def _numeric_bases(setup: PhysicalSetup, x_lo: float, x_hi: float, step: Optional[float]):
    """phi integrated backward from x_hi, theta forward from x_lo."""
    step = step or default_step(setup, x_lo, x_hi)
    phi_right, _, w = _reference_data(setup, x_hi)
    _, theta_left, _ = _reference_data(setup, x_lo)
    phi = integrate_schrodinger(
        setup, phi_right[0], phi_right[1], IntegratorConfig(step, x_hi, x_lo), phi_right[2]
    )
    theta = integrate_schrodinger(
        setup, theta_left[0], theta_left[1], IntegratorConfig(step, x_lo, x_hi), theta_left[2]
    )
    return phi, theta, w


def numeric_conjugate_momentum(
    setup: PhysicalSetup,
    ms: Microstate,
    x_grid: Sequence[float],
    step: Optional[float] = None,
) -> SampledMomentum:
    """
    W_x = hbar s w / (a phi^2 + b theta^2 + c phi theta) from integrated bases.

    Args:
        setup: Physical setup.
        ms: Valid microstate.
        x_grid: Positions inside one admissible interval.
        step: RK4 step; defaults to default_step over the grid range.

    Returns:
        SampledMomentum with W_x and log W_x per grid point.

    Raises:
        GaugeMismatchError: If the integrated Wronskian drifts from its
            exact value by more than the configured tolerance.
    """
    validate(ms)
    xs = np.asarray(sorted(float(x) for x in x_grid))
    if xs.size == 0:
        raise DomainError("x grid is empty")
    x_lo, x_hi = float(xs[0]), float(xs[-1])
    if x_hi == x_lo:
        pad = 2.0 * math.pi / _local_inverse_length(setup, x_lo, x_hi)
        x_hi = x_lo + pad
    phi, theta, w = _numeric_bases(setup, x_lo, x_hi, step)
    s = math.sqrt(ms.normalization)

    wx = np.empty(xs.size)
    log_wx = np.empty(xs.size)
    for i, x in enumerate(xs):
        yf, pf, lf = phi(float(x))
        yt, pt, lt = theta(float(x))
        drift = abs((yf * pt - pf * yt) * math.exp(lf + lt - math.log(w)) - 1.0)
        if drift > config.oracle.wronskian_tol:
            raise GaugeMismatchError(
                f"Integrated Wronskian drifted by {drift:.3e} at x={x} "
                f"(tolerance {config.oracle.wronskian_tol:.1e})"
            )
        logs = np.array([2.0 * lf, 2.0 * lt, lf + lt])
        coeffs = np.array([ms.a * yf * yf, ms.b * yt * yt, ms.c * yf * yt])
        mask = coeffs != 0.0
        log_d, sign = logsumexp(logs[mask], b=coeffs[mask], return_sign=True)
        if sign <= 0:
            raise GaugeMismatchError(f"Integrated denominator is not positive at x={x}")
        log_wx[i] = math.log(setup.hbar * s * w) - float(log_d)
        wx[i] = math.exp(log_wx[i])
    return SampledMomentum(xs=xs, Wx=wx, log_Wx=log_wx)


_STENCILS = {
    1: ((-1, -1.0), (1, 1.0)),
    2: ((-1, 1.0), (0, -2.0), (1, 1.0)),
    3: ((-2, -1.0), (-1, 2.0), (1, -2.0), (2, 1.0)),
}
_DENOMINATORS = {1: 2.0, 2: 1.0, 3: 2.0}


def fd_derivative(
    f: Callable[[float], float],
    x: float,
    order: int,
    h: Optional[float] = None,
    scale: float = 1.0,
    domain: Optional[Tuple[float, float]] = None,
) -> Tuple[float, float]:
    """
    Central finite difference of order 1-3 with one Richardson step.

    Args:
        f: Scalar function.
        x: Evaluation point.
        order: Derivative order, 1, 2 or 3.
        h: Step; defaults to eps^(1/(order+2)) * scale.
        scale: Characteristic length of f near x.
        domain: Optional (lo, hi) the stencil must stay within.

    Returns:
        Tuple (derivative, error_estimate).

        # f = x**3, order 3, h = 0.1 -> (6.0, ~1e-13)

    Raises:
        DomainError: If the order is unsupported or the stencil leaves the domain.
    """
    if order not in _STENCILS:
        raise DomainError(f"Finite-difference order must be 1, 2 or 3, got {order}")
    if h is None:
        h = np.finfo(float).eps ** (1.0 / (order + 2)) * scale
    reach = max(abs(k) for k, _ in _STENCILS[order]) * h
    if domain is not None and (x - reach < domain[0] or x + reach > domain[1]):
        raise DomainError(f"Stencil [{x - reach}, {x + reach}] leaves the domain {domain}")

    def central(step: float) -> float:
        total = sum(weight * f(x + k * step) for k, weight in _STENCILS[order])
        return total / (_DENOMINATORS[order] * step**order)

    coarse = central(h)
    fine = central(0.5 * h)
    extrapolated = (4.0 * fine - coarse) / 3.0
    return extrapolated, abs(extrapolated - fine)


def quad_cycle_average(f: Callable[[float], float], x_center: float, wavelength: float) -> float:
    """
    Mean of f over [x_center - wavelength/2, x_center + wavelength/2].

    Raises:
        DomainError: If wavelength <= 0.
        QuadratureError: If scipy.integrate.quad reports non-convergence.
    """
    if not wavelength > 0.0:
        raise DomainError(f"wavelength must be positive, got {wavelength}")
    cfg = config.oracle
    epsabs = cfg.quad_abs_tol * wavelength
    result = quad(
        f,
        x_center - 0.5 * wavelength,
        x_center + 0.5 * wavelength,
        epsabs=epsabs,
        epsrel=0.0,
        limit=cfg.quad_limit,
        full_output=1,
    )
    value, abserr = result[0], result[1]
    if len(result) > 3 and abserr > epsabs:
        raise QuadratureError(f"quad did not converge: {result[3]}", achieved=abserr / wavelength)
    return value / wavelength
