"""
Classical-limit analysis: cycle averages, hbar sweeps with envelopes, the
turning-region width and the eta(hbar) family of microstates.

The classical limit is always a trend along a decreasing hbar grid plus a
fitted asymptote; nothing here evaluates at hbar = 0.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import brentq, minimize_scalar

from ..numerics.microstate import Microstate, PhysicalSetup, validate
from ..numerics.potentials import (
    FreeParticle,
    LinearPotential,
    StepBarrier,
    airy_argument,
    classical_momentum,
    potential_value,
    turning_point,
    wavenumber,
)
from ..numerics.trajectory import (
    ReducedActionConvention,
    conjugate_momentum,
    jacobi_time,
    log_conjugate_momentum,
    qshje_residual,
    quantum_term,
    reduced_action,
)
from ..utils.errors import BracketError, DomainError, QuadratureError, QuantumHJError
from ..utils.logging import get_logger
from ..utils.settings import config

logger = get_logger()


class Observable(str, Enum):
    """Quantities an hbar sweep can follow."""

    WX = "Wx"
    LOG_WX = "log_Wx"
    W = "W"
    W_OVER_HBAR = "W_over_hbar"
    T_MINUS_T0 = "t_minus_t0"
    QUANTUM_TERM = "quantum_term"
    RESIDUAL = "residual"


@dataclass(frozen=True)
class SweepRecord:
    """One hbar value of a sweep; error is set when the point failed."""

    hbar: float
    x: float
    observable_name: str
    value: float
    envelope_min: float
    envelope_max: float
    error: Optional[str] = None


@dataclass(frozen=True)
class CycleAverage:
    """Averages over one local wavelength centered at x."""

    mean: float
    mean_square: float
    variance: float
    quantum_term_mean: float
    wavelength: float


@dataclass(frozen=True)
class EtaFamily:
    """
    Microstates with (a - b)^2 + c^2 = eta(hbar) at a fixed base phase.

    label names the eta expression for summaries.
    """

    eta_of_hbar: Callable[[float], float]
    base_phase: float = 0.5 * math.pi
    label: str = "eta"


@dataclass(frozen=True)
class FitSummary:
    """Least-squares line with its RMS residual."""

    slope: float
    intercept: float
    residual: float
    points: int


@dataclass
class SweepResult:
    """Records of a sweep plus an optional fit over them."""

    records: List[SweepRecord] = field(default_factory=list)
    fit: Optional[FitSummary] = None


def geometric_grid(start: float, stop: float, points: int) -> np.ndarray:
    """
    Geometric grid from start to stop inclusive.

    Raises:
        DomainError: If points < 1 or an endpoint is not positive.
    """
    if points < 1:
        raise DomainError(f"Grid needs at least one point, got {points}")
    if not (start > 0.0 and stop > 0.0):
        raise DomainError(f"Geometric grid endpoints must be positive, got {start}, {stop}")
    return np.geomspace(start, stop, points)


def _fit_line(xs: np.ndarray, ys: np.ndarray) -> FitSummary:
    mask = np.isfinite(xs) & np.isfinite(ys)
    if mask.sum() < 2:
        raise DomainError("A fit needs at least two finite points")
    slope, intercept = np.polyfit(xs[mask], ys[mask], 1)
    rms = float(np.sqrt(np.mean((ys[mask] - (slope * xs[mask] + intercept)) ** 2)))
    return FitSummary(slope=float(slope), intercept=float(intercept), residual=rms, points=int(mask.sum()))


def fit_power_law(xs: Sequence[float], ys: Sequence[float]) -> FitSummary:
    """Fit log y = slope log x + intercept."""
    xs, ys = np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return _fit_line(np.log(xs), np.log(ys))


def fit_exponential_rate(hbars: Sequence[float], log_values: Sequence[float]) -> FitSummary:
    """Fit log value = slope / hbar + intercept; slope is the decay exponent."""
    hbars = np.asarray(hbars, dtype=float)
    return _fit_line(1.0 / hbars, np.asarray(log_values, dtype=float))


def _airy_cycle_phase(zeta: float) -> float:
    """(4/3)|zeta|^(3/2) on the allowed side, 0 beyond the turning point."""
    return 4.0 / 3.0 * (-zeta) ** 1.5 if zeta < 0.0 else 0.0


def local_wavelength(setup: PhysicalSetup, x: float) -> float:
    """
    Length of one oscillation of the basis quadratic forms around x.

    Returns:
        pi hbar / (2mE)^(1/2) for the free particle. For the linear potential
        the interval centered at x over which (4/3)|zeta|^(3/2) advances by 2pi.

        # free, m = 1, E = 1/2, hbar = 0.01 -> 0.01 pi

    Raises:
        DomainError: In the forbidden region, where there is no oscillation cycle.
    """
    model = setup.potential
    if isinstance(model, FreeParticle):
        if setup.E <= 0.0:
            raise DomainError(f"no oscillation cycle: free particle with E={setup.E} <= 0")
        return math.pi * setup.hbar / math.sqrt(2.0 * setup.m * setup.E)
    if isinstance(model, LinearPotential):
        zeta = airy_argument(setup, x)
        if zeta >= 0.0:
            raise DomainError(f"no oscillation cycle at x={x}: forbidden side of the linear potential")

        def excess(width: float) -> float:
            return (
                _airy_cycle_phase(zeta - 0.5 * width)
                - _airy_cycle_phase(zeta + 0.5 * width)
                - 2.0 * math.pi
            )

        upper = math.pi / math.sqrt(-zeta)
        for _ in range(60):
            if excess(upper) > 0.0:
                break
            upper *= 2.0
        else:
            raise BracketError(f"Could not bracket the local wavelength at zeta={zeta}")
        return brentq(excess, 0.0, upper, xtol=1e-14, rtol=1e-13) / wavenumber(setup)
    raise DomainError(f"no oscillation cycle: {model.name} interior is classically forbidden")


def _gauss_legendre_mean(
    integrand: Callable[[float], np.ndarray], lo: float, hi: float
) -> np.ndarray:
    """
    Adaptive Gauss-Legendre mean of a vector-valued integrand over [lo, hi].

    Raises:
        QuadratureError: If bisection reaches max_depth without meeting abs_tol.
    """
    cfg = config.quadrature
    nodes, weights = leggauss(cfg.order)
    span = hi - lo

    def rule(a: float, b: float) -> np.ndarray:
        xs = 0.5 * (b - a) * nodes + 0.5 * (a + b)
        values = np.array([integrand(float(xv)) for xv in xs])
        return 0.5 * (b - a) * (weights @ values)

    first = rule(lo, hi)
    total = np.zeros_like(first)
    worst = 0.0
    stack = [(lo, hi, first, 0)]
    while stack:
        a, b, whole, depth = stack.pop()
        mid = 0.5 * (a + b)
        left, right = rule(a, mid), rule(mid, b)
        error = float(np.max(np.abs(left + right - whole)))
        if error <= cfg.abs_tol * (b - a):
            total = total + left + right
            continue
        if depth >= cfg.max_depth:
            worst = max(worst, error / (b - a))
            total = total + left + right
            continue
        stack.append((mid, b, right, depth + 1))
        stack.append((a, mid, left, depth + 1))
    if worst > 0.0:
        raise QuadratureError(f"Cycle average over [{lo}, {hi}] did not converge", achieved=worst)
    return total / span


def cycle_average(setup: PhysicalSetup, ms: Microstate, x: float) -> CycleAverage:
    """
    Means of W_x, W_x^2 and the quantum term over one local wavelength at x.

    Slowly varying factors are integrated as they are, not frozen.

    Returns:
        CycleAverage; for the free particle mean = (2mE)^(1/2),
        mean_square = mE(a + b)/s and quantum_term_mean = -variance/(2m).
    """
    validate(ms)
    wavelength = local_wavelength(setup, x)

    def integrand(xv: float) -> np.ndarray:
        wx = conjugate_momentum(setup, ms, xv)
        return np.array([wx, wx * wx, quantum_term(setup, ms, xv)])

    mean, mean_square, qterm = _gauss_legendre_mean(
        integrand, x - 0.5 * wavelength, x + 0.5 * wavelength
    )
    return CycleAverage(
        mean=float(mean),
        mean_square=float(mean_square),
        variance=float(mean_square - mean * mean),
        quantum_term_mean=float(qterm),
        wavelength=wavelength,
    )


def free_cycle_reference(setup: PhysicalSetup, ms: Microstate) -> CycleAverage:
    """Closed-form free-particle cycle averages for a microstate."""
    validate(ms)
    s = math.sqrt(ms.normalization)
    k = math.sqrt(2.0 * setup.m * setup.E)
    mean_square = setup.m * setup.E * (ms.a + ms.b) / s
    variance = 2.0 * setup.m * setup.E * (ms.a + ms.b - 2.0 * s) / (2.0 * s)
    return CycleAverage(
        mean=k,
        mean_square=mean_square,
        variance=variance,
        quantum_term_mean=setup.E * (1.0 - 0.5 * (ms.a + ms.b) / s),
        wavelength=math.pi * setup.hbar / k,
    )


def _require_free(setup: PhysicalSetup, operation: str) -> None:
    if not isinstance(setup.potential, FreeParticle):
        raise DomainError(f"{operation} is defined for the free particle only")


def average_time(setup: PhysicalSetup, ms: Microstate, x: float) -> float:
    """
    Cycle average of t - t0 with the numerator x held fixed.

    Returns:
        x <W_x> / (2E), which equals (m/2E)^(1/2) x for every microstate.
    """
    _require_free(setup, "average_time")
    if x == 0.0:
        return 0.0
    return x * cycle_average(setup, ms, x).mean / (2.0 * setup.E)


def average_principal_function(setup: PhysicalSetup, ms: Microstate, x: float) -> float:
    """
    Cycle average of S = W - E (t - t0), t averaged as in average_time.

    For small hbar this tends to E times average_time for every microstate.
    """
    _require_free(setup, "average_principal_function")
    wavelength = local_wavelength(setup, x)

    def integrand(xv: float) -> np.ndarray:
        return np.array([reduced_action(setup, ms, xv)])

    (mean_w,) = _gauss_legendre_mean(integrand, x - 0.5 * wavelength, x + 0.5 * wavelength)
    return float(mean_w) - setup.E * average_time(setup, ms, x)


def free_envelope(setup: PhysicalSetup, ms: Microstate) -> Tuple[float, float]:
    """
    Exact extrema of the free-particle W_x.

    D oscillates between [(a + b) -+ R]/2 with R = [(a - b)^2 + c^2]^(1/2), so

        W_x in [2ks/(a + b + R), 2ks/(a + b - R)].
    """
    _require_free(setup, "free_envelope")
    validate(ms)
    k = math.sqrt(2.0 * setup.m * setup.E)
    s = math.sqrt(ms.normalization)
    spread = math.hypot(ms.a - ms.b, ms.c)
    return 2.0 * k * s / (ms.a + ms.b + spread), 2.0 * k * s / (ms.a + ms.b - spread)


def observable_function(
    observable: Observable, convention: ReducedActionConvention = ReducedActionConvention.UNWRAPPED
) -> Callable[[PhysicalSetup, Microstate, float], float]:
    """Map an observable name to its evaluator."""
    observable = Observable(observable)
    if observable is Observable.WX:
        return conjugate_momentum
    if observable is Observable.LOG_WX:
        return log_conjugate_momentum
    if observable is Observable.W:
        return lambda setup, ms, x: reduced_action(setup, ms, x, convention)
    if observable is Observable.W_OVER_HBAR:
        return lambda setup, ms, x: reduced_action(setup, ms, x, convention) / setup.hbar
    if observable is Observable.T_MINUS_T0:
        return jacobi_time
    if observable is Observable.QUANTUM_TERM:
        return quantum_term
    return qshje_residual


def _oscillates(setup: PhysicalSetup, x: float) -> bool:
    model = setup.potential
    if isinstance(model, FreeParticle):
        return True
    if isinstance(model, LinearPotential):
        return airy_argument(setup, x) < 0.0
    return False


def _sampled_envelope(fn: Callable[[float], float], lo: float, hi: float) -> Tuple[float, float]:
    """Sample then refine both extrema by golden-section search."""
    xs = np.linspace(lo, hi, config.sweep.envelope_samples)
    ys = np.array([fn(float(xv)) for xv in xs])
    extrema = []
    for sign in (1.0, -1.0):
        scores = sign * ys
        i = int(np.argmin(scores))
        best = float(scores[i])
        if 0 < i < len(xs) - 1:
            try:
                result = minimize_scalar(
                    lambda xv, sign=sign: sign * fn(float(xv)),
                    bracket=(float(xs[i - 1]), float(xs[i]), float(xs[i + 1])),
                    method="golden",
                )
                best = min(best, float(result.fun))
            except ValueError:
                # flat sample triple, keep the sampled extremum
                pass
        extrema.append(sign * best)
    return extrema[0], extrema[1]


def envelope(
    setup: PhysicalSetup,
    ms: Microstate,
    x: float,
    observable: Observable,
    value: float,
    convention: ReducedActionConvention = ReducedActionConvention.UNWRAPPED,
) -> Tuple[float, float]:
    """
    Min and max of an observable around x, always bracketing ``value``.

    Free W_x uses the closed-form extrema; oscillatory regions are searched
    over one local wavelength; elsewhere the observable is taken at the ends
    of a small fixed window.
    """
    observable = Observable(observable)
    if observable is Observable.WX and isinstance(setup.potential, FreeParticle):
        lo, hi = free_envelope(setup, ms)
        return min(lo, value), max(hi, value)

    fn = observable_function(observable, convention)
    if _oscillates(setup, x):
        half = 0.5 * local_wavelength(setup, x)
        lo, hi = _sampled_envelope(lambda xv: fn(setup, ms, xv), x - half, x + half)
    else:
        half = 0.5 * config.sweep.window * max(1.0, abs(x))
        left = x - half
        if isinstance(setup.potential, StepBarrier):
            left = max(left, 0.0)
        ends = [fn(setup, ms, left), fn(setup, ms, x + half)]
        lo, hi = min(ends), max(ends)
    return min(lo, value), max(hi, value)


def hbar_sweep(
    setup_template: PhysicalSetup,
    ms: Microstate,
    x: float,
    hbar_grid: Sequence[float],
    observable: Observable,
    convention: ReducedActionConvention = ReducedActionConvention.UNWRAPPED,
    with_envelope: bool = True,
) -> List[SweepRecord]:
    """
    Evaluate an observable and its envelope at x for every hbar in the grid.

    Args:
        setup_template: Setup whose hbar is replaced per grid point.
        ms: Valid microstate.
        x: Fixed position.
        hbar_grid: Positive hbar values, evaluated in the given order.
        observable: Observable to follow.
        convention: Reduced-action convention for W and W_over_hbar.
        with_envelope: Skip envelope extraction when False (envelope = value).

    Returns:
        One SweepRecord per grid point, in grid order.
    """
    validate(ms)
    observable = Observable(observable)
    grid = [float(h) for h in hbar_grid]
    if not grid:
        raise DomainError("hbar grid is empty")
    if any(not (h > 0.0) for h in grid):
        raise DomainError("hbar grid values must be positive")

    fn = observable_function(observable, convention)
    records = []
    for hbar in grid:
        try:
            setup = setup_template.with_hbar(hbar)
            value = fn(setup, ms, x)
            if with_envelope:
                lo, hi = envelope(setup, ms, x, observable, value, convention)
            else:
                lo = hi = value
            records.append(SweepRecord(hbar, x, observable.value, value, lo, hi))
        except QuantumHJError as e:
            logger.warning("Sweep point failed", hbar=hbar, observable=observable.value, error=str(e))
            records.append(
                SweepRecord(hbar, x, observable.value, math.nan, math.nan, math.nan, error=str(e))
            )
    logger.debug(
        "hbar sweep evaluated",
        potential=setup_template.potential.name,
        observable=observable.value,
        points=len(records),
    )
    return records


def _allowed_deviation(setup: PhysicalSetup, ms: Microstate, x: float) -> float:
    """|<W_x> - p(x)| / p(x) with <W_x> averaged over one local wavelength at x."""
    half = 0.5 * local_wavelength(setup, x)
    (mean,) = _gauss_legendre_mean(
        lambda xv: np.array([conjugate_momentum(setup, ms, xv)]), x - half, x + half
    )
    p = classical_momentum(setup, x)
    return abs(float(mean) - p) / p


def turning_region_width(
    setup: PhysicalSetup, ms: Microstate, hbar: float, epsilon: float
) -> float:
    """
    Width of the region around x_t = E/f where the motion is not classical.

    The allowed-side edge x1 is where the cycle-averaged relative deviation
    of W_x from the classical momentum first reaches epsilon coming in from
    the far allowed side. The forbidden-side edge x2 is where W_x drops below
    epsilon (2mE)^(1/2), or x_t itself when W_x is already below it there.

    Returns:
        x2 - x1, which scales as hbar^(2/3).

    Raises:
        DomainError: For potentials other than the linear one or epsilon <= 0.
        BracketError: If either edge cannot be bracketed.
    """
    if not isinstance(setup.potential, LinearPotential):
        raise DomainError("turning_region_width requires the linear potential")
    if not epsilon > 0.0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    validate(ms)
    setup = setup.with_hbar(hbar)
    x_t = turning_point(setup)
    alpha = wavenumber(setup)
    cfg = config.sweep

    def deviation(zeta: float) -> float:
        return _allowed_deviation(setup, ms, x_t + zeta / alpha) - epsilon

    zetas = np.linspace(-cfg.width_scan_extent, -cfg.width_scan_extent / cfg.width_scan_points, cfg.width_scan_points)
    previous_zeta, previous = float(zetas[0]), deviation(float(zetas[0]))
    if previous >= 0.0:
        raise BracketError(
            f"Relative deviation already exceeds epsilon={epsilon} at zeta={previous_zeta}"
        )
    zeta_1 = None
    for zeta in zetas[1:]:
        current = deviation(float(zeta))
        if current >= 0.0:
            zeta_1 = brentq(deviation, previous_zeta, float(zeta), xtol=1e-10)
            break
        previous_zeta = float(zeta)
    if zeta_1 is None:
        raise BracketError(f"No allowed-side crossing of epsilon={epsilon} before the turning point")
    x_1 = x_t + zeta_1 / alpha

    threshold = epsilon * math.sqrt(2.0 * setup.m * setup.E)
    if conjugate_momentum(setup, ms, x_t) < threshold:
        x_2 = x_t
    else:
        upper = 1.0
        for _ in range(60):
            if conjugate_momentum(setup, ms, x_t + upper / alpha) < threshold:
                break
            upper *= 2.0
        else:
            raise BracketError(f"W_x never drops below {threshold} on the forbidden side")
        x_2 = brentq(
            lambda xv: conjugate_momentum(setup, ms, xv) - threshold,
            x_t,
            x_t + upper / alpha,
            xtol=1e-14 * max(1.0, abs(x_t)),
        )
    logger.debug("Turning region width", hbar=hbar, x1=x_1, x2=x_2, width=x_2 - x_1)
    return x_2 - x_1


def turning_width_sweep(
    setup_template: PhysicalSetup,
    ms: Microstate,
    hbar_grid: Sequence[float],
    epsilon: float,
) -> SweepResult:
    """Turning-region widths over an hbar grid with their log-log fit."""
    result = SweepResult()
    x_t = turning_point(setup_template.with_hbar(float(hbar_grid[0]))) if len(hbar_grid) else 0.0
    for hbar in hbar_grid:
        hbar = float(hbar)
        try:
            width = turning_region_width(setup_template, ms, hbar, epsilon)
            result.records.append(SweepRecord(hbar, x_t, "turning_width", width, width, width))
        except QuantumHJError as e:
            logger.warning("Turning width failed", hbar=hbar, error=str(e))
            result.records.append(
                SweepRecord(hbar, x_t, "turning_width", math.nan, math.nan, math.nan, error=str(e))
            )
    good = [r for r in result.records if r.error is None]
    if len(good) >= 2:
        result.fit = fit_power_law([r.hbar for r in good], [r.value for r in good])
    return result


def eta_microstate(eta: float, phase: float = 0.5 * math.pi) -> Microstate:
    """
    Unit-gauge microstate with (a - b)^2 + c^2 = eta and indeterminacy phase ``phase``.

        a = (sigma + eta^(1/2) sin phase)/2, b = (sigma - eta^(1/2) sin phase)/2,
        c = eta^(1/2) cos phase, sigma = (4 + eta)^(1/2)

    Raises:
        DomainError: If eta is negative or not finite.
    """
    if not (math.isfinite(eta) and eta >= 0.0):
        raise DomainError(f"eta must be finite and >= 0 to fit the unit gauge, got {eta}")
    sigma = math.sqrt(4.0 + eta)
    root = math.sqrt(eta)
    return validate(
        Microstate(
            a=0.5 * (sigma + root * math.sin(phase)),
            b=0.5 * (sigma - root * math.sin(phase)),
            c=root * math.cos(phase),
        )
    )


def eta_family_sweep(
    setup_template: PhysicalSetup,
    family: EtaFamily,
    hbar_grid: Sequence[float],
    x: float,
) -> List[SweepRecord]:
    """
    W_x and its envelope at x for the family's microstate at each hbar.

    Returns:
        One SweepRecord per hbar (observable Wx); envelope width shrinks to 0
        when eta(hbar) -> 0 and stays fixed for constant eta.
    """
    records = []
    for hbar in hbar_grid:
        hbar = float(hbar)
        try:
            ms = eta_microstate(family.eta_of_hbar(hbar), family.base_phase)
            setup = setup_template.with_hbar(hbar)
            value = conjugate_momentum(setup, ms, x)
            lo, hi = envelope(setup, ms, x, Observable.WX, value)
            records.append(SweepRecord(hbar, x, Observable.WX.value, value, lo, hi))
        except QuantumHJError as e:
            logger.warning("Eta sweep point failed", hbar=hbar, family=family.label, error=str(e))
            records.append(
                SweepRecord(hbar, x, Observable.WX.value, math.nan, math.nan, math.nan, error=str(e))
            )
    return records


def potential_gap(setup: PhysicalSetup, x: float) -> float:
    """|E - V(x)|, the energy scale of residual tolerances."""
    return abs(setup.E - potential_value(setup.potential, x))
