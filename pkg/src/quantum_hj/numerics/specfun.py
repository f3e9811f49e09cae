"""
Airy functions in double precision, plain and log-scaled.

Ai, Bi and their derivatives are evaluated piecewise on the real line:

    z >= asymptotic_pos            exponential asymptotic expansions
    series_max_pos_ai < z          Ai continued downward from the asymptotic
      < asymptotic_pos             anchor by Taylor steps; Bi from the series
    -series_max_neg <= z <= ...    Maclaurin series
    -asymptotic_neg < z            Taylor steps from the series anchor
      < -series_max_neg
    z <= -asymptotic_neg           oscillatory asymptotic expansions

The Maclaurin series of Ai loses digits to cancellation for z > 0, and both
series lose digits on the oscillatory side, so the intermediate ranges are
bridged by integrating y'' = z y with Taylor series. Ai is only continued in
the direction in which it grows, which keeps the continuation stable.

Log-scaled results (ScaledValue) carry the exponents +-(2/3) z^(3/2)
symbolically so callers can combine products of Airy values far outside the
double range.
"""

import math
import sys
from dataclasses import dataclass
from typing import List, Sequence, Tuple, Union

import numpy as np
from scipy.special import logsumexp

from ..utils.errors import AiryRangeError, DomainError
from ..utils.settings import config

AI0 = 0.355028053887817239260
AIP0 = -0.258819403792806798405
BI0 = 0.614926627446000735150
BIP0 = 0.448288357353826357915

LOG_MAX = math.log(sys.float_info.max)
LOG_SQRT_PI = 0.5 * math.log(math.pi)
LOG_TWO_SQRT_PI = math.log(2.0) + LOG_SQRT_PI
QUARTER_PI = 0.25 * math.pi

_SERIES_TOL = 1e-17
_MAX_TERMS = 200


@dataclass(frozen=True)
class ScaledValue:
    """
    A real number stored as sign * exp(log_magnitude).

    sign is 0 exactly when the value is zero; log_magnitude is then -inf and
    carries no information.
    """

    log_magnitude: float
    sign: int

    @classmethod
    def zero(cls) -> "ScaledValue":
        return cls(-math.inf, 0)

    @classmethod
    def from_float(cls, value: float) -> "ScaledValue":
        if value == 0.0:
            return cls.zero()
        return cls(math.log(abs(value)), 1 if value > 0 else -1)

    @classmethod
    def from_log(cls, log_magnitude: float, sign: int = 1) -> "ScaledValue":
        if sign == 0:
            return cls.zero()
        return cls(float(log_magnitude), 1 if sign > 0 else -1)

    @property
    def value(self) -> float:
        """Plain float; +-inf past the double range, 0.0 on underflow."""
        if self.sign == 0:
            return 0.0
        if self.log_magnitude > LOG_MAX:
            return math.copysign(math.inf, self.sign)
        return self.sign * math.exp(self.log_magnitude)

    def __neg__(self) -> "ScaledValue":
        return ScaledValue(self.log_magnitude, -self.sign)

    def __mul__(self, other: Union["ScaledValue", float]) -> "ScaledValue":
        if not isinstance(other, ScaledValue):
            other = ScaledValue.from_float(float(other))
        if self.sign == 0 or other.sign == 0:
            return ScaledValue.zero()
        return ScaledValue(self.log_magnitude + other.log_magnitude, self.sign * other.sign)

    __rmul__ = __mul__

    def __truediv__(self, other: Union["ScaledValue", float]) -> "ScaledValue":
        if not isinstance(other, ScaledValue):
            other = ScaledValue.from_float(float(other))
        if other.sign == 0:
            raise ZeroDivisionError("division by a zero ScaledValue")
        if self.sign == 0:
            return ScaledValue.zero()
        return ScaledValue(self.log_magnitude - other.log_magnitude, self.sign * other.sign)

    def ratio(self, other: "ScaledValue") -> float:
        """self / other as a plain float (may be +-inf or 0.0)."""
        return (self / other).value


def log_sum(terms: Sequence[ScaledValue]) -> ScaledValue:
    """
    Signed sum of scaled values, reduced with log-sum-exp.

    Args:
        terms: Values to add; zero terms are skipped.

    Returns:
        The sum as a ScaledValue (zero when the terms cancel exactly).
    """
    live = [t for t in terms if t.sign != 0]
    if not live:
        return ScaledValue.zero()
    logs = np.array([t.log_magnitude for t in live])
    signs = np.array([float(t.sign) for t in live])
    with np.errstate(divide="ignore"):
        result, sign = logsumexp(logs, b=signs, return_sign=True)
    if sign == 0 or not np.isfinite(result):
        return ScaledValue.zero()
    return ScaledValue(float(result), int(np.sign(sign)))


def _asymptotic_coefficients(count: int) -> Tuple[List[float], List[float]]:
    """Coefficients u_k, v_k of the Airy asymptotic expansions."""
    u = [1.0]
    for k in range(1, count):
        u.append(u[-1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216.0 * k))
    v = [1.0] + [-(6 * k + 1) / (6 * k - 1) * u[k] for k in range(1, count)]
    return u, v


_U, _V = _asymptotic_coefficients(48)


def _check_finite(z: float) -> float:
    z = float(z)
    if not math.isfinite(z):
        raise DomainError(f"Airy argument must be finite, got {z}")
    return z


def _maclaurin(z: float) -> Tuple[float, float, float, float]:
    """Ai, Ai', Bi, Bi' from the Maclaurin series f, g of the Airy equation."""
    z3 = z * z * z
    tf, tg, tfp, tgp = 1.0, z, 0.0, 1.0
    f, g, fp, gp = tf, tg, tfp, tgp
    for k in range(1, _MAX_TERMS):
        tf *= z3 / ((3 * k - 1) * (3 * k))
        tg *= z3 / ((3 * k) * (3 * k + 1))
        tfp = 0.5 * z * z if k == 1 else tfp * z3 / ((3 * k - 1) * (3 * k - 3))
        tgp *= z3 / ((3 * k) * (3 * k - 2))
        f += tf
        g += tg
        fp += tfp
        gp += tgp
        scale = max(abs(f), abs(g), abs(fp), abs(gp), 1e-300)
        if max(abs(tf), abs(tg), abs(tfp), abs(tgp)) <= _SERIES_TOL * scale:
            break
    return (
        AI0 * f + AIP0 * g,
        AI0 * fp + AIP0 * gp,
        BI0 * f + BIP0 * g,
        BI0 * fp + BIP0 * gp,
    )


def _taylor_step(z: float, y: float, yp: float, h: float) -> Tuple[float, float]:
    """Advance one solution of y'' = z y by h using its Taylor series at z."""
    value = y + yp * h
    slope = yp
    h_pow = h  # h^(n+1)
    a_nm1 = 0.0
    a_n = y
    a_n1 = yp
    for n in range(_MAX_TERMS):
        a_n2 = (z * a_n + a_nm1) / ((n + 2) * (n + 1))
        slope_term = (n + 2) * a_n2 * h_pow
        h_pow *= h
        value_term = a_n2 * h_pow
        value += value_term
        slope += slope_term
        if n > 4 and abs(value_term) <= _SERIES_TOL * (abs(value) + abs(slope) * abs(h)) and abs(
            slope_term
        ) <= _SERIES_TOL * (abs(slope) + abs(value)):
            break
        a_nm1, a_n, a_n1 = a_n, a_n1, a_n2
    return value, slope


def _taylor_continue(
    z0: float, values: Sequence[float], slopes: Sequence[float], z1: float
) -> Tuple[List[float], List[float]]:
    """Carry Airy-equation solutions from z0 to z1 in Taylor steps."""
    step = config.specfun.taylor_step
    n_steps = max(1, math.ceil(abs(z1 - z0) / step))
    h = (z1 - z0) / n_steps
    y, yp = list(values), list(slopes)
    z = z0
    for i in range(n_steps):
        for j, (yj, ypj) in enumerate(zip(y, yp)):
            y[j], yp[j] = _taylor_step(z, yj, ypj, h)
        z = z0 + (i + 1) * h
    return y, yp


def _growth_sums(zeta: float) -> Tuple[float, float, float, float]:
    """Series factors for Ai, Ai', Bi, Bi' at large positive z."""
    sums = [0.0, 0.0, 0.0, 0.0]
    done = [False, False, False, False]
    prev = [math.inf] * 4
    power = 1.0
    for k in range(len(_U)):
        alt = -1.0 if k % 2 else 1.0
        terms = (alt * _U[k] * power, alt * _V[k] * power, _U[k] * power, _V[k] * power)
        for i, term in enumerate(terms):
            if done[i]:
                continue
            if abs(term) > prev[i]:
                done[i] = True
                continue
            sums[i] += term
            prev[i] = abs(term)
            if abs(term) <= _SERIES_TOL * abs(sums[i]):
                done[i] = True
        if all(done):
            break
        power /= zeta
    return sums[0], sums[1], sums[2], sums[3]


def _oscillatory_sums(zeta: float, coeffs: Sequence[float]) -> Tuple[float, float]:
    """Even and odd alternating sums of an asymptotic series on the oscillatory side."""
    even = odd = 0.0
    prev_even = prev_odd = math.inf
    even_done = odd_done = False
    power = 1.0
    for k in range(len(coeffs) // 2):
        alt = -1.0 if k % 2 else 1.0
        t_even = alt * coeffs[2 * k] * power
        t_odd = alt * coeffs[2 * k + 1] * power / zeta
        if not even_done:
            if abs(t_even) > prev_even:
                even_done = True
            else:
                even += t_even
                prev_even = abs(t_even)
                even_done = abs(t_even) <= _SERIES_TOL * abs(even)
        if not odd_done:
            if abs(t_odd) > prev_odd:
                odd_done = True
            else:
                odd += t_odd
                prev_odd = abs(t_odd)
                odd_done = abs(t_odd) <= _SERIES_TOL * max(abs(odd), abs(even))
        if even_done and odd_done:
            break
        power /= zeta * zeta
    return even, odd


def _growth_region(z: float) -> Tuple[ScaledValue, ScaledValue, ScaledValue, ScaledValue]:
    """Log-scaled Ai, Ai', Bi, Bi' from the exponential asymptotic expansions."""
    zeta = 2.0 / 3.0 * z * math.sqrt(z)
    quarter_log = 0.25 * math.log(z)
    s_ai, s_aip, s_bi, s_bip = _growth_sums(zeta)
    return (
        ScaledValue(-zeta - LOG_TWO_SQRT_PI - quarter_log + math.log(s_ai), 1),
        ScaledValue(-zeta - LOG_TWO_SQRT_PI + quarter_log + math.log(s_aip), -1),
        ScaledValue(zeta - LOG_SQRT_PI - quarter_log + math.log(s_bi), 1),
        ScaledValue(zeta - LOG_SQRT_PI + quarter_log + math.log(s_bip), 1),
    )


def _oscillatory_region(z: float) -> Tuple[float, float, float, float, float]:
    """Ai, Ai', Bi, Bi' and the phase theta on the far oscillatory side."""
    w = -z
    zeta = 2.0 / 3.0 * w * math.sqrt(w)
    p, q = _oscillatory_sums(zeta, _U)
    r, s = _oscillatory_sums(zeta, _V)
    quarter = w**0.25
    modulus = math.hypot(p, q) / (math.sqrt(math.pi) * quarter)
    modulus_d = math.hypot(r, s) * quarter / math.sqrt(math.pi)
    theta = QUARTER_PI - zeta + math.atan2(q, p)
    beta = zeta - QUARTER_PI - math.atan2(s, r)
    return (
        modulus * math.cos(theta),
        modulus_d * math.sin(beta),
        modulus * math.sin(theta),
        modulus_d * math.cos(beta),
        theta,
    )


def _finite_region(z: float) -> Tuple[float, float, float, float]:
    """Unscaled Ai, Ai', Bi, Bi' for z below the growth threshold."""
    cfg = config.specfun
    if z <= -cfg.asymptotic_neg:
        return _oscillatory_region(z)[:4]
    if z < -cfg.series_max_neg:
        anchor = -cfg.series_max_neg
        ai, aip, bi, bip = _maclaurin(anchor)
        (ai, bi), (aip, bip) = _taylor_continue(anchor, (ai, bi), (aip, bip), z)
        return ai, aip, bi, bip
    ai, aip, bi, bip = _maclaurin(z)
    if z > cfg.series_max_pos_ai:
        anchor = cfg.asymptotic_pos
        a_sv, ap_sv, _, _ = _growth_region(anchor)
        (ai,), (aip,) = _taylor_continue(anchor, (a_sv.value,), (ap_sv.value,), z)
    return ai, aip, bi, bip


def airy_ai(z: float) -> Tuple[float, float]:
    """
    Ai(z) and Ai'(z).

    Args:
        z: Finite real argument.

    Returns:
        (Ai(z), Ai'(z)); both underflow to 0.0 for large positive z.

    Raises:
        DomainError: If z is not finite.
    """
    z = _check_finite(z)
    if z >= config.specfun.asymptotic_pos:
        ai, aip, _, _ = _growth_region(z)
        return ai.value, aip.value
    ai, aip, _, _ = _finite_region(z)
    return ai, aip


def airy_bi(z: float) -> Tuple[float, float]:
    """
    Bi(z) and Bi'(z).

    Args:
        z: Finite real argument.

    Returns:
        (Bi(z), Bi'(z)).

    Raises:
        DomainError: If z is not finite.
        AiryRangeError: If Bi or Bi' exceeds the double range; use airy_scaled.
    """
    z = _check_finite(z)
    if z >= config.specfun.asymptotic_pos:
        _, _, bi, bip = _growth_region(z)
        if bip.log_magnitude > LOG_MAX:
            raise AiryRangeError(
                f"Bi({z}) overflows double precision; use airy_scaled for log-scaled values"
            )
        return bi.value, bip.value
    _, _, bi, bip = _finite_region(z)
    return bi, bip


def airy_scaled(z: float) -> Tuple[ScaledValue, ScaledValue, ScaledValue, ScaledValue]:
    """
    Log-scaled Ai, Ai', Bi, Bi'.

    Args:
        z: Finite real argument.

    Returns:
        Tuple (ai, ai_prime, bi, bi_prime) of ScaledValue.

        # z = 100 -> bi.log_magnitude ~ +666.67, ai.log_magnitude ~ -666.67 - ...
    """
    z = _check_finite(z)
    if z >= config.specfun.asymptotic_pos:
        return _growth_region(z)
    ai, aip, bi, bip = _finite_region(z)
    return (
        ScaledValue.from_float(ai),
        ScaledValue.from_float(aip),
        ScaledValue.from_float(bi),
        ScaledValue.from_float(bip),
    )


def airy_phase(z: float) -> float:
    """
    Continuous phase theta(z) with Ai = M cos(theta), Bi = M sin(theta), M > 0.

    theta(0) = pi/3, theta increases with z toward pi/2 and behaves like
    pi/4 - (2/3)|z|^(3/2) as z -> -inf. Zeros of Ai sit at theta = -pi/2 - n*pi.
    """
    z = _check_finite(z)
    cfg = config.specfun
    if z <= -cfg.asymptotic_neg:
        return _oscillatory_region(z)[4]
    if z >= cfg.asymptotic_pos:
        ai, _, bi, _ = _growth_region(z)
        return 0.5 * math.pi - math.atan(math.exp(ai.log_magnitude - bi.log_magnitude))
    ai, _, bi, _ = _finite_region(z)
    theta = math.atan2(bi, ai)
    if z < 0.0:
        estimate = QUARTER_PI - 2.0 / 3.0 * (-z) ** 1.5
        theta += 2.0 * math.pi * round((estimate - theta) / (2.0 * math.pi))
    return theta
