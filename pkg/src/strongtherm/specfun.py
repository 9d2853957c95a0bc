"""Gamma function, the modified Epstein zeta function and the thermal operator zeta.

The modified Epstein zeta function is

    zeta(s, nu) = sum_{n in Z} (n^2 + nu^2)^(-s),      nu > 0,

absolutely convergent for s > 1/2.  For s < 1 it is continued by

    zeta(s, nu) = nu^(1-2s) [ sqrt(pi) Gamma(s-1/2)/Gamma(s)
                              + 4 sin(pi s) int_1^inf (t^2-1)^(-s) / (exp(2 pi nu t) - 1) dt ].

Both routes are implemented independently so that they can check each other
on the strip 1/2 < s < 1.  Only real s is supported.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import ConvergenceError, DomainError

_EPS = np.finfo(float).eps
_SQRT_PI = math.sqrt(math.pi)

# B_{2j} / (2j)! for j = 1..10
_EM_COEFFS = [float(special.bernoulli(2 * j)[2 * j]) / math.factorial(2 * j) for j in range(1, 11)]


class Route(str, enum.Enum):
    DIRECT_SERIES = "DirectSeries"
    INTEGRAL_CONTINUATION = "IntegralContinuation"
    CLOSED_FORM = "ClosedForm"


@dataclass(frozen=True)
class ZetaValue:
    value: float
    abs_error_estimate: float
    route: Route


def gamma(x: float) -> float:
    """Gamma(x) for x > 0."""
    if not x > 0:
        raise DomainError(f"gamma is only provided for x > 0, got {x}")
    return math.gamma(x)


def _bose(x):
    """1/(e^x - 1) for x > 0 without overflow."""
    return math.exp(-x) / -math.expm1(-x)


def _check_nu(nu):
    if not (nu > 0 and math.isfinite(nu)):
        raise DomainError(f"nu must be positive and finite, got {nu}")


# --------------------------------------------------------------------------
# series route


def _rising(a, m):
    out = 1.0
    for i in range(m):
        out *= a + i
    return out


def _inverse_power_expansion(s, nu, x, max_terms=200):
    """Coefficients c_i with (x^2 + nu^2)^(-s) = sum_i c_i x^(-2s-2i), for x > nu."""
    coeffs = [1.0]
    c = 1.0
    for i in range(1, max_terms):
        # binom(-s, i) nu^(2i), built recursively
        c *= (-s - i + 1) / i * nu**2
        coeffs.append(c)
        if abs(c) * x ** (-2.0 * i) < 1e-20:
            break
    return coeffs


def _em_tail(s, nu, n0, order):
    """Sum_{n >= n0} (n^2+nu^2)^(-s) by Euler-Maclaurin with ``order`` corrections.

    Returns (tail, estimate of the first omitted correction).
    """
    coeffs = _inverse_power_expansion(s, nu, n0)
    x = float(n0)

    def derivative(m):
        # d^m/dx^m of sum_i c_i x^(-2s-2i) at x = n0
        total = 0.0
        for i, c in enumerate(coeffs):
            a = 2 * s + 2 * i
            term = c * (-1) ** m * _rising(a, m) * x ** (-a - m)
            total += term
            if i > 4 and abs(term) < 1e-19 * abs(total):
                break
        return total

    integral = 0.0
    for i, c in enumerate(coeffs):
        a = 2 * s + 2 * i
        term = c * x ** (1 - a) / (a - 1)
        integral += term
        if i > 4 and abs(term) < 1e-19 * abs(integral):
            break
    f0 = derivative(0)
    corrections = [_EM_COEFFS[j - 1] * derivative(2 * j - 1) for j in range(1, order + 1)]
    omitted = abs(_EM_COEFFS[order] * derivative(2 * order + 1))
    tail = integral + 0.5 * f0 - math.fsum(corrections)
    return tail, omitted


def epstein_series(s: float, nu: float, tol: float = 1e-12) -> ZetaValue:
    """Direct summation of zeta(s, nu) for s > 1/2.

    Terms n and -n are paired.  The part n >= N is replaced by its
    Euler-Maclaurin expansion, in which the integral and the derivatives of
    (x^2+nu^2)^(-s) are expanded in inverse powers of x (convergent for
    N > nu).  N is doubled until twice the first omitted Euler-Maclaurin
    correction (two tails) is below tol/2.  The reported error estimate adds
    a few ulps of rounding on the total, which ``tol`` does not control.
    """
    _check_nu(nu)
    if not s > 0.5:
        raise DomainError(f"the direct series needs s > 1/2, got s={s}")
    if not tol > 0:
        raise DomainError("tol must be positive")

    order = 6
    n0 = max(16, int(math.ceil(4 * nu)))
    for _ in range(12):
        n = np.arange(1, n0, dtype=float)
        head = (n * n + nu * nu) ** (-s)
        tail, omitted = _em_tail(s, nu, n0, order)
        value = math.fsum([nu ** (-2 * s), 2 * math.fsum(head), 2 * tail])
        if 2 * omitted <= tol / 2:
            err = float(2 * omitted + 4 * _EPS * abs(value))
            return ZetaValue(value, err, Route.DIRECT_SERIES)
        n0 *= 2
        order = min(order + 1, len(_EM_COEFFS) - 1)
    raise ConvergenceError(
        f"series for zeta({s}, {nu}) did not reach tol={tol:g} (estimate {2 * omitted:g})"
    )


# --------------------------------------------------------------------------
# continuation route


def _is_pole(s):
    # Gamma(s - 1/2) has poles at s = 1/2, -1/2, -3/2, ...
    return (s - 0.5) <= 0 and float(s - 0.5).is_integer()


def epstein_continued(s: float, nu: float, tol: float = 1e-12) -> ZetaValue:
    """zeta(s, nu) for s < 1 through the integral continuation.

    At s = 0, -1, -2, ... the value is exactly zero: 1/Gamma(s) and sin(pi s)
    both vanish, so no quadrature is attempted.  The endpoint behaviour
    (t-1)^(-s) is handled by an algebraic-weight Gauss-Kronrod rule.
    """
    _check_nu(nu)
    if not s < 1:
        raise DomainError(f"the integral continuation needs s < 1, got s={s}")
    if _is_pole(s):
        raise DomainError(f"zeta(s, nu) has a pole at s={s}")
    if not tol > 0:
        raise DomainError("tol must be positive")
    if s <= 0 and float(s).is_integer():
        return ZetaValue(0.0, 0.0, Route.CLOSED_FORM)

    scale = nu ** (1 - 2 * s)
    first = _SQRT_PI * math.gamma(s - 0.5) * float(special.rgamma(s))
    sin_term = 4 * math.sin(math.pi * s)

    two_pi_nu = 2 * math.pi * nu

    def smooth(t):
        return (t + 1) ** (-s) * _bose(two_pi_nu * t)

    # beyond t_cut the Bose factor is below ~e^-40 relative to t=1
    t_cut = 1.0 + max(2.0, 40.0 / two_pi_nu)
    inner_tol = tol / (4 * scale * max(abs(sin_term), 1e-300))
    near, near_err = integrate.quad(
        smooth, 1.0, t_cut, weight="alg", wvar=(-s, 0.0),
        epsabs=inner_tol / 2, epsrel=1e-13, limit=200,
    )
    far, far_err = integrate.quad(
        lambda t: (t * t - 1) ** (-s) * _bose(two_pi_nu * t),
        t_cut, math.inf, epsabs=inner_tol / 2, epsrel=1e-13, limit=200,
    )
    integral = near + far
    value = scale * (first + sin_term * integral)
    quad_err = scale * abs(sin_term) * (near_err + far_err)
    # tol is absolute, but the pieces can be large (nu^(1-2s) at small nu);
    # a quadrature already at the working relative precision is accepted
    magnitude = scale * (abs(first) + abs(sin_term * integral))
    if quad_err > max(tol, 1e-12 * magnitude):
        raise ConvergenceError(
            f"continuation of zeta({s}, {nu}) did not reach tol={tol:g} (estimate {quad_err:g})"
        )
    err = float(quad_err + 4 * _EPS * magnitude)
    return ZetaValue(value, err, Route.INTEGRAL_CONTINUATION)


def epstein(s: float, nu: float, tol: float = 1e-12) -> ZetaValue:
    """zeta(s, nu) by whichever route covers s (series preferred above 1/2)."""
    if s > 0.5:
        return epstein_series(s, nu, tol)
    return epstein_continued(s, nu, tol)


def _log_two_sinh(x):
    # ln(2 sinh x) = x + ln(1 - e^{-2x}); no overflow for large x
    return x + math.log(-math.expm1(-2 * x))


def epstein_ds_at_zero(nu: float) -> float:
    """d/ds zeta(s, nu) at s=0, i.e. -2 ln(2 sinh(pi nu))."""
    _check_nu(nu)
    return -2.0 * _log_two_sinh(math.pi * nu)


# --------------------------------------------------------------------------
# operator zeta of -d^2/dtau^2 + (1-sigma) omega^2 on the circle of length beta


def _check_operator_args(beta, omega, sigma):
    if not (beta > 0 and math.isfinite(beta)):
        raise DomainError(f"beta must be positive, got {beta}")
    if not (omega > 0 and math.isfinite(omega)):
        raise DomainError(f"omega must be positive, got {omega}")
    if not (0.0 <= sigma < 1.0):
        raise DomainError(f"sigma must lie in [0, 1), got {sigma}")


def thermal_nu(beta: float, omega: float, sigma: float = 0.0) -> float:
    """nu = sqrt(1-sigma) omega beta / (2 pi)."""
    return math.sqrt(1.0 - sigma) * omega * beta / (2 * math.pi)


def operator_zeta(s: float, beta: float, omega: float, sigma: float = 0.0,
                  tol: float = 1e-12) -> ZetaValue:
    """sum_n a_n^(-s) with a_n = (2 pi n/beta)^2 + (1-sigma) omega^2."""
    _check_operator_args(beta, omega, sigma)
    if s == 0:
        return ZetaValue(0.0, 0.0, Route.CLOSED_FORM)
    prefactor = (beta / (2 * math.pi)) ** (2 * s)
    z = epstein(s, thermal_nu(beta, omega, sigma), tol / prefactor)
    return ZetaValue(prefactor * z.value, prefactor * z.abs_error_estimate, z.route)


def half_operator_zeta_prime_at_zero(beta: float, omega: float, sigma: float = 0.0,
                                     printed: bool = False) -> float:
    """(1/2) d/ds of the operator zeta at s=0.

    The default is the composed form -ln(2 sinh(sqrt(1-sigma) omega beta/2)).
    ``printed=True`` returns the variant -ln(2 sinh((1-sigma) omega beta/2));
    the two agree at sigma=0.  It exists only to document that variant.
    """
    _check_operator_args(beta, omega, sigma)
    factor = (1.0 - sigma) if printed else math.sqrt(1.0 - sigma)
    return -_log_two_sinh(factor * omega * beta / 2)
