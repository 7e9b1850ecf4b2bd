"""Arbitrary-precision scalar helpers and the special functions the rest of
the package is built on.

Scalars are plain :class:`mpmath.mpf` / :class:`mpmath.mpc` values.  Every
public function takes an explicit ``precision`` in decimal digits and evaluates
with ``GUARD_DIGITS`` extra digits; returned values keep the full working
mantissa, so downstream code never loses digits it was handed.
"""

from __future__ import annotations

import math
from functools import lru_cache

import gmpy2
import mpmath
from mpmath import mp, mpc, mpf

DEFAULT_PRECISION = 60
GUARD_DIGITS = 10
MIN_PRECISION = 30


class NumericalError(ArithmeticError):
    """Base class for numerical failures (quadrature, poles, conditioning)."""


class PoleError(NumericalError):
    """Argument sits on (or numerically next to) a pole."""


class QuadratureError(NumericalError):
    """A quadrature failed to reach its tolerance within the refinement cap."""


class PrecisionEscalationError(NumericalError):
    """Error estimate exceeds the requested accuracy; rerun at higher precision."""


def check_precision(precision: int) -> int:
    precision = int(precision)
    if precision < MIN_PRECISION:
        raise ValueError(f"precision must be >= {MIN_PRECISION} digits, got {precision}")
    return precision


# ---------------------------------------------------------------------------
# log-gamma (Stirling series with upward shift)
# ---------------------------------------------------------------------------


def digits_to_bits(dps: int) -> int:
    return int(math.ceil(dps * 3.321928094887362)) + 8


def to_gmp(x):
    """Exact conversion of an mpmath (or Python) number to gmpy2."""
    x = mpmath.mpmathify(x)
    if isinstance(x, mpc):
        re, im = _mpf_to_gmp(x.real), _mpf_to_gmp(x.imag)
        bits = max(re.precision, im.precision, gmpy2.get_context().precision)
        with gmpy2.context(gmpy2.get_context(), precision=bits):
            return gmpy2.mpc(re, im)
    return _mpf_to_gmp(x)


def _mpf_to_gmp(x: mpf):
    sign, man, exp, bc = x._mpf_
    if not man:
        if exp == 0 or x == 0:
            return gmpy2.mpfr(0)
        return gmpy2.mpfr(str(x))
    # the mantissa may be wider than the gmpy2 context; give it room
    bits = max(int(bc), 2, gmpy2.get_context().precision)
    with gmpy2.context(gmpy2.get_context(), precision=bits):
        val = gmpy2.mul_2exp(gmpy2.mpfr(man), exp)
        return -val if sign else val


def from_gmp(x):
    """Exact conversion of a gmpy2 number back to mpmath."""
    if isinstance(x, gmpy2.mpc):
        return mpc(_gmp_to_mpf(x.real), _gmp_to_mpf(x.imag))
    return _gmp_to_mpf(x)


def _gmp_to_mpf(x) -> mpf:
    if gmpy2.is_zero(x):
        return mpf(0)
    if not gmpy2.is_finite(x):
        return mpf(str(x))
    man, exp = x.as_mantissa_exp()
    with mp.workprec(max(int(gmpy2.bit_length(man)), 53)):
        return mpf((int(man), int(exp)))


@lru_cache(maxsize=None)
def _stirling_table(bits: int):
    """Horner-ordered Stirling coefficients and the shift radius for ``bits``."""
    dps = int(bits / 3.321928094887362)
    radius = max(10.0, dps * math.log(10) / (2 * math.pi) + 2.0)
    target = -dps * math.log(10) - 5
    n = 1
    while True:
        # |B_2n| / (2n(2n-1) r^(2n-1)) with |B_2n| ~ 2 (2n)! / (2 pi)^(2n)
        log_term = (
            math.log(2)
            + math.lgamma(2 * n + 1)
            - 2 * n * math.log(2 * math.pi)
            - math.log(2 * n * (2 * n - 1))
            - (2 * n - 1) * math.log(radius)
        )
        if log_term < target:
            break
        n += 1
    with gmpy2.context(gmpy2.get_context(), precision=bits):
        coeffs = []
        for k in range(n, 0, -1):
            b = mpmath.bernfrac(2 * k)
            coeffs.append(gmpy2.mpfr(gmpy2.mpq(int(b[0]), int(b[1]) * 2 * k * (2 * k - 1))))
        half_log_2pi = gmpy2.log(2 * gmpy2.const_pi()) / 2
    return tuple(coeffs), radius, half_log_2pi


def lgamma_gmp(z):
    """Principal log Gamma of a gmpy2 ``mpc`` at the current gmpy2 precision.

    No pole check; callers keep arguments off the nonpositive integers.
    """
    bits = gmpy2.get_context().precision
    coeffs, radius, half_log_2pi = _stirling_table(bits)
    x = float(z.real)
    y = float(z.imag)
    shift = 0
    if x < 1.0:
        shift = int(math.ceil(1.0 - x))
    r2 = radius * radius
    while (x + shift) ** 2 + y * y < r2:
        shift += 1
    if shift:
        prod = z
        arg_sum = math.atan2(y, x)
        for i in range(1, shift):
            prod = prod * (z + i)
            arg_sum += math.atan2(y, x + i)
        w = z + shift
    else:
        w = z
    winv = 1 / w
    w2inv = winv * winv
    acc = coeffs[0]
    for coef in coeffs[1:]:
        acc = acc * w2inv + coef
    res = (w - 0.5) * gmpy2.log(w) - w + half_log_2pi + acc * winv
    if shift:
        logp = gmpy2.log(prod)
        # the branch comes from the sum of the individual args, not arg(prod)
        turns = round((arg_sum - float(logp.imag)) / (2 * math.pi))
        res = res - logp
        if turns:
            res = res - gmpy2.mpc(0, 2 * turns * gmpy2.const_pi())
    return res


def log_gamma(z, precision: int = DEFAULT_PRECISION):
    """Principal branch of log Gamma(z) for complex (or real) ``z``.

    The branch is the analytic continuation from the positive real axis, so
    ``log_gamma(z + 1) == log_gamma(z) + log(z)`` holds off the negative real
    axis.  Raises :class:`PoleError` within ``10**(-precision/2)`` of a
    nonpositive integer.  Real positive input gives a real ``mpf``.
    """
    dps = int(precision) + GUARD_DIGITS
    with mp.workdps(dps):
        z = mpmath.mpmathify(z)
        zc = mpc(z)
        n = mpmath.nint(zc.real)
        if n <= 0 and abs(zc - n) < mpf(10) ** (-mpf(precision) / 2):
            raise PoleError(f"log_gamma: argument {mpmath.nstr(zc, 15)} is at a pole")
        with gmpy2.context(gmpy2.get_context(), precision=digits_to_bits(dps)):
            res = from_gmp(lgamma_gmp(to_gmp(zc)))
        if not isinstance(z, mpc) and z > 0:
            return res.real
        return res


# ---------------------------------------------------------------------------
# digamma
# ---------------------------------------------------------------------------


def _digamma_nterms(dps: int, radius: float) -> int:
    target = -dps * math.log(10) - 5
    n = 1
    while (
        math.log(2) + math.lgamma(2 * n + 1) - 2 * n * math.log(2 * math.pi)
        - math.log(2 * n) - 2 * n * math.log(radius)
    ) > target:
        n += 1
    return n


@lru_cache(maxsize=None)
def _digamma_coefficients(dps: int, nterms: int) -> tuple:
    with mp.workdps(dps):
        return tuple(mpmath.bernoulli(2 * n) / (2 * n) for n in range(1, nterms + 1))


def digamma(x, precision: int = DEFAULT_PRECISION):
    """Psi(x) = d/dx log Gamma(x) for real x > 0."""
    dps = int(precision) + GUARD_DIGITS
    with mp.workdps(dps):
        x = mpf(x)
        if x <= 0:
            raise ValueError("digamma is only provided for x > 0")
        radius = max(10.0, dps * math.log(10) / (2 * math.pi) + 2.0)
        shift = max(0, math.ceil(radius - float(x)))
        acc = mpf(0)
        for i in range(shift):
            acc += 1 / (x + i)
        w = x + shift
        coeffs = _digamma_coefficients(dps, _digamma_nterms(dps, float(w)))
        res = mpmath.log(w) - 1 / (2 * w)
        w2inv = 1 / (w * w)
        power = w2inv
        for coef in coeffs:
            res -= coef * power
            power *= w2inv
        return res - acc


# ---------------------------------------------------------------------------
# Modified Bessel function K0
# ---------------------------------------------------------------------------


def bessel_k0_crossover(precision: int) -> float:
    """Argument above which the asymptotic expansion is used.

    The asymptotic series for K0 bottoms out near exp(-2x) relative error, so
    it can only deliver ``precision`` digits once 2x > precision*ln(10).
    """
    return (int(precision) + GUARD_DIGITS) * math.log(10) / 2 + 2.0


def _k0_series(x: mpf, dps: int) -> mpf:
    # ascending series; loses about 2x/ln(10) digits to cancellation
    extra = int(2 * float(x) / math.log(10)) + 5
    with mp.workdps(dps + extra):
        x = mpf(x)
        q = x * x / 4
        term = mpf(1)
        harmonic = mpf(0)
        i0 = mpf(1)
        tail = mpf(0)
        eps = mpf(10) ** (-(dps + extra))
        k = 0
        while True:
            k += 1
            term *= q / (k * k)
            harmonic += mpf(1) / k
            i0 += term
            tail += term * harmonic
            if term * (harmonic + 1) < eps * abs(tail + i0):
                break
        res = -(mpmath.log(x / 2) + mpmath.euler) * i0 + tail
    return +res


def _k0_asymptotic(x: mpf, dps: int) -> mpf:
    with mp.workdps(dps + 5):
        x = mpf(x)
        eight_x = 8 * x
        term = mpf(1)
        total = mpf(1)
        eps = mpf(10) ** (-(dps + 5))
        k = 0
        prev = abs(term)
        while True:
            k += 1
            term *= -mpf((2 * k - 1) ** 2) / (k * eight_x)
            if abs(term) > prev:
                break
            total += term
            prev = abs(term)
            if prev < eps:
                break
        res = mpmath.sqrt(mpmath.pi / (2 * x)) * mpmath.exp(-x) * total
    return +res


def bessel_k0(x, precision: int = DEFAULT_PRECISION):
    """Modified Bessel function of the second kind, order zero, for x > 0.

    ``x == 0`` returns ``+inf`` (logarithmic singularity); negative arguments
    raise ``ValueError``.
    """
    dps = int(precision) + GUARD_DIGITS
    with mp.workdps(dps):
        x = mpf(x)
        if x < 0:
            raise ValueError("bessel_k0 requires x >= 0")
        if x == 0:
            return mpf("inf")
        if float(x) <= bessel_k0_crossover(precision):
            return _k0_series(x, dps)
        return _k0_asymptotic(x, dps)


# ---------------------------------------------------------------------------
# Barnes G
# ---------------------------------------------------------------------------


def log_barnes_g(n: int, precision: int = DEFAULT_PRECISION):
    """log G(n+1) = sum_{l=1}^{n-1} log(l!) for integer n >= 1."""
    n = int(n)
    if n < 1:
        raise ValueError("log_barnes_g requires n >= 1")
    # exact integer product, then one log
    value = 1
    fact = 1
    for ell in range(1, n):
        fact *= ell
        value *= fact
    with mp.workdps(int(precision) + GUARD_DIGITS):
        return mpmath.log(mpf(value))
