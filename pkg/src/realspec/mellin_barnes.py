"""Mellin-Barnes evaluation of the product-of-Gaussians weight and of the
Meijer G entries of the all-real determinant.

Every contour integral here has the form (1/2 pi i) * int F(s) ds along the
vertical line Re s = c, with F(conj s) = conj F(s).  It is evaluated as
(1/pi) * int_0^inf Re F(c + i t) dt with the trapezoidal rule, which converges
exponentially for integrands analytic in a strip around the line.

The brute-force oracles at the bottom work directly from the defining
double integrals in double precision and share no code with the contour path.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, NamedTuple, Sequence

import gmpy2
import mpmath
import numpy as np
from mpmath import mp, mpf
from scipy import integrate, optimize, special

from .ensemble import rng_stream
from .precision import (
    DEFAULT_PRECISION,
    GUARD_DIGITS,
    NumericalError,
    QuadratureError,
    digits_to_bits,
    from_gmp,
    lgamma_gmp,
    log_gamma,
)

logger = logging.getLogger(__name__)

MAX_HALVINGS = 6
_MAX_NODES = 400_000


class ContourPlacementError(NumericalError):
    """The requested abscissa does not separate the two pole families."""


class SingularityError(NumericalError, ValueError):
    """Evaluation requested at a point where the function is infinite."""


@dataclass(frozen=True)
class ContourSpec:
    """Vertical contour Re s = c truncated to |Im s| <= T with step h."""

    c: float
    T: float
    h: float
    precision: int


@dataclass(frozen=True)
class LineIntegral:
    values: tuple
    errors: tuple
    contour: ContourSpec
    nodes: int
    # digits lost to cancellation: log10(int |F| / |int F|), worst component
    lost_digits: float


class Estimate(NamedTuple):
    value: mpf
    stderr: mpf


# ---------------------------------------------------------------------------
# trapezoidal rule on a vertical line
# ---------------------------------------------------------------------------


def _abs_sum(values) -> float:
    return sum(float(abs(v)) for v in values)


def _initial_step(factory, c: float, d: float, target: int) -> float:
    """Step for which the strip error bound M(d') exp(-2 pi d'/h) hits 10^-target.

    M is the growth of |F| between the line and a parallel line at offset d',
    probed on the real axis in low precision; the best d' < d wins.
    """
    with gmpy2.context(gmpy2.get_context(), precision=64):
        integrand = factory()
        base = _abs_sum(integrand(gmpy2.mpc(c, 0)))
        best = 0.0
        for frac in (0.25, 0.4, 0.55, 0.7, 0.85):
            dp = frac * d
            grow = max(
                _abs_sum(integrand(gmpy2.mpc(c + dp, 0))),
                _abs_sum(integrand(gmpy2.mpc(c - dp, 0))),
            )
            log_m = max(0.0, math.log(grow / base)) if base > 0 and grow > 0 else 0.0
            h = 2 * math.pi * dp / ((target + 2) * math.log(10) + log_m + math.log(4))
            best = max(best, h)
    return min(best, 0.5)


def _lost_digits(mass, values) -> float:
    return max(
        float(gmpy2.log10(ms / abs(v))) if v != 0 else float("inf")
        for ms, v in zip(mass, values)
    )


def _trapezoid(
    factory, c: float, d: float, target: int, bits: int, guard: float = float("inf")
) -> LineIntegral:
    h = _initial_step(factory, c, d, target)
    with gmpy2.context(gmpy2.get_context(), precision=bits):
        integrand = factory()
        cc = gmpy2.mpfr(c)
        hh = gmpy2.mpfr(h)

        def at(t):
            return integrand(gmpy2.mpc(cc, t))

        first = at(gmpy2.mpfr(0))
        ncomp = len(first)
        total = [v.real / 2 for v in first]
        mass = [abs(v) / 2 for v in first]
        scale = [abs(v) for v in first]
        cut = [gmpy2.mpfr(10) ** (-(target + 4))] * ncomp
        quiet = 0
        n = 0
        while True:
            n += 1
            if n > _MAX_NODES:
                raise QuadratureError("contour integrand does not decay; truncation not found")
            vals = at(n * hh)
            small = True
            for i, v in enumerate(vals):
                a = abs(v)
                total[i] += v.real
                mass[i] += a
                if a > scale[i]:
                    scale[i] = a
                # relative to the running sum too: cancellation can leave the
                # integral far below the peak of |F|
                if a > cut[i] * min(scale[i], abs(total[i])):
                    small = False
            quiet = quiet + 1 if small else 0
            if quiet >= 3 and n * h > 1.0:
                break
        last = n
        prev = [s * hh for s in total]
        mass = [s * hh for s in mass]
        tol = gmpy2.mpfr(10) ** (-target)
        nodes = last + 1
        lost = _lost_digits(mass, prev)
        if lost > guard:
            # refining is pointless once cancellation has eaten the guard digits
            pi = gmpy2.const_pi()
            spec = ContourSpec(c=c, T=float(last * h), h=h, precision=target)
            values = tuple(from_gmp(v / pi) for v in prev)
            return LineIntegral(values, (mpf("inf"),) * ncomp, spec, nodes, lost)
        for _ in range(MAX_HALVINGS):
            hh = hh / 2
            h = h / 2
            mids = [gmpy2.mpfr(0)] * ncomp
            for i in range(last):
                vals = at((2 * i + 1) * hh)
                for q, v in enumerate(vals):
                    mids[q] += v.real
            nodes += last
            last *= 2
            cur = [p / 2 + s * hh for p, s in zip(prev, mids)]
            diffs = [abs(a - b) for a, b in zip(cur, prev)]
            prev = cur
            if all(dv <= tol * abs(v) for dv, v in zip(diffs, cur)):
                break
        else:
            raise QuadratureError(
                f"trapezoid on Re s = {c} not converged after {MAX_HALVINGS} halvings"
            )
        pi = gmpy2.const_pi()
        values = tuple(from_gmp(v / pi) for v in cur)
        errors = tuple(from_gmp(e / pi) for e in diffs)
        lost = _lost_digits(mass, cur)
    spec = ContourSpec(c=c, T=float(last * h), h=h, precision=target)
    return LineIntegral(values, errors, spec, nodes, lost)


def line_integral(
    factory: Callable[[], Callable], c: float, d: float, precision: int
) -> LineIntegral:
    """(1/2 pi i) * int_{c - i inf}^{c + i inf} F(s) ds for a vector of integrands.

    ``factory()`` is called inside the working gmpy2 context and must return
    ``F(s) -> list of gmpy2.mpc``.  ``d`` is the distance from the line to the
    nearest singularity.  Working precision is widened when cancellation eats
    into the guard digits.
    """
    target = int(precision) + 3
    extra = 0
    for _ in range(4):
        bits = digits_to_bits(target + GUARD_DIGITS + extra)
        allowed = GUARD_DIGITS + extra - 3
        res = _trapezoid(factory, c, d, target, bits, guard=allowed)
        if res.lost_digits <= allowed:
            return res
        logger.debug("contour at c=%s lost %.1f digits; widening", c, res.lost_digits)
        extra = int(math.ceil(res.lost_digits)) + 3
    raise NumericalError("cancellation in contour integral exceeds precision escalation cap")


# ---------------------------------------------------------------------------
# weight density of a product of m standard Gaussians
# ---------------------------------------------------------------------------


def _weight_abscissa(m: int, logz: float) -> float:
    # saddle of z^(-c) Gamma(c)^m on the real axis: digamma(c) = log(z)/m
    target = logz / m
    lo, hi = 1e-300, 1.0
    while special.digamma(hi) < target:
        hi *= 2
    c = optimize.brentq(lambda x: special.digamma(x) - target, lo, hi, xtol=1e-12)
    # floor keeps the strip (width c) from collapsing for tiny z; the
    # cancellation it costs, z^(-c), is bounded by 10^8
    floor = min(0.5, 8 * math.log(10) / abs(logz)) if logz != 0 else 0.5
    return max(c, floor)


def weight_density(m: int, lam, precision: int = DEFAULT_PRECISION) -> mpf:
    """Density at ``lam`` of the product of ``m`` independent standard normals.

    w_m(lam) = (2 pi)^(-m/2) (1/2 pi i) int (lam^2/2^m)^(-s) Gamma(s)^m ds, Re s > 0.
    """
    m = int(m)
    if m < 1:
        raise ValueError("m must be >= 1")
    with mp.workdps(precision + GUARD_DIGITS):
        lam = abs(mpf(lam))
        if lam == 0:
            if m == 1:
                return 1 / mpmath.sqrt(2 * mpmath.pi)
            raise SingularityError(f"w_{m} has a logarithmic singularity at 0")
        z = lam * lam / mpf(2) ** m
        logz = mpmath.log(z)
        c = _weight_abscissa(m, float(logz))
    logz_str = mpmath.nstr(logz, precision + 2 * GUARD_DIGITS + 10)

    def factory():
        lz = gmpy2.mpfr(logz_str)

        def integrand(s):
            return [gmpy2.exp(m * lgamma_gmp(s) - s * lz)]

        return integrand

    res = line_integral(factory, c, c, precision)
    with mp.workdps(precision + GUARD_DIGITS):
        return res.values[0] / (2 * mpmath.pi) ** (mpf(m) / 2)


# ---------------------------------------------------------------------------
# determinant entries
# ---------------------------------------------------------------------------


def default_abscissa(j: int) -> float:
    """Contour abscissa for row ``j``: midpoint-biased inside (max(1/2-j, -1), 0)."""
    return -min(j - 0.5, 1.0) / 2


def _alpha_factory(m: int, j: int, ks: Sequence[int]):
    kmax = max(ks)
    wanted = set(ks)

    def factory():
        shift = gmpy2.mpfr(j) - gmpy2.mpfr(0.5)

        def integrand(s):
            base = gmpy2.exp(m * (lgamma_gmp(1 - s) + lgamma_gmp(shift + s))) / s
            out = []
            poly = gmpy2.mpc(1)
            for k in range(1, kmax + 1):
                if k > 1:
                    # Gamma(k - s) = Gamma(1 - s) * prod_{i<k} (i - s)
                    poly = poly * (k - 1 - s)
                if k in wanted:
                    out.append(base * poly**m if k > 1 else base)
            return out

        return integrand

    return factory


@lru_cache(maxsize=512)
def alpha_entries(
    m: int, j: int, ks: tuple, precision: int = DEFAULT_PRECISION, c: float | None = None
) -> tuple:
    """Entries g(m, j, k) for every k in ``ks`` on one shared contour.

    Returns ``(values, errors, contour)``; see :func:`alpha_entry`.
    """
    m, j = int(m), int(j)
    ks = tuple(sorted(int(k) for k in ks))
    if m < 1 or j < 1 or not ks or ks[0] < 1:
        raise ValueError("alpha entries need m, j, k >= 1")
    if c is None:
        c = default_abscissa(j)
    left = 0.5 - j
    if not left < c < 0:
        raise ContourPlacementError(f"abscissa {c} outside ({left}, 0) for j={j}")
    d = min(-c, c - left)
    res = line_integral(_alpha_factory(m, j, ks), c, d, precision)
    with mp.workdps(precision + GUARD_DIGITS):
        values = tuple(-v for v in res.values)
    return values, res.errors, res.contour


def alpha_entry(
    m: int, j: int, k: int, precision: int = DEFAULT_PRECISION, c: float | None = None
) -> mpf:
    """Rescaled determinant entry

        g(m, j, k) = G^{m+1,m}_{m+1,m+1}(1 | 5/2-j,...,5/2-j, 2 ; 1, 1+k,...,1+k)
                   = -(1/2 pi i) int (Gamma(k-s) Gamma(j-1/2+s))^m / s ds

    on Re s = c with 1/2 - j < c < 0.  The Pfaffian entry is
    alpha_{2j-1,2k} = 2^((j+k-1/2) m) (2 pi)^(-m) g(m, j, k).
    """
    values, _, _ = alpha_entries(m, j, (k,), precision, c)
    return values[0]


def alpha_prefactor(m: int, j: int, k: int, precision: int = DEFAULT_PRECISION) -> mpf:
    with mp.workdps(precision + GUARD_DIGITS):
        return mpf(2) ** ((j + k - mpf(0.5)) * m) / (2 * mpmath.pi) ** m


def nu_entry(m: int, j: int, precision: int = DEFAULT_PRECISION) -> mpf:
    """Gamma(j - 1/2)^m, the last column of the odd-N matrix."""
    if m < 1 or j < 1:
        raise ValueError("nu entries need m, j >= 1")
    with mp.workdps(precision + GUARD_DIGITS):
        return mpmath.exp(m * log_gamma(mpf(j) - mpf(0.5), precision))


# ---------------------------------------------------------------------------
# direct quadrature oracles (double precision, closed-form weights only)
# ---------------------------------------------------------------------------


def _closed_form_weight(m: int) -> Callable[[float], float]:
    if m == 1:
        return lambda x: math.exp(-x * x / 2) / math.sqrt(2 * math.pi)
    if m == 2:
        return lambda x: float(special.k0(abs(x))) / math.pi if x != 0 else math.inf
    raise ValueError("direct quadrature oracle only supports m in {1, 2}")


_QUAD_OPTS = dict(epsabs=1e-15, epsrel=1e-13, limit=400)


def _half_line(f, a: float) -> float:
    # int_a^inf f, split so the log singularity of w_2 at 0 sits on an endpoint
    pieces = []
    if a < 0:
        pieces.append((a, 0.0))
        a = 0.0
    if a < 1.0:
        pieces.append((a, 1.0))
        a = 1.0
    total = sum(integrate.quad(f, lo, hi, **_QUAD_OPTS)[0] for lo, hi in pieces)
    return total + integrate.quad(f, a, np.inf, **_QUAD_OPTS)[0]


def alpha_quadrature(m: int, a: int, b: int) -> float:
    """alpha_{a,b} = <x^(a-1) y^(b-1) sgn(y - x)> by nested 1D quadrature over the plane."""
    w = _closed_form_weight(m)

    def g(y):
        return y ** (b - 1) * w(y)

    def f(x):
        return x ** (a - 1) * w(x)

    g_total = _half_line(g, -np.inf)

    def outer(x):
        # int sgn(y - x) g(y) dy = 2 int_x^inf g - int g
        return f(x) * (2 * _half_line(g, x) - g_total)

    lhs = integrate.quad(outer, -np.inf, -1.0, **_QUAD_OPTS)[0]
    lhs += integrate.quad(outer, -1.0, 0.0, **_QUAD_OPTS)[0]
    return lhs + _half_line(outer, 0.0)


def alpha_oracle_quadrature(m: int, j: int, k: int) -> float:
    """alpha_{2j-1,2k} from the defining double integral.

    With w_m even the full-plane integral folds to
    4 int_0^inf x^(2j-2) w(x) int_x^inf y^(2k-1) w(y) dy dx.
    """
    w = _closed_form_weight(m)

    def inner(x):
        return _half_line(lambda y: y ** (2 * k - 1) * w(y), x)

    return 4 * _half_line(lambda x: x ** (2 * j - 2) * w(x) * inner(x), 0.0)


# ---------------------------------------------------------------------------
# alternative route to p_{2,2}
# ---------------------------------------------------------------------------


def alpha12_product_formula(
    m: int, samples: int = 10**6, seed: int = 0, precision: int = DEFAULT_PRECISION
) -> Estimate:
    """p_{2,2} = 1/2 (pi/2)^((m-1)/2) <sqrt(x^2 + y^2)>, x, y products of m-1 normals.

    m = 1 and m = 2 are evaluated exactly (the second by polar quadrature);
    m >= 3 is a Monte Carlo mean with its standard error.
    """
    m = int(m)
    if m < 1:
        raise ValueError("m must be >= 1")
    with mp.workdps(precision + GUARD_DIGITS):
        if m == 1:
            return Estimate(1 / mpmath.sqrt(2), mpf(0))
        prefactor = (mpmath.pi / 2) ** (mpf(m - 1) / 2) / 2
        if m == 2:
            # <r> for a standard 2D Gaussian, in polar coordinates
            mean_r = mpmath.quad(lambda r: r * r * mpmath.exp(-r * r / 2), [0, mpmath.inf])
            return Estimate(prefactor * mean_r, mpf(0))
    if samples < 10_000:
        raise ValueError("Monte Carlo path needs at least 10^4 samples")
    total = 0.0
    total_sq = 0.0
    block = 100_000
    done = 0
    index = 0
    while done < samples:
        n = min(block, samples - done)
        rng = rng_stream(seed, index)
        xy = rng.standard_normal((2, m - 1, n)).prod(axis=1)
        r = np.hypot(xy[0], xy[1])
        total += math.fsum(r)
        total_sq += math.fsum(r * r)
        done += n
        index += 1
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0) * samples / (samples - 1)
    with mp.workdps(precision + GUARD_DIGITS):
        return Estimate(prefactor * mpf(mean), prefactor * mpf(math.sqrt(var / samples)))
