"""Large-N Coulomb-gas asymptotics of the all-real probability.

The one-body potential is V(x) = a_m |x|^(2/m) with a_m chosen so that the
equilibrium measure lives on (-1, 1).  Its density is

    rho(x) = (2 / (m pi)) int_{|x|}^1 u^(2/m - 1) / sqrt(u^2 - x^2) du,

a superposition of semicircles of radius u.  That representation also turns
any even moment into a double integral over (u, theta) with x = u sin(theta),
which is how every expectation below is computed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
from mpmath import mp, mpf

from .ensemble import EnsembleSpec
from .mellin_barnes import SingularityError, alpha_entries
from .precision import DEFAULT_PRECISION, GUARD_DIGITS, log_gamma

DENSITY_PRECISION = 30
# below this |x| the density is reported as singular for m >= 2
ORIGIN_CUTOFF = 1e-6


def _check_m(m: int) -> int:
    if int(m) != m or m < 1:
        raise ValueError(f"m must be a positive integer, got {m!r}")
    return int(m)


def freud_constant(m: int, precision: int = DEFAULT_PRECISION) -> mpf:
    """Coefficient a_m of |x|^(2/m) in V: Gamma(1/m) Gamma(1/2) / (2 Gamma(1/m + 1/2))."""
    m = _check_m(m)
    with mp.workdps(precision + GUARD_DIGITS):
        inv = mpf(1) / m
        return mpmath.exp(
            log_gamma(inv, precision) + log_gamma(mpf(0.5), precision)
            - log_gamma(inv + mpf(0.5), precision)
        ) / 2


def potential(m: int, x, precision: int = DEFAULT_PRECISION) -> mpf:
    with mp.workdps(precision + GUARD_DIGITS):
        return freud_constant(m, precision) * abs(mpf(x)) ** (mpf(2) / m)


def _density(m: int, x: mpf) -> mpf:
    # u = |x| cosh(w) removes the inverse square root at u = |x|:
    #   rho(x) = (2 / (m pi)) |x|^e int_0^W cosh(w)^e dw,  e = 2/m - 1,
    # with W = arccosh(1/|x|).  cosh^e is analytic within pi/2 of the real
    # axis, so fixed-length Gauss-Legendre panels converge geometrically.
    ax = abs(x)
    if m == 1:
        return 2 / mpmath.pi * mpmath.sqrt(1 - ax * ax)
    if ax == 0:
        return mpf("inf")
    e = mpf(2) / m - 1
    # arccosh(1/|x|), written to avoid cancellation as |x| -> 1
    W = mpmath.asinh(mpmath.sqrt(1 - ax * ax) / ax)
    panels = max(1, int(math.ceil(float(W) / 2)))
    points = [W * i / panels for i in range(panels + 1)]
    integral = mpmath.quad(lambda w: mpmath.cosh(w) ** e, points, method="gauss-legendre")
    return 2 / (m * mpmath.pi) * ax**e * integral


def equilibrium_density(m: int, x, precision: int = DENSITY_PRECISION) -> mpf:
    """Equilibrium density rho(x) on (-1, 1).

    Raises ``ValueError`` for ``|x| >= 1`` and :class:`SingularityError` for
    ``|x| < 1e-6`` when ``m >= 2``, where rho blows up at the origin.
    """
    m = _check_m(m)
    with mp.workdps(precision + GUARD_DIGITS):
        x = mpf(x)
        if abs(x) >= 1:
            raise ValueError(f"equilibrium density is supported on (-1, 1), got x={x}")
        if m >= 2 and abs(x) < ORIGIN_CUTOFF:
            raise SingularityError(f"rho_{m} is singular at the origin (|x| = {abs(x)})")
        return +_density(m, x)


def density_normalization(m: int, precision: int = DENSITY_PRECISION) -> mpf:
    """int rho over (-1, 1) by nested quadrature of the density itself."""
    m = _check_m(m)
    with mp.workdps(precision + GUARD_DIGITS):
        # x = y^(2m) turns the x^(2/m - 1) (or log) blow-up at 0 into a smooth
        # y^3 factor, so graded Gauss-Legendre suffices there; tanh-sinh takes
        # the square-root edge at 1
        q = 2 * m

        def f(y):
            return _density(m, y**q) * q * y ** (q - 1)

        inner = [mpf(0)] + [mpf(10) ** -e for e in (3, 2, 1)] + [mpf(0.5)]
        head = mpmath.quad(f, inner, method="gauss-legendre")
        tail = mpmath.quad(f, [mpf(0.5), 1])
        return 2 * (head + tail)


def even_moment(m: int, f, precision: int = DENSITY_PRECISION, breakpoint=None) -> mpf:
    """int f(x) rho(x) dx over (-1, 1) for an even function ``f``.

    Uses rho = superposition of semicircles:

        int f rho = (4 / (m pi)) int_0^1 u^(2/m - 1) int_0^(pi/2) f(u sin t) dt du.

    ``breakpoint`` is an optional |x| location where f is singular; it is
    added as a node in both the u and t integrals.
    """
    m = _check_m(m)
    with mp.workdps(precision + GUARD_DIGITS):
        half_pi = mpmath.pi / 2
        expo = mpf(2) / m - 1

        def inner(u):
            pts = [mpf(0), half_pi]
            if breakpoint is not None and 0 < breakpoint < u:
                pts.insert(1, mpmath.asin(breakpoint / u))
            return mpmath.quad(lambda t: f(u * mpmath.sin(t)), pts)

        u_pts = [mpf(0), mpf(1)]
        if breakpoint is not None and 0 < breakpoint < 1:
            u_pts.insert(1, mpf(breakpoint))
        outer = mpmath.quad(lambda u: u**expo * inner(u), u_pts)
        return 4 / (m * mpmath.pi) * outer


def log_potential(m: int, y, precision: int = DENSITY_PRECISION) -> mpf:
    """U(y) = int rho(x) log|x - y| dx, by quadrature."""
    with mp.workdps(precision + GUARD_DIGITS):
        y = abs(mpf(y))
        if y == 0:
            return even_moment(m, lambda x: mpmath.log(abs(x)), precision)
        # even part of log|x - y| is log|x^2 - y^2| / 2
        def f(x):
            d = abs(x * x - y * y)
            # a node can land exactly on the (integrable) singularity
            return mpmath.log(d) / 2 if d else mpf(0)

        return even_moment(m, f, precision, breakpoint=y)


def log_potential_closed(m: int, y, precision: int = DENSITY_PRECISION) -> mpf:
    """Closed form a_m |y|^(2/m) - log 2 - m/2 of the log-potential on [-1, 1]."""
    with mp.workdps(precision + GUARD_DIGITS):
        return potential(m, y, precision) - mpmath.log(2) - mpf(m) / 2


def log_potential_residual(m: int, y, precision: int = DENSITY_PRECISION) -> mpf:
    with mp.workdps(precision + GUARD_DIGITS):
        return abs(log_potential(m, y, precision) - log_potential_closed(m, y, precision))


def equilibrium_energy(m: int, precision: int = DENSITY_PRECISION) -> tuple[mpf, mpf]:
    """Energy -int V rho + (1/2) int int log|x - y| rho rho, closed and by quadrature.

    The log-potential is constant plus V on the support, so the double
    integral collapses to int V rho + U(0), two single moments of rho.
    """
    m = _check_m(m)
    with mp.workdps(precision + GUARD_DIGITS):
        closed = -mpmath.log(2) / 2 - mpf(3 * m) / 8
        a = freud_constant(m, precision)
        p = mpf(2) / m
        v_mean = even_moment(m, lambda x: a * abs(x) ** p, precision)
        u0 = log_potential(m, 0, precision)
        quadrature = -v_mean / 2 + u0 / 2
        return +closed, +quadrature


def decay_base(m: int, precision: int = DEFAULT_PRECISION) -> mpf:
    """b_m = 2^(-1/2) (Gamma(1/m + 1) Gamma(1/2) / Gamma(1/m + 1/2))^(m/4)."""
    m = _check_m(m)
    with mp.workdps(precision + GUARD_DIGITS):
        inv = mpf(1) / m
        log_ratio = (
            log_gamma(inv + 1, precision) + log_gamma(mpf(0.5), precision)
            - log_gamma(inv + mpf(0.5), precision)
        )
        return mpmath.exp(mpf(m) / 4 * log_ratio - mpmath.log(2) / 2)


def log_p_asymptotic(spec: EnsembleSpec, precision: int = DEFAULT_PRECISION) -> mpf:
    """Leading large-N prediction N^2 log b_m for log p_{N,N}."""
    with mp.workdps(precision + GUARD_DIGITS):
        return spec.N**2 * mpmath.log(decay_base(spec.m, precision))


def limit_ratio(m: int, j: int, k: int, precision: int = DEFAULT_PRECISION) -> mpf:
    """g(m, j, k) / (Gamma(j - 1/2) Gamma(k))^m.

    The numerator is the determinant entry; the denominator is its residue
    at s = 0, so the ratio tends to 1 when j <= k and to 0 when j > k.
    """
    m = _check_m(m)
    if j < 1 or k < 1:
        raise ValueError("limit_ratio needs j, k >= 1")
    (g,), _, _ = alpha_entries(m, j, (k,), precision)
    with mp.workdps(precision + GUARD_DIGITS):
        log_norm = m * (log_gamma(mpf(j) - mpf(0.5), precision) + log_gamma(mpf(k), precision))
        return g * mpmath.exp(-log_norm)


@dataclass
class EquilibriumMeasure:
    m: int
    freud_constant: mpf
    energy: mpf
    decay_base: mpf
    density_samples: list = field(default_factory=list)

    @classmethod
    def build(cls, m: int, grid: int = 0, precision: int = DENSITY_PRECISION):
        """Collect the constants and, if ``grid > 0``, density samples at
        ``grid`` points spaced evenly on the open interval (-1, 1)."""
        m = _check_m(m)
        samples = []
        with mp.workdps(precision + GUARD_DIGITS):
            xs = [mpf(-1) + mpf(2 * i + 1) / grid for i in range(grid)]
        for x in xs:
            if m >= 2 and abs(x) < ORIGIN_CUTOFF:
                samples.append((x, mpf("inf")))
            else:
                samples.append((x, equilibrium_density(m, x, precision)))
        return cls(
            m, freud_constant(m, precision), equilibrium_energy_closed(m, precision),
            decay_base(m, precision), samples,
        )


def equilibrium_energy_closed(m: int, precision: int = DEFAULT_PRECISION) -> mpf:
    with mp.workdps(precision + GUARD_DIGITS):
        return -mpmath.log(2) / 2 - mpf(3 * _check_m(m)) / 8
