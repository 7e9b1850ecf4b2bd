"""Probability that every eigenvalue of P_m = X_m ... X_1 is real.

The exact path assembles the half-size determinant of Meijer G entries and
combines it with the Gamma prefactor in log space.  Closed forms for a single
Gaussian matrix and for Y^-1 X serve as references, and a Pfaffian built from
direct quadrature checks the Pfaffian-to-determinant reduction.
"""

from __future__ import annotations

import itertools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import mpmath
import numpy as np
from mpmath import mp, mpf

from .ensemble import EnsembleSpec
from .mellin_barnes import alpha_entries, alpha_quadrature, nu_entry
from .precision import (
    DEFAULT_PRECISION,
    GUARD_DIGITS,
    NumericalError,
    PrecisionEscalationError,
    log_barnes_g,
    log_gamma,
)

logger = logging.getLogger(__name__)

METHODS = (
    "determinant",
    "closed_form_m1",
    "closed_form_ratio",
    "asymptotic",
    "monte_carlo",
    "product_formula",
)

RECOGNITION_T_MAX = 4
RECOGNITION_Q_MAX = 64


class DeterminantSignError(NumericalError):
    """det A <= 0: some entry evaluation has broken down."""


@dataclass(frozen=True)
class PiRationalForm:
    """p * pi^t / 2^q in lowest terms."""

    numerator: int
    pi_power: int
    two_power: int

    def value(self, precision: int = DEFAULT_PRECISION) -> mpf:
        with mp.workdps(precision + GUARD_DIGITS):
            return self.numerator * mpmath.pi**self.pi_power / mpf(2) ** self.two_power

    def __str__(self) -> str:
        num = "" if self.numerator == 1 and self.pi_power else str(self.numerator)
        pi = {0: "", 1: "π"}.get(self.pi_power, f"π^{self.pi_power}")
        head = f"{num}{pi}" or "1"
        if self.two_power == 0:
            return head
        return f"{head}/2^{self.two_power}"


@dataclass
class ProbabilityResult:
    log_value: mpf
    value: mpf
    method: str
    error_estimate: mpf
    recognized_form: Optional[PiRationalForm] = None
    precision: int = DEFAULT_PRECISION
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")


# ---------------------------------------------------------------------------
# matrix assembly
# ---------------------------------------------------------------------------


def matrix_shape(N: int) -> tuple[int, int]:
    """(rows, number of G columns); odd N adds one nu column."""
    if N % 2 == 0:
        return N // 2, N // 2
    return (N + 1) // 2, (N - 1) // 2


def _row(args):
    m, j, ncols, precision = args
    ks = tuple(range(1, ncols + 1))
    values, errors, _ = alpha_entries(m, j, ks, precision)
    return values, errors


def _assemble(spec: EnsembleSpec, precision: int, workers: int = 1):
    N, m = spec.N, spec.m
    if N < 2:
        raise ValueError("the determinant needs N >= 2")
    rows, gcols = matrix_shape(N)
    jobs = [(m, j, gcols, precision) for j in range(1, rows + 1)] if gcols else []
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_row, jobs))
    else:
        results = [_row(job) for job in jobs]
    with mp.workdps(precision + GUARD_DIGITS):
        A = mpmath.matrix(rows, rows)
        E = mpmath.matrix(rows, rows)
        for j in range(rows):
            if gcols:
                values, errors = results[j]
                for k in range(gcols):
                    A[j, k] = values[k]
                    E[j, k] = errors[k]
            if N % 2:
                A[j, rows - 1] = nu_entry(m, j + 1, precision)
                E[j, rows - 1] = abs(A[j, rows - 1]) * mpf(10) ** (-(precision + GUARD_DIGITS))
    return A, E


def build_matrix(spec: EnsembleSpec, precision: int = DEFAULT_PRECISION, workers: int = 1):
    """The half-size matrix whose determinant gives p_{N,N}.

    Even N: [g(m, j, k)]_{j,k <= N/2}.  Odd N: (N+1)/2 rows, (N-1)/2 G columns
    and a final column Gamma(j - 1/2)^m.
    """
    A, _ = _assemble(spec, precision, workers)
    return A


def _lu_log_det(A):
    """Partial-pivot LU; returns (sign, log|det|)."""
    n = A.rows
    U = A.copy()
    sign = 1
    log_abs = mpf(0)
    for col in range(n):
        pivot = max(range(col, n), key=lambda r: abs(U[r, col]))
        if U[pivot, col] == 0:
            return 0, mpf("-inf")
        if pivot != col:
            for c in range(n):
                U[col, c], U[pivot, c] = U[pivot, c], U[col, c]
            sign = -sign
        piv = U[col, col]
        if piv < 0:
            sign = -sign
        log_abs += mpmath.log(abs(piv))
        for r in range(col + 1, n):
            factor = U[r, col] / piv
            if factor:
                for c in range(col, n):
                    U[r, c] -= factor * U[col, c]
    return sign, log_abs


def log_gamma_prefactor(N: int, m: int, precision: int = DEFAULT_PRECISION) -> mpf:
    """-m * sum_{j=1}^N log Gamma(j/2)."""
    with mp.workdps(precision + GUARD_DIGITS):
        return -m * mpmath.fsum(log_gamma(mpf(j) / 2, precision) for j in range(1, N + 1))


def p_all_real_exact(
    spec: EnsembleSpec, precision: int = DEFAULT_PRECISION, workers: int = 1
) -> ProbabilityResult:
    """p_{N,N} = (prod_j 1/Gamma(j/2))^m det A, evaluated in log space."""
    N, m = spec.N, spec.m
    if N == 1:
        return ProbabilityResult(mpf(0), mpf(1), "determinant", mpf(0), PiRationalForm(1, 0, 0),
                                 precision)
    A, E = _assemble(spec, precision, workers)
    with mp.workdps(precision + GUARD_DIGITS):
        sign, log_det = _lu_log_det(A)
        if sign <= 0:
            raise DeterminantSignError(f"det A is not positive for N={N}, m={m}")
        log_p = log_gamma_prefactor(N, m, precision) + log_det
        value = mpmath.exp(log_p)
        # first order: d log det = tr(A^-1 dA)
        Ainv = A**-1
        n = A.rows
        rel = mpmath.fsum(abs(Ainv[k, j]) * E[j, k] for j in range(n) for k in range(n))
        rel += n * n * mpf(10) ** (-(precision + GUARD_DIGITS))
        if rel > mpf(10) ** (-precision):
            raise PrecisionEscalationError(
                f"relative error estimate {mpmath.nstr(rel, 3)} exceeds 1e-{precision}"
            )
        result = ProbabilityResult(
            log_value=log_p,
            value=value,
            method="determinant",
            error_estimate=value * rel,
            precision=precision,
        )
    form = recognize_pi_rational(value, precision=precision)
    if form is not None:
        result.recognized_form = form
        if m == 2:
            result.metadata["recognized_status"] = (
                "numerical identification; the pi-rational entry pattern for m=2 is conjectural"
            )
    return result


# ---------------------------------------------------------------------------
# closed-form references
# ---------------------------------------------------------------------------


def p_all_real_single(N: int, precision: int = DEFAULT_PRECISION) -> ProbabilityResult:
    """Single Gaussian matrix: p_{N,N} = 2^(-N(N-1)/4)."""
    if N < 1:
        raise ValueError("N must be >= 1")
    with mp.workdps(precision + GUARD_DIGITS):
        log_p = -mpf(N * (N - 1)) / 4 * mpmath.log(2)
        value = mpmath.exp(log_p)
    form = None
    if N * (N - 1) % 4 == 0:
        form = PiRationalForm(1, 0, N * (N - 1) // 4)
    return ProbabilityResult(log_p, value, "closed_form_m1", mpf(0), form, precision)


def p_all_real_ratio(N: int, precision: int = DEFAULT_PRECISION) -> ProbabilityResult:
    """Y^-1 X: p_{N,N} = Gamma((N+1)/2)^N / G(N+1)."""
    if N < 1:
        raise ValueError("N must be >= 1")
    with mp.workdps(precision + GUARD_DIGITS):
        log_p = N * log_gamma(mpf(N + 1) / 2, precision) - log_barnes_g(N, precision)
        value = mpmath.exp(log_p)
        leading = ratio_leading_form(N, precision)
    return ProbabilityResult(
        log_p, value, "closed_form_ratio", mpf(0), None, precision,
        metadata={"leading_form": leading},
    )


def ratio_leading_form(N: int, precision: int = DEFAULT_PRECISION) -> mpf:
    """Large-N form N^(1/12) (e/4)^(N^2/4) exp(-zeta'(-1) - 1/12) of the Y^-1 X probability."""
    with mp.workdps(precision + GUARD_DIGITS):
        N = mpf(N)
        zeta_prime = mpmath.zeta(-1, derivative=1)
        return N ** (mpf(1) / 12) * (mpmath.e / 4) ** (N * N / 4) * mpmath.exp(
            -zeta_prime - mpf(1) / 12
        )


# ---------------------------------------------------------------------------
# Pfaffian cross-check
# ---------------------------------------------------------------------------


def pfaffian(A) -> float:
    """Pfaffian of a real antisymmetric matrix by skew Gaussian elimination
    (Parlett-Reid with pivoting)."""
    A = np.array(A, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("pfaffian needs a square matrix")
    if n % 2:
        return 0.0
    A = A.copy()
    result = 1.0
    for k in range(0, n - 1, 2):
        kp = k + 1 + int(np.abs(A[k + 1:, k]).argmax())
        if kp != k + 1:
            A[[k + 1, kp], :] = A[[kp, k + 1], :]
            A[:, [k + 1, kp]] = A[:, [kp, k + 1]]
            result = -result
        if A[k + 1, k] == 0.0:
            return 0.0
        result *= A[k, k + 1]
        if k + 2 < n:
            tau = A[k, k + 2:] / A[k, k + 1]
            # rank-2 update keeps the trailing block antisymmetric
            A[k + 2:, k + 2:] += np.outer(tau, A[k + 2:, k + 1]) - np.outer(A[k + 2:, k + 1], tau)
    return result


def pfaffian_check(spec: EnsembleSpec, precision: int = DEFAULT_PRECISION):
    """(Pf [alpha_{a,b}]_{a,b<=N}, det [alpha_{2j-1,2k}]_{j,k<=N/2}) from direct quadrature.

    Entries with a, b of equal parity are set to zero; the two numbers agree
    up to sign.
    """
    N, m = spec.N, spec.m
    if N % 2 or N > 8:
        raise ValueError("pfaffian_check needs even N <= 8")
    if m not in (1, 2):
        raise ValueError("pfaffian_check needs m in {1, 2}")
    full = np.zeros((N, N))
    cache = {}
    for a, b in itertools.combinations(range(1, N + 1), 2):
        if (a + b) % 2 == 0:
            continue
        cache[a, b] = alpha_quadrature(m, a, b)
        full[a - 1, b - 1] = cache[a, b]
        full[b - 1, a - 1] = -cache[a, b]
    half = N // 2
    reduced = np.array(
        [[cache[2 * j - 1, 2 * k] if 2 * j - 1 < 2 * k else -cache[2 * k, 2 * j - 1]
          for k in range(1, half + 1)] for j in range(1, half + 1)]
    )
    with mp.workdps(precision + GUARD_DIGITS):
        return mpf(pfaffian(full)), mpf(float(np.linalg.det(reduced)))


# ---------------------------------------------------------------------------
# constant recognition
# ---------------------------------------------------------------------------


def recognize_pi_rational(
    x,
    t_max: int = RECOGNITION_T_MAX,
    q_max: int = RECOGNITION_Q_MAX,
    precision: int = DEFAULT_PRECISION,
) -> Optional[PiRationalForm]:
    """Smallest (t, q) with x 2^q / pi^t within 10^-(precision-15) of a positive integer."""
    with mp.workdps(precision + GUARD_DIGITS):
        x = mpf(x)
        if x <= 0:
            return None
        tol = mpf(10) ** (-(precision - 15))
        for t in range(t_max + 1):
            y = x / mpmath.pi**t
            for q in range(q_max + 1):
                scaled = y * mpf(2) ** q
                p = int(mpmath.nint(scaled))
                if p >= 1 and abs(scaled - p) <= tol:
                    return PiRationalForm(p, t, q)
    return None
