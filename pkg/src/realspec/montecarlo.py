"""Monte Carlo estimate of the number of real eigenvalues of P_m.

Each trial draws m fresh standard Gaussian matrices, forms the product and
reads the eigenvalue structure off the real Schur form: 1x1 diagonal blocks
are real eigenvalues, standardized 2x2 blocks are complex-conjugate pairs.
Trials are grouped in fixed blocks, each with its own Philox stream keyed on
(seed, block), so histograms do not depend on how blocks are spread over
workers.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import mpmath
import numpy as np
from scipy import linalg

from .ensemble import EnsembleSpec, rng_stream

logger = logging.getLogger(__name__)

BLOCK_SIZE = 5_000
DEFAULT_SCHUR_TOL = 1e-9
SENSITIVITY_TOLS = (1e-7, 1e-11)
MAX_DISCARD_RATE = 1e-3
# eigenvalue magnitude above which a trial is redone in extended precision
EXTENDED_PRECISION_GUARD = 1e12


class DiscardRateError(RuntimeError):
    pass


@dataclass(frozen=True)
class MCConfig:
    spec: EnsembleSpec
    trials: int
    seed: int = 0
    workers: int = 1
    schur_tolerance: float = DEFAULT_SCHUR_TOL

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")


@dataclass
class MCResult:
    spec: EnsembleSpec
    counts: dict
    trials: int
    seed: int
    discarded: int = 0
    extended: int = 0
    # histogram re-classified at the alternative Schur tolerances
    sensitivity: dict = field(default_factory=dict)

    @property
    def p_hat(self) -> dict:
        return {k: c / self.trials for k, c in sorted(self.counts.items())}

    @property
    def stderr(self) -> dict:
        n = self.trials
        return {k: math.sqrt(p * (1 - p) / n) for k, p in self.p_hat.items()}

    @property
    def sensitivity_shift(self) -> float:
        """Largest move of any p_hat[k], in standard errors, across the
        alternative Schur tolerances."""
        worst = 0.0
        for hist in self.sensitivity.values():
            for k in set(hist) | set(self.counts):
                delta = abs(hist.get(k, 0) - self.counts.get(k, 0)) / self.trials
                se = max(self.standard_error(k), 1 / self.trials)
                worst = max(worst, delta / se)
        return worst

    def estimate(self, k: int) -> float:
        return self.counts.get(k, 0) / self.trials

    def standard_error(self, k: int) -> float:
        p = self.estimate(k)
        return math.sqrt(p * (1 - p) / self.trials)

    def confidence_interval(self, k: int, z: float = 1.96) -> tuple[float, float]:
        p, se = self.estimate(k), self.standard_error(k)
        return max(0.0, p - z * se), min(1.0, p + z * se)


def sample_product(spec: EnsembleSpec, rng: np.random.Generator) -> np.ndarray:
    """X_m ... X_1 with fresh i.i.d. N(0, 1) factors."""
    factors = rng.standard_normal((spec.m, spec.N, spec.N))
    return _product(factors)


def _product(factors: np.ndarray) -> np.ndarray:
    out = factors[0]
    for x in factors[1:]:
        out = x @ out
    return out


def _classify_schur(T: np.ndarray, tols) -> list[int]:
    n = T.shape[0]
    counts = [0] * len(tols)
    i = 0
    while i < n:
        if i + 1 < n and T[i + 1, i] != 0.0:
            a, b, c, d = T[i, i], T[i, i + 1], T[i + 1, i], T[i + 1, i + 1]
            disc = (a - d) ** 2 + 4 * b * c
            scale = a * a + b * b + c * c + d * d
            for q, tol in enumerate(tols):
                if disc >= -tol * scale:
                    counts[q] += 2
            i += 2
        else:
            for q in range(len(tols)):
                counts[q] += 1
            i += 1
    return counts


def count_real_eigenvalues(M: np.ndarray, tol: float = DEFAULT_SCHUR_TOL) -> int:
    """Real eigenvalues of ``M`` counted from its real Schur form.

    A 2x2 block counts as a real pair when its discriminant is at least
    ``-tol * ||block||_F^2``.  Raises ``numpy.linalg.LinAlgError`` when the
    Schur iteration fails.
    """
    M = np.asarray(M, dtype=float)
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    T, _ = linalg.schur(M, output="real")
    return _classify_schur(T, (tol,))[0]


def _count_extended(factors: np.ndarray, tols, dps: int = 40) -> list[int]:
    with mpmath.workdps(dps):
        prod = mpmath.matrix(factors[0].tolist())
        for x in factors[1:]:
            prod = mpmath.matrix(x.tolist()) * prod
        eigs = mpmath.eig(prod, left=False, right=False)
        out = []
        for tol in tols:
            k = 0
            for ev in eigs:
                if abs(mpmath.im(ev)) <= math.sqrt(tol) * abs(ev):
                    k += 1
            out.append(k)
    return out


def _run_block(args):
    N, m, seed, block, n_trials, tols = args
    rng = rng_stream(seed, block)
    factors = rng.standard_normal((n_trials, m, N, N))
    prods = factors[:, 0]
    for i in range(1, m):
        prods = factors[:, i] @ prods
    hist = [Counter() for _ in tols]
    discarded = 0
    extended = 0
    for t in range(n_trials):
        M = prods[t]
        try:
            if not np.all(np.isfinite(M)):
                raise np.linalg.LinAlgError("non-finite product")
            T, _ = linalg.schur(M, output="real")
            if np.abs(np.diag(T)).max() > EXTENDED_PRECISION_GUARD:
                counts = _count_extended(factors[t], tols)
                extended += 1
            else:
                counts = _classify_schur(T, tols)
        except (np.linalg.LinAlgError, ValueError) as exc:
            logger.warning("block %d trial %d discarded: %s", block, t, exc)
            discarded += 1
            continue
        for q, k in enumerate(counts):
            if (k - N) % 2:
                raise AssertionError(f"parity violated: k={k} for N={N}")
            hist[q][k] += 1
    return [dict(h) for h in hist], discarded, extended


def estimate_p(cfg: MCConfig) -> MCResult:
    """Histogram of real-eigenvalue counts over ``cfg.trials`` samples."""
    N, m = cfg.spec.N, cfg.spec.m
    tols = (cfg.schur_tolerance,) + SENSITIVITY_TOLS
    jobs = []
    done = 0
    block = 0
    while done < cfg.trials:
        n = min(BLOCK_SIZE, cfg.trials - done)
        jobs.append((N, m, cfg.seed, block, n, tols))
        done += n
        block += 1
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_run_block, jobs))
    else:
        results = [_run_block(job) for job in jobs]
    merged = [Counter() for _ in tols]
    discarded = extended = 0
    for hists, disc, ext in results:
        for q, h in enumerate(hists):
            merged[q].update(h)
        discarded += disc
        extended += ext
    if discarded > MAX_DISCARD_RATE * cfg.trials:
        raise DiscardRateError(f"{discarded} of {cfg.trials} trials discarded")
    accepted = cfg.trials - discarded
    if accepted == 0:
        raise DiscardRateError("every trial was discarded")
    result = MCResult(
        spec=cfg.spec,
        counts=dict(sorted(merged[0].items())),
        trials=accepted,
        seed=cfg.seed,
        discarded=discarded,
        extended=extended,
        sensitivity={tol: dict(sorted(merged[q + 1].items()))
                     for q, tol in enumerate(SENSITIVITY_TOLS)},
    )
    if result.sensitivity_shift >= 3:
        logger.warning("classification moves by %.1f sigma across Schur tolerances",
                       result.sensitivity_shift)
    return result
