"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` (the lines are also written
straight to the terminal when output capture is on).
"""

import time

import mpmath
import pytest
from mpmath import mpf

from realspec.cli import load_golden
from realspec.ensemble import EnsembleSpec
from realspec.equilibrium import (
    density_normalization,
    equilibrium_density,
    equilibrium_energy,
    limit_ratio,
)
from realspec.mellin_barnes import alpha_entries, alpha_oracle_quadrature, alpha_prefactor
from realspec.montecarlo import MCConfig, estimate_p
from realspec.probability import (
    PiRationalForm,
    p_all_real_exact,
    p_all_real_ratio,
    pfaffian_check,
    ratio_leading_form,
    recognize_pi_rational,
)


@pytest.fixture
def report(capsys):
    def _report(n, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
        assert ok, detail

    return _report


def test_criterion_01_table1(report):
    golden = load_golden()["table1"]["values"]
    start = time.perf_counter()
    worst, misses = mpf(0), []
    for m, printed in sorted(golden.items()):
        value = p_all_real_exact(EnsembleSpec(2, int(m)), 60).value
        with mpmath.workdps(60):
            diff = abs(value - mpf(printed))
        worst = max(worst, diff)
        if diff > mpf(5e-11):
            misses.append(int(m))
    elapsed = time.perf_counter() - start
    ok = not misses and elapsed < 30
    report(1, ok, f"N=2 m=2..10 max |diff|={mpmath.nstr(worst, 3)} (tol 5e-11), "
                  f"rows over tol m={misses}, {elapsed:.1f}s (limit 30s)")


def test_criterion_02_m2_closed_forms(report):
    forms = {
        2: PiRationalForm(1, 1, 2),
        3: PiRationalForm(5, 1, 5),
        4: PiRationalForm(201, 2, 13),
        5: PiRationalForm(10013, 2, 20),
        6: PiRationalForm(64011585, 3, 36),
        7: PiRationalForm(31625532537, 3, 47),
    }
    P = 60
    start = time.perf_counter()
    worst, bad = mpf(0), []
    for N, ref in forms.items():
        value = p_all_real_exact(EnsembleSpec(N, 2), P).value
        with mpmath.workdps(P):
            rel = abs(value / ref.value(P) - 1)
        worst = max(worst, rel)
        if rel > mpf(10) ** -20 or recognize_pi_rational(value, precision=P) != ref:
            bad.append(N)
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 120
    report(2, ok, f"m=2 N=2..7 max rel={mpmath.nstr(worst, 3)} (tol 1e-20), "
                  f"failures N={bad}, {elapsed:.1f}s (limit 120s)")


def test_criterion_03_m2_matrix(report):
    rows = load_golden()["m2matrix"]["rows"]
    P = 40
    worst, bad = mpf(0), []
    for j, printed in enumerate(rows, start=1):
        values, _, _ = alpha_entries(2, j, (1, 2, 3), P)
        for k, cell in enumerate(printed, start=1):
            with mpmath.workdps(P + 10):
                ref = mpmath.pi**2 * cell["numerator"] / mpf(2) ** cell["two_power"]
                rel = abs(values[k - 1] / ref - 1)
            worst = max(worst, rel)
            if rel > mpf(10) ** -25:
                bad.append((j, k))
    report(3, not bad, f"m=2 N=6 matrix (conjectural) max rel={mpmath.nstr(worst, 3)} "
                       f"(tol 1e-25), cells over tol={bad}")


def test_criterion_04_single_matrix(report):
    P = 40
    worst = mpf(0)
    for N in range(2, 8):
        value = p_all_real_exact(EnsembleSpec(N, 1), P).value
        with mpmath.workdps(P + 10):
            worst = max(worst, abs(value / mpf(2) ** (-mpf(N * (N - 1)) / 4) - 1))
    ok = worst <= mpf(10) ** -20
    report(4, ok, f"m=1 N=2..7 vs 2^(-N(N-1)/4) max rel={mpmath.nstr(worst, 3)} (tol 1e-20)")


def test_criterion_05_barnes_leading_form(report):
    rels = {}
    for N, tol in ((10, 0.15), (20, 0.08)):
        value = p_all_real_ratio(N, 30).value
        with mpmath.workdps(40):
            rels[N] = (float(abs(ratio_leading_form(N, 30) / value - 1)), tol)
    ok = all(r <= tol for r, tol in rels.values())
    detail = ", ".join(f"N={N} rel={r:.2e} (tol {tol})" for N, (r, tol) in rels.items())
    report(5, ok, detail)


def test_criterion_06_monte_carlo(report):
    start = time.perf_counter()
    worst, bad = 0.0, []
    for N in (2, 3, 4, 5):
        for m in (1, 2, 3):
            spec = EnsembleSpec(N, m)
            # parity is asserted on every trial inside the sampler
            res = estimate_p(MCConfig(spec, 100_000, seed=N * 10 + m, workers=4))
            parity = all((k - N) % 2 == 0 for k in res.counts)
            exact = float(p_all_real_exact(spec, 30).value)
            z = abs(res.estimate(N) - exact) / res.standard_error(N)
            worst = max(worst, z)
            if z > 4 or not parity:
                bad.append((N, m))
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 300
    report(6, ok, f"N=2..5 x m=1..3, 1e5 trials, max |z|={worst:.2f} (tol 4), "
                  f"failures={bad}, {elapsed:.1f}s (limit 300s)")


def test_criterion_07_oracles(report):
    P = 30
    worst_entry = 0.0
    for m in (1, 2):
        for j in (1, 2, 3):
            values, _, _ = alpha_entries(m, j, (1, 2, 3), P)
            for k in (1, 2, 3):
                mb = float(alpha_prefactor(m, j, k, P) * values[k - 1])
                worst_entry = max(worst_entry, abs(alpha_oracle_quadrature(m, j, k) / mb - 1))
    worst_pf = 0.0
    for N in (2, 4):
        for m in (1, 2):
            pf, det = pfaffian_check(EnsembleSpec(N, m), P)
            worst_pf = max(worst_pf, float(abs(abs(pf) - abs(det)) / abs(det)))
    ok = worst_entry <= 1e-10 and worst_pf <= 1e-8
    report(7, ok, f"entries max rel={worst_entry:.2e} (tol 1e-10), "
                  f"Pfaffian vs reduced det max rel={worst_pf:.2e} (tol 1e-8)")


def test_criterion_08_equilibrium(report):
    worst_energy = mpf(0)
    worst_norm = mpf(0)
    for m in (1, 2, 3, 4):
        closed, quad = equilibrium_energy(m, 15)
        worst_energy = max(worst_energy, abs(closed - quad))
        worst_norm = max(worst_norm, abs(density_normalization(m, 15) - 1))
    worst_semi = mpf(0)
    with mpmath.workdps(30):
        for i in range(1, 200):
            x = mpf(-1) + mpf(i) / 100
            exact = 2 / mpmath.pi * mpmath.sqrt(1 - x * x)
            worst_semi = max(worst_semi, abs(equilibrium_density(1, x) - exact))
    ok = worst_energy <= 1e-6 and worst_norm <= 1e-6 and worst_semi <= 1e-8
    report(8, ok, f"energy max |closed-quad|={mpmath.nstr(worst_energy, 3)} (tol 1e-6), "
                  f"normalization max |1-norm|={mpmath.nstr(worst_norm, 3)} (tol 1e-6), "
                  f"semicircle max dev={mpmath.nstr(worst_semi, 3)} (tol 1e-8)")


def test_criterion_09_asymptotic_trend(report):
    P = 30
    scaled = []
    for N in range(2, 9):
        res = p_all_real_exact(EnsembleSpec(N, 2), P)
        scaled.append(res.log_value / N**2)
    with mpmath.workdps(P):
        limit = mpmath.log(mpmath.sqrt(mpmath.pi / 4))
    decreasing = all(a > b for a, b in zip(scaled, scaled[1:]))
    above = all(s > limit for s in scaled)
    ok = decreasing and above
    trend = ", ".join(mpmath.nstr(s, 5) for s in scaled)
    report(9, ok, f"log p(N,2)/N^2 for N=2..8: {trend}; limit {mpmath.nstr(limit, 5)}")


def test_criterion_10_large_m_limit(report):
    ms = (5, 10, 20, 40)
    r11 = [limit_ratio(m, 1, 1, 30) for m in ms]
    r21 = [limit_ratio(m, 2, 1, 30) for m in ms]
    toward_one = all(abs(1 - b) < abs(1 - a) for a, b in zip(r11, r11[1:]))
    toward_zero = all(abs(b) < abs(a) for a, b in zip(r21, r21[1:]))
    p3 = [p_all_real_exact(EnsembleSpec(3, m), 30).value for m in range(1, 7)]
    increasing = all(a < b for a, b in zip(p3, p3[1:]))
    exceeds = p3[-1] > mpf("0.9")
    ok = toward_one and toward_zero and increasing and exceeds
    fmt = lambda xs: ", ".join(mpmath.nstr(x, 4) for x in xs)  # noqa: E731
    report(10, ok, f"ratio(1,1) m=5..40: {fmt(r11)} toward 1={toward_one}; "
                   f"ratio(2,1): {fmt(r21)} toward 0={toward_zero}; "
                   f"p(3,m) m=1..6: {fmt(p3)} increasing={increasing}, "
                   f"p(3,6) > 0.9={exceeds}")
