import mpmath
import numpy as np
import pytest
from mpmath import mpf

from realspec.ensemble import EnsembleSpec
from realspec.probability import (
    DeterminantSignError,
    PiRationalForm,
    build_matrix,
    matrix_shape,
    p_all_real_exact,
    p_all_real_ratio,
    p_all_real_single,
    pfaffian,
    pfaffian_check,
    ratio_leading_form,
    recognize_pi_rational,
)

from conftest import rel_err

P = 30

# p_{2,2} for m = 2..10, frozen from an independent Meijer-G evaluation
# (mpmath.meijerg) to 15 significant digits
P22 = {
    2: "0.785398163397448", 3: "0.835798720281210", 4: "0.871611862553971",
    5: "0.898259064545008", 6: "0.918625875257964", 7: "0.934469262079751",
    8: "0.946948431132752", 9: "0.956869418074627", 10: "0.964813503267599",
}


def test_matrix_shape():
    assert matrix_shape(4) == (2, 2)
    assert matrix_shape(5) == (3, 2)
    assert matrix_shape(3) == (2, 1)


@pytest.mark.parametrize("m", [2, 3, 5, 8])
def test_p22(m):
    res = p_all_real_exact(EnsembleSpec(2, m), P)
    assert abs(res.value - mpf(P22[m])) < mpf(10) ** -14
    assert res.error_estimate < mpf(10) ** -P * res.value


def test_p22_m2_is_pi_over_4():
    res = p_all_real_exact(EnsembleSpec(2, 2), P)
    assert res.recognized_form == PiRationalForm(1, 1, 2)
    assert str(res.recognized_form) == "π/2^2"


@pytest.mark.parametrize("N", [2, 3, 4, 5, 6])
def test_m1_matches_single_matrix_formula(N):
    res = p_all_real_exact(EnsembleSpec(N, 1), P)
    ref = p_all_real_single(N, P)
    assert rel_err(res.value, ref.value) < mpf(10) ** -P


def test_n1_is_one():
    res = p_all_real_exact(EnsembleSpec(1, 5), P)
    assert res.value == 1 and res.log_value == 0


def test_odd_matrix_has_nu_column():
    A = build_matrix(EnsembleSpec(3, 2), P)
    assert (A.rows, A.cols) == (2, 2)
    with mpmath.workdps(P + 10):
        assert rel_err(A[0, 1], mpmath.gamma(mpf(1) / 2) ** 2) < mpf(10) ** -P
        assert rel_err(A[1, 1], mpmath.gamma(mpf(3) / 2) ** 2) < mpf(10) ** -P


def test_even_matrix_entries_m2():
    A = build_matrix(EnsembleSpec(4, 2), P)
    with mpmath.workdps(P + 10):
        pi2 = mpmath.pi**2
        ref = [[pi2 / 4, 39 * pi2 / 2**7], [3 * pi2 / 2**7, 435 * pi2 / 2**13]]
        for j in range(2):
            for k in range(2):
                assert rel_err(A[j, k], ref[j][k]) < mpf(10) ** -P


def test_probability_increases_with_m():
    vals = [p_all_real_exact(EnsembleSpec(3, m), P).value for m in (1, 2, 3, 4)]
    assert all(a < b for a, b in zip(vals, vals[1:]))


def test_probability_decreases_with_n():
    vals = [p_all_real_exact(EnsembleSpec(N, 3), P).value for N in (2, 3, 4, 5)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_workers_give_identical_result():
    a = p_all_real_exact(EnsembleSpec(5, 3), P, workers=1)
    b = p_all_real_exact(EnsembleSpec(5, 3), P, workers=2)
    assert a.value == b.value


def test_ratio_ensemble():
    # Gamma((N+1)/2)^N / G(N+1): N = 2 gives pi/4, N = 3 gives 1/2
    with mpmath.workdps(P + 10):
        assert rel_err(p_all_real_ratio(2, P).value, mpmath.pi / 4) < mpf(10) ** -P
        assert rel_err(p_all_real_ratio(3, P).value, mpf(1) / 2) < mpf(10) ** -P
        # leading form N^(1/12) (e/4)^(N^2/4) exp(-zeta'(-1) - 1/12)
        n = 30
        assert abs(ratio_leading_form(n, P) / p_all_real_ratio(n, P).value - 1) < 1e-4


def test_single_closed_form_recognized():
    assert p_all_real_single(4).recognized_form == PiRationalForm(1, 0, 3)
    assert p_all_real_single(2).recognized_form is None


@pytest.mark.parametrize("p,t,q", [(1, 1, 2), (201, 2, 13), (3, 0, 5), (31625532537, 3, 47)])
def test_recognize_roundtrip(p, t, q):
    with mpmath.workdps(60):
        x = p * mpmath.pi**t / mpf(2) ** q
    assert recognize_pi_rational(x, precision=50) == PiRationalForm(p, t, q)


def test_recognize_rejects_generic_constant():
    with mpmath.workdps(60):
        assert recognize_pi_rational(mpmath.e, precision=50) is None
        assert recognize_pi_rational(mpf(-1), precision=50) is None


def test_pi_rational_value():
    with mpmath.workdps(40):
        assert rel_err(PiRationalForm(5, 1, 5).value(30), 5 * mpmath.pi / 32) < mpf(10) ** -30


def test_pfaffian_small():
    A = np.array([[0, 2.0], [-2.0, 0]])
    assert pfaffian(A) == 2.0
    rng = np.random.default_rng(3)
    B = rng.standard_normal((6, 6))
    B = B - B.T
    assert abs(pfaffian(B) ** 2 - np.linalg.det(B)) < 1e-10 * abs(np.linalg.det(B))
    assert pfaffian(np.zeros((3, 3))) == 0.0


@pytest.mark.parametrize("N,m", [(2, 1), (2, 2), (4, 1)])
def test_pfaffian_equals_reduced_determinant(N, m):
    pf, det = pfaffian_check(EnsembleSpec(N, m), P)
    assert abs(abs(pf) - abs(det)) < 1e-8 * abs(det)


def test_pfaffian_check_domain():
    with pytest.raises(ValueError):
        pfaffian_check(EnsembleSpec(3, 1), P)
    with pytest.raises(ValueError):
        pfaffian_check(EnsembleSpec(2, 3), P)


def test_determinant_sign_error_is_numerical():
    from realspec.precision import NumericalError

    assert issubclass(DeterminantSignError, NumericalError)


def test_ensemble_validation():
    with pytest.raises(ValueError):
        EnsembleSpec(0, 2)
    with pytest.raises(ValueError):
        EnsembleSpec(2, 1.5)
