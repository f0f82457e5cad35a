"""Iteration sequences: recursions vs closed forms, slicing, certificates."""

from fractions import Fraction

import math

import pytest

from memwave.errors import ConfigError, DomainError, UnsupportedError
from memwave.iteration import (
    IterationCase,
    case1_closed_form,
    case1_recursion,
    case2_closed_form,
    case2_recursion,
    divergence_certificate,
    index_thresholds,
    slicing_sequence,
    sum_formula,
)
from memwave.kernels import Constant, Exponential, RiemannLiouville

PQ_PAIRS = [(Fraction(2), Fraction(2)), (Fraction(2), Fraction(3)),
            (Fraction(3, 2), Fraction(4))]
DIMS = [1, 2, 3]


def test_case1_seeds():
    seq = case1_recursion(2, 3, 3, 1)
    t = seq.at(1)
    assert t.a == 1 and t.alpha == 0
    assert t.b == Fraction(3 - 1) * 2 / 2  # (n-1)p/2 with n=3, p=2
    assert t.beta == 5  # n + 2
    assert t.a_t == 0 and t.alpha_t == 1
    assert t.b_t == Fraction(3 - 1) * 3 / 2
    assert t.beta_t == 5


def test_case1_hand_unrolled():
    # oracle: recursion unrolled by hand
    p, q, n = Fraction(2), Fraction(3), Fraction(2)
    seq = case1_recursion(p, q, int(n), 3)
    assert seq.at(2).a == 1  # 1 + a~1 p with a~1 = 0
    assert seq.at(3).a == 1 + p * q  # a~2 = a1 q = q
    assert seq.at(3).beta == 3 + 3 * p + (n + 2) * p * q  # beta~2 = 3 + beta1 q


@pytest.mark.parametrize("p,q", PQ_PAIRS)
@pytest.mark.parametrize("n", DIMS)
def test_case1_closed_form_matches_recursion(p, q, n):
    seq = case1_recursion(p, q, n, 25)
    for j in range(1, 26):
        cf = case1_closed_form(p, q, n, j)
        rec = seq.at(j)
        if j % 2 == 1:
            for name in ("a", "a_t", "alpha", "alpha_t", "b", "b_t", "beta", "beta_t"):
                assert getattr(cf, name) == getattr(rec, name), (j, name)
        else:
            assert cf.beta == rec.beta and cf.beta_t == rec.beta_t, j


@pytest.mark.parametrize("p,q", PQ_PAIRS)
@pytest.mark.parametrize("n", DIMS)
def test_case2_closed_form_matches_recursion(p, q, n):
    seq = case2_recursion(p, q, n, 25)
    for j in range(1, 26):
        cf = case2_closed_form(p, q, n, j)
        rec = seq.at(j)
        if j % 2 == 1:
            for name in ("theta", "theta_t", "sigma", "sigma_t"):
                assert getattr(cf, name) == getattr(rec, name), (j, name)
        else:
            assert cf.sigma == rec.sigma and cf.sigma_t == rec.sigma_t, j


@pytest.mark.parametrize("p,q", PQ_PAIRS)
@pytest.mark.parametrize("n", DIMS)
def test_closed_forms_float_tolerance(p, q, n):
    # the acceptance-level 1e-10 relative agreement, for float consumers
    seq = case1_recursion(p, q, n, 25)
    for j in range(1, 26, 2):
        cf = case1_closed_form(p, q, n, j)
        assert float(cf.beta) == pytest.approx(float(seq.at(j).beta), rel=1e-10)


def test_case2_seeds():
    seq = case2_recursion(2, 2, 3, 1)
    t = seq.at(1)
    assert t.theta == Fraction(2)  # (n-1)p/2
    assert t.sigma == 4  # n + 1
    assert seq.L[0] == pytest.approx(2.0)  # ell_1 = 2


def test_case2_hand_unrolled():
    p, q, n = Fraction(2), Fraction(3), Fraction(2)
    seq = case2_recursion(p, q, int(n), 3)
    # sigma_3 = sigma~2 p + 2 with sigma~2 = (n+1)q + 2
    assert seq.at(3).sigma == ((n + 1) * q + 2) * p + 2
    assert seq.at(3).sigma == (n + 1) * p * q + 2 * (p + 1)
    # theta_3 = n(p-1) + theta~2 p, theta~2 = n(q-1) + theta1 q
    assert seq.at(3).theta == ((n - 1) * p + 2 * n) / 2 * p * q - n


@pytest.mark.parametrize("pq", [2, 6, 10])
def test_sum_formula_exact(pq):
    for j in range(3, 22, 2):
        direct = sum(
            Fraction(j - 2 * k) * Fraction(pq) ** k for k in range((j - 3) // 2 + 1)
        )
        assert sum_formula(j, pq) == direct


def test_sum_formula_examples():
    assert sum_formula(3, 6) == 3
    assert sum_formula(5, 2) == 11


def test_sum_formula_rejects_even():
    with pytest.raises(DomainError):
        sum_formula(4, 2)
    with pytest.raises(DomainError):
        sum_formula(1, 2)


def test_slicing_basics():
    ell, L, L_limit = slicing_sequence(4.0, 10)
    assert ell[0] == 2.0
    assert L[1] == pytest.approx(3.0)  # 2 * 1.5
    assert all(e > 1.0 for e in ell)
    assert all(b > a for a, b in zip(L, L[1:]))
    assert all(x < L_limit for x in L)


def test_slicing_tail_reached():
    ell, L, L_limit = slicing_sequence(6.0, 5)
    # the limit product saturates: adding the next factor changes nothing
    k = 200
    assert (1.0 + 6.0 ** (-(k - 1) / 2.0)) - 1.0 < 1e-14


def test_slicing_partial_product_consistency():
    ell, L, _ = slicing_sequence(6.0, 40)
    for j in range(len(L) - 1):
        assert abs(L[j + 1] / L[j] - ell[j + 1]) < 1e-15


@pytest.mark.parametrize("pq", [2.0, 6.0, 10.0])
def test_slicing_log_ratio_limit(pq):
    # ln ell_{k+1} / ln ell_k -> (pq)^{-1/2}; the increments fall below double
    # precision for large pq, so evaluate the logs with log1p
    ratio = math.log1p(pq ** (-60 / 2.0)) / math.log1p(pq ** (-59 / 2.0))
    assert ratio == pytest.approx(pq**-0.5, abs=1e-6)


def test_slicing_rejects_nonexpanding():
    with pytest.raises(ConfigError):
        slicing_sequence(1.0, 5)


@pytest.mark.parametrize("p,q", PQ_PAIRS)
@pytest.mark.parametrize("n", DIMS)
def test_beta_growth_envelope(p, q, n):
    # beta_j <= B0 (pq)^{j/2} with B0 one above the closed-form leading coefficient
    pq = p * q
    b0 = float(((n + 2) * (pq - 1) + 3 * (q + 1)) / ((pq - 1) * q)) + 1.0
    seq = case1_recursion(p, q, n, 25)
    for j in range(1, 26):
        assert float(seq.at(j).beta) <= b0 * float(pq) ** (j / 2.0)


def test_index_thresholds_defaults():
    th = index_thresholds(2.0, 2.0, 1.0, 3.0, (1.0, 0.5), (1.0, 0.5))
    assert th.j0 == 1 and th.j2 == 1  # placeholder logs vanish, clamped
    assert th.j1 == 1 and th.j1_t == 1  # positive derivative at zero
    assert th.j_start >= 1


def test_index_thresholds_exponential_example():
    # g'(0) = -1, t0 = 1, L = 3 -> j1 = ceil(2 log_{pq}(1 + 3/2)) = 2 at pq = 4
    th = index_thresholds(2.0, 2.0, 1.0, 3.0, Exponential(1.0), Exponential(1.0))
    want = math.ceil(2.0 * math.log(2.5) / math.log(4.0))
    assert th.j1 == want == 2


def test_index_thresholds_smallness_index():
    th = index_thresholds(2.0, 2.0, 1.0, 3.0, (1.0, 0.0), (1.0, 0.0))
    pq = 4.0
    assert 3.0 * 1.0 * pq ** (-th.j_m / 2.0) < 0.1
    assert 3.0 * 1.0 * pq ** (-(th.j_m - 1) / 2.0) >= 0.1


def test_index_thresholds_rejects_unknown_placeholder():
    with pytest.raises(ConfigError):
        index_thresholds(2.0, 2.0, 1.0, 3.0, (1.0, 0.0), (1.0, 0.0),
                         placeholders={"logZ": 1.0})


def test_certificate_case2_subcritical_exists():
    cert = divergence_certificate(IterationCase.CASE2, 2.0, 2.0, 3)
    assert cert is not None
    # exponent of t: -(n-1)p/2 + 1 + 2(p+1)/(pq-1) = -2 + 1 + 2 = 1
    assert cert.u_exponent == pytest.approx(1.0, rel=1e-6)


def test_certificate_case2_supercritical_none():
    assert divergence_certificate(IterationCase.CASE2, 4.0, 4.0, 3) is None


def test_certificate_case1_constant_kernels():
    cert = divergence_certificate(
        IterationCase.CASE1, 2.0, 2.0, 1, kernels=(Constant(1.0), Constant(1.0))
    )
    assert cert is not None
    assert cert.u_exponent > 0.0 and cert.v_exponent > 0.0


def test_certificate_rejects_wrong_kernel_class():
    with pytest.raises(UnsupportedError):
        divergence_certificate(
            IterationCase.CASE1, 2.0, 2.0, 1, kernels=(Exponential(1.0), Constant(1.0))
        )
    with pytest.raises(UnsupportedError):
        divergence_certificate(
            IterationCase.CASE2, 2.0, 2.0, 3, kernels=(RiemannLiouville(0.5),) * 2
        )


def test_recursion_rejects_bad_powers():
    with pytest.raises(ConfigError):
        case1_recursion(1.0, 2.0, 1, 5)
    with pytest.raises(ConfigError):
        case2_recursion(2.0, 2.0, 1, 0)
