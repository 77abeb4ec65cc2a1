from fractions import Fraction

import numpy as np
import pytest

from rlnc_relay import exhaustive
from rlnc_relay.rankprob import (RankCache, count_full_rank, count_rank_r,
                                 get_cache, p_full_rank, p_joint_full_rank,
                                 p_rank_r, p_stack_full_rank)


def frac_p_rank_r(m, k, r, q):
    """Rank-r probability evaluated in exact rational arithmetic."""
    out = Fraction(q) ** (-(m - r) * (k - r))
    for i in range(r):
        out *= (1 - Fraction(q) ** (i - m)) * (1 - Fraction(q) ** (i - k))
        out /= 1 - Fraction(q) ** (i - r)
    return out


# ---------------------------------------------------------------------------
# counts


def test_count_full_rank_frozen_values():
    assert count_full_rank(2, 2, 2) == 6    # 16 binary 2x2 matrices, 6 invertible
    assert count_full_rank(3, 2, 2) == 42   # of the 64 binary 3x2 matrices
    assert count_full_rank(5, 0, 2) == 1
    assert count_full_rank(1, 3, 2) == 0
    assert count_full_rank(2, 2, 4) == (16 - 1) * (16 - 4)


def test_count_full_rank_matches_enumeration():
    for m in range(5):
        for k in range(5):
            assert count_full_rank(m, k, 2) == exhaustive.count_full_rank(m, k)


def test_count_rank_r_frozen_values():
    assert count_rank_r(2, 2, 1, 2) == 9
    assert count_rank_r(2, 2, 2, 2) == 6
    assert count_rank_r(3, 3, 0, 2) == 1


def test_count_rank_r_matches_enumeration():
    for m in range(5):
        for k in range(5):
            counts = exhaustive.count_matrices_by_rank(m, k)
            for r, cnt in enumerate(counts):
                assert count_rank_r(m, k, r, 2) == cnt


def test_count_rank_r_sums_to_all_matrices():
    """Exact big-integer partition of q^(mk), m,k <= 6."""
    for q in (2, 256):
        for m in range(7):
            for k in range(7):
                total = sum(count_rank_r(m, k, r, q)
                            for r in range(min(m, k) + 1))
                assert total == q ** (m * k)


def test_count_rank_r_range_errors():
    with pytest.raises(ValueError):
        count_rank_r(2, 2, 3, 2)
    with pytest.raises(ValueError):
        count_rank_r(2, 2, -1, 2)


# ---------------------------------------------------------------------------
# probabilities


def test_p_full_rank_values():
    assert p_full_rank(2, 2, 2) == pytest.approx(0.375, abs=1e-15)
    assert p_full_rank(7, 0, 2) == 1.0
    assert p_full_rank(1, 1, 256) == pytest.approx(255 / 256, abs=1e-15)
    assert p_full_rank(3, 5, 2) == 0.0


def test_p_rank_r_values():
    assert p_rank_r(2, 2, 1, 2) == pytest.approx(0.5625, abs=1e-15)
    assert p_rank_r(2, 2, 2, 2) == pytest.approx(0.375, abs=1e-15)
    for m, k, q in [(3, 2, 2), (4, 4, 256)]:
        assert p_rank_r(m, k, 0, q) == pytest.approx(float(q) ** (-m * k), rel=1e-12)
    with pytest.raises(ValueError):
        p_rank_r(2, 2, 3, 2)


def test_p_rank_r_exact_counting_consistency():
    """p_rank_r * q^(mk) = count_rank_r as exact rationals, m,k <= 6, q=2."""
    for m in range(7):
        for k in range(7):
            for r in range(min(m, k) + 1):
                exact = frac_p_rank_r(m, k, r, 2) * Fraction(2) ** (m * k)
                assert exact == count_rank_r(m, k, r, 2)
                assert p_rank_r(m, k, r, 2) == pytest.approx(
                    float(frac_p_rank_r(m, k, r, 2)), rel=1e-12)


def test_rank_distribution_normalisation():
    """Sum over r equals 1 within 1e-12 for all m,k <= 64, q in {2, 256}."""
    for q in (2, 256):
        for m in range(65):
            for k in range(65):
                total = sum(p_rank_r(m, k, r, q) for r in range(min(m, k) + 1))
                assert abs(total - 1.0) <= 1e-12, (q, m, k)


def test_p_full_rank_monotone_in_m_and_q():
    for q in (2, 4, 256):
        for k in range(6):
            probs = [p_full_rank(m, k, q) for m in range(10)]
            assert all(a <= b + 1e-15 for a, b in zip(probs, probs[1:]))
    for m in range(6):
        for k in range(m + 1):
            by_q = [p_full_rank(m, k, q) for q in (2, 4, 16, 256)]
            assert all(a <= b + 1e-15 for a, b in zip(by_q, by_q[1:]))


# ---------------------------------------------------------------------------
# stacked and joint full rank


def test_stack_reduces_to_single_matrix():
    for b in range(5):
        for k in range(4):
            assert p_stack_full_rank(0, b, k, 2) == pytest.approx(
                p_full_rank(b, k, 2), abs=1e-15)


def test_stack_frozen_value():
    # two single-row GF(2) matrices: rank 1 unless both rows are zero
    assert p_stack_full_rank(1, 1, 1, 2) == pytest.approx(0.75, abs=1e-15)


def test_stack_matches_enumeration():
    """All a, b, k <= 3 against the 2^((a+b)k) enumeration, to 1e-12."""
    for a in range(4):
        for b in range(4):
            for k in range(4):
                exact = exhaustive.stack_full_rank_fraction(a, b, k)
                assert abs(p_stack_full_rank(a, b, k, 2) - float(exact)) <= 1e-12


def test_stack_impossible_when_too_few_rows():
    assert p_stack_full_rank(1, 1, 3, 2) == 0.0


def test_joint_independent_case_is_product():
    for m1 in range(1, 5):
        for m2 in range(1, 5):
            for k in range(1, 4):
                expect = p_full_rank(m1, k, 2) * p_full_rank(m2, k, 2)
                assert p_joint_full_rank(m1, m2, 0, k, 2) == pytest.approx(
                    expect, abs=1e-14)


def test_joint_identical_case_is_single_matrix():
    for m in range(1, 6):
        for k in range(1, 4):
            assert p_joint_full_rank(m, m, m, k, 2) == pytest.approx(
                p_full_rank(m, k, 2), abs=1e-14)


def test_joint_frozen_value():
    # one shared bit plus one private bit each: Pr[(s|a) and (s|b)] = 5/8
    assert p_joint_full_rank(2, 2, 1, 1, 2) == pytest.approx(0.625, abs=1e-15)


def test_joint_zero_below_k_rows():
    assert p_joint_full_rank(1, 5, 1, 2, 2) == 0.0
    assert p_joint_full_rank(5, 1, 0, 2, 2) == 0.0


def test_joint_matches_enumeration():
    """All m1, m2 <= 4, k <= 3, valid m12, against enumeration, to 1e-12."""
    for m1 in range(5):
        for m2 in range(5):
            for k in range(4):
                for m12 in range(min(m1, m2) + 1):
                    exact = exhaustive.joint_full_rank_fraction(m1, m2, m12, k)
                    got = p_joint_full_rank(m1, m2, m12, k, 2)
                    assert abs(got - float(exact)) <= 1e-12, (m1, m2, m12, k)


def test_joint_rejects_bad_shared_count():
    with pytest.raises(ValueError):
        p_joint_full_rank(2, 3, 3, 1, 2)


def test_summation_limits_are_tight():
    """Every term the stated limits include is strictly positive, and
    extending the lower limit to zero changes nothing."""
    for a, b, k, q in [(2, 3, 2, 2), (4, 2, 3, 256), (3, 3, 3, 4)]:
        lo = max(0, k - b)
        hi = min(a, k)
        terms = [p_rank_r(a, k, i, q) * p_full_rank(b, k - i, q)
                 for i in range(lo, hi + 1)]
        assert all(t > 0 for t in terms)
        extended = sum(p_rank_r(a, k, i, q) * p_full_rank(b, k - i, q)
                       for i in range(0, hi + 1))
        assert extended == pytest.approx(sum(terms), rel=1e-14)
    for m1, m2, m12, k, q in [(3, 3, 2, 2, 2), (4, 5, 3, 3, 256), (2, 2, 1, 1, 2)]:
        lo = max(0, k - m1 + m12, k - m2 + m12)
        hi = min(m12, k)
        terms = [p_rank_r(m12, k, i, q)
                 * p_full_rank(m1 - m12, k - i, q)
                 * p_full_rank(m2 - m12, k - i, q)
                 for i in range(lo, hi + 1)]
        assert all(t > 0 for t in terms)
        extended = sum(p_rank_r(m12, k, i, q)
                       * p_full_rank(m1 - m12, k - i, q)
                       * p_full_rank(m2 - m12, k - i, q)
                       for i in range(0, hi + 1))
        assert extended == pytest.approx(p_joint_full_rank(m1, m2, m12, k, q),
                                         rel=1e-14)


# ---------------------------------------------------------------------------
# cache


@pytest.mark.parametrize("q,k", [(2, 3), (4, 2), (256, 3)])
def test_cache_tables_match_scalar_functions(q, k):
    cache = RankCache(q, k).ensure(6, 9)
    for m in range(10):
        for j in range(k + 1):
            assert cache.full[m, j] == pytest.approx(p_full_rank(m, j, q), rel=1e-13)
    for c in range(7):
        for i in range(min(c, k) + 1):
            assert cache.rank_r[c, i] == pytest.approx(p_rank_r(c, k, i, q), rel=1e-13)
    for m1 in range(7):
        for m2 in range(10):
            for m12 in range(min(m1, m2) + 1):
                assert cache.joint[m1, m2, m12] == pytest.approx(
                    p_joint_full_rank(m1, m2, m12, k, q), rel=1e-12, abs=1e-300)


def test_cache_growth_preserves_values():
    cache = RankCache(2, 2)
    cache.ensure(3)
    before = cache.joint[2, 3, 1]
    cache.ensure(8, 12)
    assert cache.joint[2, 3, 1] == before
    assert cache.joint.shape == (9, 13, 9)
    assert get_cache(2, 2) is get_cache(2, 2)
