"""Rank statistics of uniformly random matrices over GF(q).

Probabilities are evaluated with the normalised product forms, never as a
ratio of the (astronomically large) matrix counts, so they stay finite in
double precision for any practical dimension; q^(-(m-r)(k-r)) is allowed
to underflow to zero. The exact big-integer counts exist alongside for
small-scale validation.

Conventions used throughout (the corner cases the network formulas rely
on): a matrix with k = 0 columns is full rank with probability 1; with
fewer rows than columns full rank is impossible; a 0 x k matrix has rank
0 with probability 1. The joint full-rank probability of two matrices
with shared rows evaluates to 0 whenever either matrix is too short,
which is the unique extension consistent with those conventions.
"""

from __future__ import annotations

import math

import numpy as np


def _check_dims(m: int, k: int) -> None:
    if m < 0 or k < 0:
        raise ValueError(f"matrix dimensions must be non-negative, got {(m, k)}")


def _check_q(q: int) -> None:
    if q < 2:
        raise ValueError(f"field size must be at least 2, got {q}")


def count_full_rank(m: int, k: int, q: int = 2) -> int:
    """Number of full-rank m x k matrices over GF(q): prod_i (q^m - q^i).

    Exact integer; 1 for k = 0 (empty product), 0 for m < k.
    """
    _check_dims(m, k)
    _check_q(q)
    out = 1
    for i in range(k):
        out *= q ** m - q ** i
        if out == 0:  # hits the i = m factor whenever m < k
            break
    return out


def count_rank_r(m: int, k: int, r: int, q: int = 2) -> int:
    """Number of m x k matrices over GF(q) with rank exactly r."""
    _check_dims(m, k)
    _check_q(q)
    if not 0 <= r <= min(m, k):
        raise ValueError(f"rank {r} out of range for a {m}x{k} matrix")
    num = count_full_rank(m, r, q) * count_full_rank(k, r, q)
    den = count_full_rank(r, r, q)
    quot, rem = divmod(num, den)
    assert rem == 0
    return quot


def p_full_rank(m: int, k: int, q: int) -> float:
    """Probability that a uniform m x k matrix over GF(q) has rank k."""
    _check_dims(m, k)
    _check_q(q)
    out = 1.0
    for i in range(k):
        out *= 1.0 - float(q) ** (i - m)
        if out == 0.0:
            return 0.0
    return out


def p_rank_r(m: int, k: int, r: int, q: int) -> float:
    """Probability that a uniform m x k matrix over GF(q) has rank exactly r."""
    _check_dims(m, k)
    _check_q(q)
    if not 0 <= r <= min(m, k):
        raise ValueError(f"rank {r} out of range for a {m}x{k} matrix")
    out = float(q) ** (-(m - r) * (k - r))
    for i in range(r):
        out *= (1.0 - float(q) ** (i - m)) * (1.0 - float(q) ** (i - k))
        out /= 1.0 - float(q) ** (i - r)
    return out


def p_stack_full_rank(a: int, b: int, k: int, q: int) -> float:
    """Probability that stacking independent a x k and b x k uniform
    matrices yields rank k.

    Marginalises over the rank i of the top block; the lower summation
    limit max(0, k-b) drops exactly the terms whose bottom-block factor
    is zero.
    """
    _check_dims(a, k)
    _check_dims(b, k)
    _check_q(q)
    total = 0.0
    for i in range(max(0, k - b), min(a, k) + 1):
        total += p_rank_r(a, k, i, q) * p_full_rank(b, k - i, q)
    return total


def p_joint_full_rank(m1: int, m2: int, m12: int, k: int, q: int) -> float:
    """Probability that two uniform matrices of m1 and m2 rows sharing m12
    rows are simultaneously of rank k.

    The summation limits make every included term nonzero; for m1 < k or
    m2 < k the range is empty and the result is 0, the zero extension the
    relay formulas rely on when reception counts are small.
    """
    _check_dims(m1, k)
    _check_dims(m2, k)
    _check_q(q)
    if not 0 <= m12 <= min(m1, m2):
        raise ValueError(
            f"shared row count {m12} out of range for row counts {(m1, m2)}")
    lo = max(0, k - m1 + m12, k - m2 + m12)
    hi = min(m12, k)
    total = 0.0
    for i in range(lo, hi + 1):
        total += (p_rank_r(m12, k, i, q)
                  * p_full_rank(m1 - m12, k - i, q)
                  * p_full_rank(m2 - m12, k - i, q))
    return total


class RankCache:
    """Dense probability tables for one (q, k), shared by the network sums.

    The relay formulas evaluate P(m, j) and the joint probability
    O(N^4) times per scenario, so everything is tabulated once:

    - ``full[m, j]``    = p_full_rank(m, j) for j <= k
    - ``rank_r[c, i]``  = p_rank_r(c, k, i)
    - ``joint[a, b, c]``= p_joint_full_rank(a, b, c, k)

    Build (or grow) the cache before any concurrent use; reads are then
    safe from any number of threads.
    """

    def __init__(self, q: int, k: int):
        _check_q(q)
        if k < 0:
            raise ValueError("k must be non-negative")
        self.q = q
        self.k = k
        self.m1_max = -1
        self.m2_max = -1
        self.full = np.zeros((0, k + 1))
        self.rank_r = np.zeros((0, k + 1))
        self.joint = np.zeros((0, 0, 0))

    def ensure(self, m1_max: int, m2_max: int | None = None) -> "RankCache":
        """Grow the tables to cover m1 <= m1_max and m2 <= m2_max."""
        if m2_max is None:
            m2_max = m1_max
        m2_max = max(m2_max, m1_max)
        if m1_max <= self.m1_max and m2_max <= self.m2_max:
            return self
        q, k = self.q, self.k
        # full[m, j] by cumulative product over the columns
        ms = np.arange(m2_max + 1)[:, None]
        factors = 1.0 - float(q) ** (np.arange(k, dtype=float)[None, :] - ms)
        full = np.ones((m2_max + 1, k + 1))
        # the i = m factor is exactly 0.0, so full[m, j] = 0 for all j > m
        full[:, 1:] = np.cumprod(factors, axis=1)
        rank_r = np.zeros((m1_max + 1, k + 1))
        for c in range(m1_max + 1):
            for i in range(min(c, k) + 1):
                rank_r[c, i] = p_rank_r(c, k, i, q)
        joint = np.zeros((m1_max + 1, m2_max + 1, m1_max + 1))
        cols_rev = full[:, ::-1]  # cols_rev[m, i] = full[m, k - i]
        for c in range(m1_max + 1):
            n_i = min(c, k) + 1
            ri = rank_r[c, :n_i]
            fa = cols_rev[: m1_max - c + 1, :n_i]
            fb = cols_rev[: m2_max - c + 1, :n_i]
            joint[c:, c:, c] = np.einsum("i,ai,bi->ab", ri, fa, fb)
        self.m1_max, self.m2_max = m1_max, m2_max
        self.full, self.rank_r, self.joint = full, rank_r, joint
        return self

    def p_full(self, m: int) -> float:
        return float(self.full[m, self.k])


_CACHES: dict[tuple[int, int], RankCache] = {}


def get_cache(q: int, k: int) -> RankCache:
    """Shared RankCache for a (field size, column count) pair."""
    key = (q, k)
    cache = _CACHES.get(key)
    if cache is None:
        cache = _CACHES.setdefault(key, RankCache(q, k))
    return cache
