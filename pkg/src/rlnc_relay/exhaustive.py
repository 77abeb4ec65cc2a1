"""Brute-force enumeration of rank events for small binary matrices.

This module is the validation oracle for the closed-form rank formulas,
so it deliberately shares no code with the rest of the package: matrices
are bit-encoded integers and rank is recomputed here from first
principles. Counts are exact (Python integers / fractions).

A matrix with m rows of k bits is encoded as an m*k-bit integer, row 0 in
the least significant k bits. Enumeration size is capped: any request
needing more than 2^24 matrix cells' worth of states is refused.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

import numpy as np

BUDGET_BITS = 24


class BudgetError(ValueError):
    """Raised when an enumeration would exceed the state budget."""


def _check_budget(cells: int) -> None:
    if cells > BUDGET_BITS:
        raise BudgetError(
            f"enumeration over 2^{cells} states exceeds the 2^{BUDGET_BITS} budget")


def span_rank(rows: list[int]) -> int:
    """Rank via the size of the row span: |span| = 2^rank.

    Enumerates all 2^len(rows) XOR combinations; only sensible for a
    handful of rows.
    """
    span = {0}
    n = len(rows)
    for combo in range(1 << n):
        v = 0
        for i in range(n):
            if (combo >> i) & 1:
                v ^= rows[i]
        span.add(v)
    size = len(span)
    return size.bit_length() - 1


def _rank_bits(code: int, m: int, k: int) -> int:
    """GF(2) rank of the encoded matrix, by row-basis insertion."""
    mask = (1 << k) - 1
    basis = [0] * k
    rank = 0
    for i in range(m):
        row = (code >> (i * k)) & mask
        while row:
            top = row.bit_length() - 1
            if basis[top]:
                row ^= basis[top]
            else:
                basis[top] = row
                rank += 1
                break
    return rank


@lru_cache(maxsize=None)
def rank_table(m: int, k: int) -> np.ndarray:
    """Ranks of all 2^(m*k) binary m x k matrices, indexed by encoding."""
    _check_budget(m * k)
    out = np.empty(1 << (m * k), dtype=np.int8)
    for code in range(out.size):
        out[code] = _rank_bits(code, m, k)
    return out


def count_matrices_by_rank(m: int, k: int) -> list[int]:
    """counts[r] = number of binary m x k matrices of rank r."""
    tbl = rank_table(m, k)
    counts = np.bincount(tbl, minlength=min(m, k) + 1)
    return [int(c) for c in counts]


def count_full_rank(m: int, k: int) -> int:
    """Number of binary m x k matrices with rank k."""
    if k == 0:
        return 1
    if m < k:
        return 0
    return count_matrices_by_rank(m, k)[k]


def stack_full_rank_fraction(a: int, b: int, k: int) -> Fraction:
    """Exact probability that an (a+b) x k uniform binary stack has rank k.

    Enumerates all 2^((a+b)k) stacked matrices.
    """
    if k == 0:
        return Fraction(1)
    tbl = rank_table(a + b, k)
    hits = int(np.count_nonzero(tbl == k))
    return Fraction(hits, tbl.size)

def joint_full_rank_fraction(m1: int, m2: int, m12: int, k: int) -> Fraction:
    """Exact probability that two m1 x k and m2 x k uniform binary matrices
    sharing their first m12 rows are both of rank k.

    Enumerates every assignment of the m1 + m2 - m12 distinct rows; the sum
    over the two conditionally independent free blocks is factored per
    shared block, which leaves the count unchanged.
    """
    if not 0 <= m12 <= min(m1, m2):
        raise ValueError(f"need 0 <= m12 <= min(m1, m2), got {(m1, m2, m12)}")
    _check_budget((m1 + m2 - m12) * k)
    if k == 0:
        return Fraction(1)
    n_common = 1 << (m12 * k)
    # The shared block occupies a code's low m12*k bits, so reshaping to
    # (free, common) puts one shared-block assignment per column.
    full1 = rank_table(m1, k).reshape(-1, n_common)
    full2 = rank_table(m2, k).reshape(-1, n_common)
    count1 = np.count_nonzero(full1 == k, axis=0)
    count2 = np.count_nonzero(full2 == k, axis=0)
    total = sum(int(c1) * int(c2) for c1, c2 in zip(count1, count2))
    return Fraction(total, 1 << ((m1 + m2 - m12) * k))
