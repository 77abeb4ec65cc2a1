"""Arithmetic in the binary extension fields GF(2^w), 1 <= w <= 8.

Field elements are plain Python ints in ``[0, q)``; bit i of an element is
the coefficient of x^i in the polynomial basis. Addition is XOR.
Multiplication and inversion go through log/antilog tables built once at
construction over a multiplicative generator of the field.
"""

from __future__ import annotations

import numpy as np

# One irreducible polynomial per supported extension degree (bit w is the
# x^w term). Any other irreducible polynomial of the right degree may be
# passed explicitly; rank statistics do not depend on the choice.
DEFAULT_POLYS = {
    1: 0b11,          # x + 1
    2: 0b111,         # x^2 + x + 1
    3: 0b1011,        # x^3 + x + 1
    4: 0b10011,       # x^4 + x + 1
    5: 0b100101,      # x^5 + x^2 + 1
    6: 0b1000011,     # x^6 + x + 1
    7: 0b10000011,    # x^7 + x + 1
    8: 0x11B,         # x^8 + x^4 + x^3 + x + 1
}


def _gf2_polymod(a: int, b: int) -> int:
    """Remainder of a / b in GF(2)[x], both encoded as bit vectors."""
    db = b.bit_length() - 1
    while a.bit_length() - 1 >= db and a:
        a ^= b << (a.bit_length() - 1 - db)
    return a


def is_irreducible(poly: int, w: int) -> bool:
    """Exhaustive factor test: no divisor of degree 1..w//2 exists.

    Feasible for w <= 8 (at most 30 candidate divisors).
    """
    if poly >> w != 1:
        return False
    for d in range(1, w // 2 + 1):
        for cand in range(1 << d, 1 << (d + 1)):
            if _gf2_polymod(poly, cand) == 0:
                return False
    return True


class FieldSpec:
    """The field GF(2^w) with its arithmetic tables.

    Immutable after construction; all operations are pure and safe to use
    concurrently. The numpy tables ``exp_table`` (length 2(q-1), so a
    log-sum never needs a modulo), ``log_table`` and ``inv_table`` are
    exposed read-only for vectorised consumers.
    """

    __slots__ = ("w", "q", "reduction_poly", "generator",
                 "exp_table", "log_table", "inv_table")

    def __init__(self, w: int, reduction_poly: int | None = None):
        if not 1 <= w <= 8:
            raise ValueError(f"extension degree must be in 1..8, got {w}")
        if reduction_poly is None:
            reduction_poly = DEFAULT_POLYS[w]
        if reduction_poly.bit_length() - 1 != w:
            raise ValueError(
                f"reduction polynomial 0b{reduction_poly:b} does not have degree {w}")
        if not is_irreducible(reduction_poly, w):
            raise ValueError(
                f"reduction polynomial 0b{reduction_poly:b} is reducible over GF(2)")
        self.w = w
        self.q = 1 << w
        self.reduction_poly = reduction_poly
        self._build_tables()

    def _build_tables(self) -> None:
        q = self.q
        if q == 2:
            gen = 1
            exp = [1]
        else:
            for gen in range(2, q):
                exp = [1]
                x = 1
                for _ in range(q - 2):
                    x = self._poly_mul(x, gen)
                    exp.append(x)
                if len(set(exp)) == q - 1:
                    break
            else:  # cannot happen for an irreducible polynomial
                raise ValueError("no multiplicative generator found")
        self.generator = gen
        log = np.zeros(q, dtype=np.int16)
        for i, v in enumerate(exp):
            log[v] = i
        exp_np = np.array(exp + exp, dtype=np.uint8)
        exp_np.setflags(write=False)
        log.setflags(write=False)
        inv = np.zeros(q, dtype=np.uint8)
        for a in range(1, q):
            inv[a] = exp_np[(q - 1 - int(log[a])) % (q - 1)]
        inv.setflags(write=False)
        self.exp_table = exp_np
        self.log_table = log
        self.inv_table = inv

    def _poly_mul(self, a: int, b: int) -> int:
        """Naive shift-and-reduce product, the reference for the tables."""
        res = 0
        for i in range(self.w):
            if (b >> i) & 1:
                res ^= a << i
        for i in range(2 * self.w - 2, self.w - 1, -1):
            if (res >> i) & 1:
                res ^= self.reduction_poly << (i - self.w)
        return res

    def _check(self, a: int) -> None:
        if not 0 <= a < self.q:
            raise ValueError(f"{a} is not an element of GF({self.q})")

    def add(self, a: int, b: int) -> int:
        self._check(a)
        self._check(b)
        return a ^ b

    def mul(self, a: int, b: int) -> int:
        self._check(a)
        self._check(b)
        if a == 0 or b == 0:
            return 0
        return int(self.exp_table[int(self.log_table[a]) + int(self.log_table[b])])

    def inv(self, a: int) -> int:
        """Multiplicative inverse; zero has none."""
        self._check(a)
        if a == 0:
            raise ZeroDivisionError("0 has no multiplicative inverse")
        return int(self.inv_table[a])

    def scale_rows(self, rows: np.ndarray, scalars: np.ndarray) -> np.ndarray:
        """Elementwise GF product of uint8 ``rows`` with per-row nonzero ``scalars``.

        ``rows`` has shape (..., k), ``scalars`` shape (...); broadcast along
        the last axis. Scalars must be nonzero.
        """
        logs = self.log_table[rows].astype(np.int16)
        logs += self.log_table[scalars].astype(np.int16)[..., None]
        out = self.exp_table[logs]
        return np.where(rows == 0, np.uint8(0), out)

    def __eq__(self, other) -> bool:
        return (isinstance(other, FieldSpec)
                and self.w == other.w
                and self.reduction_poly == other.reduction_poly)

    def __hash__(self) -> int:
        return hash((self.w, self.reduction_poly))

    def __repr__(self) -> str:
        return f"FieldSpec(w={self.w}, q={self.q}, poly=0x{self.reduction_poly:X})"


_FIELDS: dict[tuple[int, int], FieldSpec] = {}


def field_for_q(q: int) -> FieldSpec:
    """Shared FieldSpec for a field size q = 2^w with the default polynomial."""
    w = q.bit_length() - 1
    if q != 1 << w or not 1 <= w <= 8:
        raise ValueError(f"field size must be 2^w with 1 <= w <= 8, got {q}")
    key = (w, DEFAULT_POLYS[w])
    spec = _FIELDS.get(key)
    if spec is None:
        spec = _FIELDS.setdefault(key, FieldSpec(w))
    return spec
