"""Matrices of coding vectors over GF(q) and their rank.

A GFMatrix is a value: construction copies its data and the array is kept
read-only. Rank is computed by Gaussian elimination with exact field
arithmetic, so there are no pivot-magnitude concerns; the pivot is simply
the first nonzero entry in column order. A matrix with zero rows is valid
and has rank 0.
"""

from __future__ import annotations

import numpy as np

from .gf import FieldSpec
from .rng import RandomStream


class GFMatrix:
    __slots__ = ("field", "data")

    def __init__(self, field: FieldSpec, data):
        arr = np.array(data, dtype=np.uint8, copy=True)
        if arr.ndim != 2:
            if arr.size == 0:
                arr = arr.reshape(0, 0)
            else:
                raise ValueError("matrix data must be two-dimensional")
        if arr.size and arr.max() >= field.q:
            raise ValueError(f"entries must lie in [0, {field.q})")
        arr.setflags(write=False)
        self.field = field
        self.data = arr

    @classmethod
    def empty(cls, field: FieldSpec, cols: int) -> "GFMatrix":
        return cls(field, np.zeros((0, cols), dtype=np.uint8))

    @classmethod
    def identity(cls, field: FieldSpec, n: int) -> "GFMatrix":
        return cls(field, np.eye(n, dtype=np.uint8))

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    def rank(self) -> int:
        """Rank over GF(q), via elimination on a working copy."""
        acc = RankAccumulator(self.field, self.cols)
        for row in self.data:
            acc.add_row(row)
        return acc.rank

    def __eq__(self, other) -> bool:
        return (isinstance(other, GFMatrix) and self.field == other.field
                and self.data.shape == other.data.shape
                and bool(np.all(self.data == other.data)))

    def __hash__(self):
        return hash((self.field, self.data.tobytes(), self.data.shape))

    def __repr__(self) -> str:
        return f"GFMatrix(q={self.field.q}, {self.rows}x{self.cols})"


def vstack(a: GFMatrix, b: GFMatrix) -> GFMatrix:
    """Rows of a followed by rows of b."""
    if a.field != b.field:
        raise ValueError("cannot stack matrices over different fields")
    if a.cols != b.cols and a.rows and b.rows:
        raise ValueError(f"column mismatch: {a.cols} vs {b.cols}")
    if a.rows == 0:
        return b
    if b.rows == 0:
        return a
    return GFMatrix(a.field, np.vstack([a.data, b.data]))


def random_matrix(field: FieldSpec, rows: int, cols: int,
                  rng: RandomStream) -> GFMatrix:
    """Matrix with i.i.d. uniform entries; each row consumes whole words."""
    if rows < 0 or cols < 0:
        raise ValueError("matrix dimensions must be non-negative")
    data = np.zeros((rows, cols), dtype=np.uint8)
    for i in range(rows):
        data[i] = rng.field_elements(field, cols)
    return GFMatrix(field, data)


class RankAccumulator:
    """Row-by-row elimination state.

    Appending relayed rows never requires re-eliminating from scratch;
    the accumulated rank always equals the batch rank of the rows seen so
    far. Basis rows are normalised to a unit pivot and stored by pivot
    column.
    """

    __slots__ = ("field", "cols", "_basis", "rank")

    def __init__(self, field: FieldSpec, cols: int):
        self.field = field
        self.cols = cols
        self._basis: dict[int, np.ndarray] = {}
        self.rank = 0

    def add_row(self, row) -> bool:
        """Fold one row into the basis; True if the rank increased."""
        field = self.field
        r = np.array(row, dtype=np.uint8, copy=True)
        if r.shape != (self.cols,):
            raise ValueError(f"row must have {self.cols} entries")
        if r.size and r.max() >= field.q:
            raise ValueError(f"entries must lie in [0, {field.q})")
        for col in range(self.cols):
            c = int(r[col])
            if c == 0:
                continue
            pivot = self._basis.get(col)
            if pivot is None:
                if c != 1:
                    r = field.scale_rows(r, np.uint8(field.inv(c)))
                r.setflags(write=False)
                self._basis[col] = r
                self.rank += 1
                return True
            r = r ^ pivot if c == 1 else r ^ field.scale_rows(pivot, np.uint8(c))
        return False
