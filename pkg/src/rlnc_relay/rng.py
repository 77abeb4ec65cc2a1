"""Counter-based random streams with per-trial addressing.

Everything random in this package is derived from raw 64-bit words of a
Philox counter-based generator. Philox emits 4 words per counter block, so
a stream can be positioned at any word offset that is a multiple of 4
without generating the skipped words. Monte Carlo code assigns each trial
a fixed word budget (rounded up to a block), which makes trial t's words a
pure function of (seed, t) -- results cannot depend on chunking or on how
trials are distributed across workers.
"""

from __future__ import annotations

import numpy as np
from numpy.random import Philox

from .gf import FieldSpec

_BLOCK = 4  # uint64 words per Philox counter increment

# A uniform double in [0, 1) from the top 53 bits of a word.
_U53 = np.float64(2.0 ** -53)


def block_budget(words: int) -> int:
    """Round a word count up to a whole number of Philox blocks."""
    return (words + _BLOCK - 1) // _BLOCK * _BLOCK


def words_per_vector(field: FieldSpec, k: int) -> int:
    """64-bit words consumed by one length-k coding vector over the field.

    Entries are packed w bits each, little-endian within a word; no entry
    straddles a word boundary.
    """
    per_word = 64 // field.w
    return (k + per_word - 1) // per_word if k else 0


def unpack_elements(words: np.ndarray, field: FieldSpec, k: int) -> np.ndarray:
    """Decode coding-vector entries from packed words.

    ``words`` has shape (..., V) with V = words_per_vector(field, k);
    returns uint8 entries of shape (..., k).
    """
    per_word = 64 // field.w
    idx = np.arange(k)
    word_i = idx // per_word
    shift = ((idx % per_word) * field.w).astype(np.uint64)
    mask = np.uint64(field.q - 1)
    return ((words[..., word_i] >> shift) & mask).astype(np.uint8)


def uniform01(words: np.ndarray) -> np.ndarray:
    """Map raw words to uniform doubles in [0, 1)."""
    return (words >> np.uint64(11)).astype(np.float64) * _U53


class RandomStream:
    """Sequential view of the word stream for one seed, at a word offset.

    The offset must be block-aligned. An optional budget guards against a
    consumer overrunning its allotted words.
    """

    def __init__(self, seed: int, offset_words: int = 0, budget_words: int | None = None):
        if offset_words % _BLOCK:
            raise ValueError("stream offset must be a multiple of 4 words")
        self.seed = seed
        self._bitgen = Philox(key=seed)
        if offset_words:
            self._bitgen.advance(offset_words // _BLOCK)
        self._remaining = budget_words

    @classmethod
    def for_trial(cls, seed: int, trial_index: int, budget_words: int) -> "RandomStream":
        """Stream covering exactly trial ``trial_index``'s words."""
        budget = block_budget(budget_words)
        return cls(seed, offset_words=trial_index * budget, budget_words=budget)

    def words(self, n: int) -> np.ndarray:
        """Next n raw uint64 words."""
        if self._remaining is not None:
            if n > self._remaining:
                raise ValueError("random stream budget exhausted")
            self._remaining -= n
        return self._bitgen.random_raw(n)

    def uniform01(self, n: int) -> np.ndarray:
        return uniform01(self.words(n))

    def bernoulli(self, p: float, n: int) -> np.ndarray:
        """n independent draws that are True with probability p."""
        return self.uniform01(n) < p

    def field_elements(self, field: FieldSpec, k: int) -> np.ndarray:
        """One uniform coding vector: k i.i.d. elements of the field."""
        v = words_per_vector(field, k)
        return unpack_elements(self.words(v), field, k)
