"""Seedable Monte Carlo simulation of the two-stage relay protocol.

Stage 1: the source draws N_S uniform coding vectors; each transmission
independently reaches the relay (probability 1 - p_SR) and the
destination (1 - p_SD), and when both receive it they hold the *same*
vector, which is what correlates their matrices. If the destination's
matrix is already full rank the trial is a *direct* success. Stage 2:
a relay with a full-rank matrix re-encodes and sends N_R fresh uniform
vectors (*active* mode); otherwise it retransmits its stored packets
verbatim (*passive* mode). Stage-2 packets reach the destination with
probability 1 - p_RD, and the trial succeeds if the destination's
matrix reaches rank K.

Every trial owns a fixed, block-aligned budget of raw words addressed by
(seed, trial index) -- see :mod:`rlnc_relay.rng` -- so results are
bit-identical however trials are chunked or distributed. The batched
engines below replay exactly the words the single-trial reference path
consumes; only payload-free coding vectors are simulated, since decoding
succeeds precisely when the coding matrix has rank K.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fmatrix import RankAccumulator
from .gf import FieldSpec, field_for_q
from .netcalc import MulticastScenario, ReceptionState, RelayScenario
from .rng import (RandomStream, block_budget, uniform01, unpack_elements,
                  words_per_vector)

DIRECT, ACTIVE, PASSIVE = "direct", "active", "passive"
_MODE_NAMES = (DIRECT, ACTIVE, PASSIVE)


@dataclass(frozen=True)
class TrialOutcome:
    """Result of one simulated transmission round.

    ``mode`` records which path the trial took: direct when the
    destination decoded from stage 1 alone, otherwise active or passive
    according to the relay's rank. A failed trial still carries the mode
    of the stage-2 path it went through.
    """

    decoded: bool
    mode: str
    state: ReceptionState


@dataclass(frozen=True)
class SimResult:
    """Aggregated Monte Carlo estimate.

    ``estimate`` is successes/trials and ``ci_halfwidth`` the
    normal-approximation half-width z * sqrt(p(1-p)/n). The per-mode
    success counts always refer to the underlying trials, so a full-mode
    and an active-only result from the same seed agree on them; multicast
    runs have no modes and leave them at zero.
    """

    trials: int
    successes: int
    direct_successes: int
    active_successes: int
    passive_successes: int
    estimate: float
    ci_halfwidth: float
    seed: int
    z: float


def _ci_halfwidth(successes: int, trials: int, z: float) -> float:
    p = successes / trials
    return z * math.sqrt(p * (1.0 - p) / trials)


# ---------------------------------------------------------------------------
# per-trial word layout


@dataclass(frozen=True)
class _RelayLayout:
    v: int           # words per coding vector
    s1_vec: int      # offsets, in words from the trial base
    recv_r: int
    recv_d: int
    s2_vec: int
    s2_recv: int
    s2_recv_len: int
    budget: int


def _relay_layout(s: RelayScenario, field: FieldSpec) -> _RelayLayout:
    v = words_per_vector(field, s.K)
    s1_vec = 0
    recv_r = s.N_S * v
    recv_d = recv_r + s.N_S
    s2_vec = recv_d + s.N_S
    s2_recv = s2_vec + s.N_R * v
    s2_recv_len = max(s.N_R, s.N_S)
    return _RelayLayout(v, s1_vec, recv_r, recv_d, s2_vec, s2_recv,
                        s2_recv_len, block_budget(s2_recv + s2_recv_len))


def _multicast_budget(s: MulticastScenario, field: FieldSpec) -> int:
    v = words_per_vector(field, s.K)
    return block_budget(s.N * (v + 2))


def relay_trial_budget(s: RelayScenario) -> int:
    """Words of randomness one relay trial owns (block-aligned)."""
    return _relay_layout(s, field_for_q(s.q)).budget


def multicast_trial_budget(s: MulticastScenario) -> int:
    """Words of randomness one multicast trial owns (block-aligned)."""
    return _multicast_budget(s, field_for_q(s.q))


# ---------------------------------------------------------------------------
# reference single-trial path


def run_relay_trial(s: RelayScenario, rng: RandomStream) -> TrialOutcome:
    """Simulate one relay round, row by row, with the incremental-rank
    accumulator. The batched engines reproduce this trial for trial."""
    field = field_for_q(s.q)
    lay = _relay_layout(s, field)
    w = rng.words(lay.budget)
    vecs = unpack_elements(
        w[lay.s1_vec:lay.recv_r].reshape(s.N_S, lay.v), field, s.K)
    recv_r = uniform01(w[lay.recv_r:lay.recv_d]) < 1.0 - s.p_SR
    recv_d = uniform01(w[lay.recv_d:lay.s2_vec]) < 1.0 - s.p_SD
    acc_r = RankAccumulator(field, s.K)
    acc_d = RankAccumulator(field, s.K)
    for i in range(s.N_S):
        if recv_r[i]:
            acc_r.add_row(vecs[i])
        if recv_d[i]:
            acc_d.add_row(vecs[i])
    m_r = int(recv_r.sum())
    m_d = int(recv_d.sum())
    m_rd = int((recv_r & recv_d).sum())
    if acc_d.rank == s.K:
        return TrialOutcome(True, DIRECT, ReceptionState(m_r, m_d, m_rd, 0))
    s2_recv_words = w[lay.s2_recv:lay.s2_recv + lay.s2_recv_len]
    if acc_r.rank == s.K:
        mode = ACTIVE
        fresh = unpack_elements(
            w[lay.s2_vec:lay.s2_recv].reshape(s.N_R, lay.v), field, s.K)
        arrived = uniform01(s2_recv_words[:s.N_R]) < 1.0 - s.p_RD
        for j in range(s.N_R):
            if arrived[j]:
                acc_d.add_row(fresh[j])
    else:
        mode = PASSIVE
        arrived = recv_r & (uniform01(s2_recv_words[:s.N_S]) < 1.0 - s.p_RD)
        for j in range(s.N_S):
            if arrived[j]:
                acc_d.add_row(vecs[j])
    state = ReceptionState(m_r, m_d, m_rd, int(arrived.sum()))
    return TrialOutcome(acc_d.rank == s.K, mode, state)


def run_multicast_trial(s: MulticastScenario, rng: RandomStream) -> TrialOutcome:
    """One multicast round; decoded means both destinations reached rank K.

    The mode slot is not meaningful here and is reported as direct.
    """
    field = field_for_q(s.q)
    v = words_per_vector(field, s.K)
    w = rng.words(_multicast_budget(s, field))
    vecs = unpack_elements(w[:s.N * v].reshape(s.N, v), field, s.K)
    recv1 = uniform01(w[s.N * v:s.N * v + s.N]) < 1.0 - s.p1
    recv2 = uniform01(w[s.N * v + s.N:s.N * (v + 2)]) < 1.0 - s.p2
    acc1 = RankAccumulator(field, s.K)
    acc2 = RankAccumulator(field, s.K)
    for i in range(s.N):
        if recv1[i]:
            acc1.add_row(vecs[i])
        if recv2[i]:
            acc2.add_row(vecs[i])
    state = ReceptionState(int(recv1.sum()), int(recv2.sum()),
                           int((recv1 & recv2).sum()), 0)
    decoded = acc1.rank == s.K and acc2.rank == s.K
    return TrialOutcome(decoded, DIRECT, state)


# ---------------------------------------------------------------------------
# batched GF(2) engine: one uint64 bitmask row per trial


def _insert_row_bits(k: int, basis: np.ndarray, rank: np.ndarray,
                     row: np.ndarray) -> None:
    """Fold one row (bitmask per trial) into per-trial bases in place."""
    if not row.any():
        return
    one = np.uint64(1)
    zero = np.uint64(0)
    for b in range(k - 1, -1, -1):
        have = ((row >> np.uint64(b)) & one) != zero
        if not have.any():
            continue
        bv = basis[b]
        empty = bv == zero
        ins = have & empty
        if ins.any():
            basis[b] = np.where(ins, row, bv)
            rank += ins
        row = np.where(have, np.where(empty, zero, row ^ bv), row)
        if not row.any():
            return


def _eliminate_bits(k: int, rows: np.ndarray, masks: np.ndarray,
                    basis: np.ndarray, rank: np.ndarray,
                    compact_every: int = 8) -> None:
    """Insert rows[:, j] masked by masks[:, j], in order, into (basis, rank).

    Trials whose rank hits k are periodically compacted away; their basis
    cannot change further.
    """
    n, m = rows.shape
    sel = np.flatnonzero(rank < k)
    if sel.size == 0:
        return
    partial = sel.size < n
    b = basis[:, sel].copy() if partial else basis
    r = rank[sel].copy() if partial else rank
    rw = rows[sel] if partial else rows
    mk = masks[sel] if partial else masks
    for j in range(m):
        if j and j % compact_every == 0:
            keep = r < k
            if not keep.all():
                done = ~keep
                dsel = sel[done]
                basis[:, dsel] = b[:, done]
                rank[dsel] = r[done]
                sel = sel[keep]
                if sel.size == 0:
                    return
                b = b[:, keep]
                r = r[keep]
                rw = rw[keep]
                mk = mk[keep]
                partial = True
        row = np.where(mk[:, j], rw[:, j], np.uint64(0))
        _insert_row_bits(k, b, r, row)
    if partial:
        basis[:, sel] = b
        rank[sel] = r


# ---------------------------------------------------------------------------
# batched GF(q) engine: uint8 entry rows per trial


def _insert_row_bytes(field: FieldSpec, k: int, basis: np.ndarray,
                      present: np.ndarray, rank: np.ndarray,
                      row: np.ndarray) -> None:
    """Byte-vector analogue of _insert_row_bits; basis is (k, n, k)."""
    if not row.any():
        return
    inv = field.inv_table
    for p in range(k):
        c = row[:, p]
        has = c != 0
        if not has.any():
            continue
        pres = present[p]
        red = has & pres
        ins = has & ~pres
        if red.any():
            row[red] ^= field.scale_rows(basis[p][red], c[red])
        if ins.any():
            basis[p][ins] = field.scale_rows(row[ins], inv[c[ins]])
            present[p][ins] = True
            rank[ins] += 1
            row[ins] = 0


def _eliminate_bytes(field: FieldSpec, k: int, rows: np.ndarray,
                     masks: np.ndarray, basis: np.ndarray,
                     present: np.ndarray, rank: np.ndarray,
                     compact_every: int = 8) -> None:
    """Insert rows[:, j, :] masked by masks[:, j] into per-trial bases."""
    n, m, _ = rows.shape
    sel = np.flatnonzero(rank < k)
    if sel.size == 0:
        return
    partial = sel.size < n
    b = basis[:, sel].copy() if partial else basis
    pr = present[:, sel].copy() if partial else present
    r = rank[sel].copy() if partial else rank
    rw = rows[sel] if partial else rows
    mk = masks[sel] if partial else masks
    for j in range(m):
        if j and j % compact_every == 0:
            keep = r < k
            if not keep.all():
                done = ~keep
                dsel = sel[done]
                basis[:, dsel] = b[:, done]
                present[:, dsel] = pr[:, done]
                rank[dsel] = r[done]
                sel = sel[keep]
                if sel.size == 0:
                    return
                b = b[:, keep]
                pr = pr[:, keep]
                r = r[keep]
                rw = rw[keep]
                mk = mk[keep]
                partial = True
        row = np.where(mk[:, j, None], rw[:, j], np.uint8(0))
        _insert_row_bytes(field, k, b, pr, r, row)
    if partial:
        basis[:, sel] = b
        present[:, sel] = pr
        rank[sel] = r


class _BitState:
    """Per-trial elimination state over GF(2) bitmask rows."""

    def __init__(self, k: int, n: int):
        self.k = k
        self.basis = np.zeros((k, n), dtype=np.uint64)
        self.rank = np.zeros(n, dtype=np.int64)

    @staticmethod
    def pack_rows(field: FieldSpec, k: int, vec_words: np.ndarray) -> np.ndarray:
        # one word per vector; low k bits are the entries
        return vec_words[..., 0] & np.uint64((1 << k) - 1)

    def eliminate(self, rows, masks):
        _eliminate_bits(self.k, rows, masks, self.basis, self.rank)

    def take(self, idx) -> "_BitState":
        sub = _BitState.__new__(_BitState)
        sub.k = self.k
        sub.basis = self.basis[:, idx].copy()
        sub.rank = self.rank[idx].copy()
        return sub


class _ByteState:
    """Per-trial elimination state over GF(q) entry rows."""

    def __init__(self, field: FieldSpec, k: int, n: int):
        self.field = field
        self.k = k
        self.basis = np.zeros((k, n, k), dtype=np.uint8)
        self.present = np.zeros((k, n), dtype=bool)
        self.rank = np.zeros(n, dtype=np.int64)

    def eliminate(self, rows, masks):
        _eliminate_bytes(self.field, self.k, rows, masks,
                         self.basis, self.present, self.rank)

    def take(self, idx) -> "_ByteState":
        sub = _ByteState.__new__(_ByteState)
        sub.field = self.field
        sub.k = self.k
        sub.basis = self.basis[:, idx].copy()
        sub.present = self.present[:, idx].copy()
        sub.rank = self.rank[idx].copy()
        return sub


def _use_bit_engine(field: FieldSpec, k: int) -> bool:
    return field.q == 2 and k <= 64


def _chunk_words(seed: int, start: int, n: int, budget: int) -> np.ndarray:
    stream = RandomStream(seed, offset_words=start * budget,
                          budget_words=n * budget)
    return stream.words(n * budget).reshape(n, budget)


def _relay_chunk(s: RelayScenario, seed: int, start: int, n: int) -> dict:
    field = field_for_q(s.q)
    lay = _relay_layout(s, field)
    k = s.K
    w = _chunk_words(seed, start, n, lay.budget)
    vec_words = w[:, lay.s1_vec:lay.recv_r].reshape(n, s.N_S, lay.v)
    recv_r = uniform01(w[:, lay.recv_r:lay.recv_d]) < 1.0 - s.p_SR
    recv_d = uniform01(w[:, lay.recv_d:lay.s2_vec]) < 1.0 - s.p_SD
    m_r = recv_r.sum(axis=1).astype(np.int32)
    m_d = recv_d.sum(axis=1).astype(np.int32)
    m_rd = (recv_r & recv_d).sum(axis=1).astype(np.int32)

    bit = _use_bit_engine(field, k)
    if bit:
        rows = _BitState.pack_rows(field, k, vec_words)
        state_d = _BitState(k, n)
    else:
        rows = unpack_elements(vec_words, field, k)
        state_d = _ByteState(field, k, n)
    state_d.eliminate(rows, recv_d)
    direct = state_d.rank == k

    decoded = direct.copy()
    mode = np.zeros(n, dtype=np.uint8)  # 0 direct, 1 active, 2 passive
    m_dp = np.zeros(n, dtype=np.int32)

    idx2 = np.flatnonzero(~direct)
    if idx2.size:
        state_r = _BitState(k, idx2.size) if bit else _ByteState(field, k, idx2.size)
        state_r.eliminate(rows[idx2], recv_r[idx2])
        relay_full = state_r.rank == k

        s2u = uniform01(w[:, lay.s2_recv:lay.s2_recv + lay.s2_recv_len])

        ia = idx2[relay_full]
        mode[ia] = 1
        if ia.size and s.N_R:
            fresh_words = w[ia, lay.s2_vec:lay.s2_recv].reshape(
                ia.size, s.N_R, lay.v)
            if bit:
                fresh = _BitState.pack_rows(field, k, fresh_words)
            else:
                fresh = unpack_elements(fresh_words, field, k)
            arrived = s2u[ia, :s.N_R] < 1.0 - s.p_RD
            sub = state_d.take(ia)
            sub.eliminate(fresh, arrived)
            decoded[ia] = sub.rank == k
            m_dp[ia] = arrived.sum(axis=1)

        ip = idx2[~relay_full]
        mode[ip] = 2
        if ip.size:
            arrived = recv_r[ip] & (s2u[ip, :s.N_S] < 1.0 - s.p_RD)
            sub = state_d.take(ip)
            sub.eliminate(rows[ip], arrived)
            decoded[ip] = sub.rank == k
            m_dp[ip] = arrived.sum(axis=1)

    return {"decoded": decoded, "mode": mode,
            "m_r": m_r, "m_d": m_d, "m_rd": m_rd, "m_dp": m_dp}


def _multicast_chunk(s: MulticastScenario, seed: int, start: int, n: int) -> dict:
    field = field_for_q(s.q)
    v = words_per_vector(field, s.K)
    budget = _multicast_budget(s, field)
    k = s.K
    w = _chunk_words(seed, start, n, budget)
    vec_words = w[:, :s.N * v].reshape(n, s.N, v)
    recv1 = uniform01(w[:, s.N * v:s.N * v + s.N]) < 1.0 - s.p1
    recv2 = uniform01(w[:, s.N * v + s.N:s.N * (v + 2)]) < 1.0 - s.p2
    bit = _use_bit_engine(field, k)
    if bit:
        rows = _BitState.pack_rows(field, k, vec_words)
        st1, st2 = _BitState(k, n), _BitState(k, n)
    else:
        rows = unpack_elements(vec_words, field, k)
        st1, st2 = _ByteState(field, k, n), _ByteState(field, k, n)
    st1.eliminate(rows, recv1)
    st2.eliminate(rows, recv2)
    return {"decoded": (st1.rank == k) & (st2.rank == k),
            "m_r": recv1.sum(axis=1).astype(np.int32),
            "m_d": recv2.sum(axis=1).astype(np.int32),
            "m_rd": (recv1 & recv2).sum(axis=1).astype(np.int32)}


# ---------------------------------------------------------------------------
# drivers

_DEFAULT_CHUNK = 16384


def run_relay_sim(s: RelayScenario, trials: int, seed: int,
                  mode: str = "full", z: float = 3.0,
                  chunk_size: int = _DEFAULT_CHUNK) -> SimResult:
    """Monte Carlo estimate of the relay decoding probability.

    In "active_only" mode the relay stays silent when it cannot decode,
    so passive-path trials count as failures. Results for a fixed
    (seed, trials) do not depend on chunk_size.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if mode not in ("full", "active_only"):
        raise ValueError(f"mode must be 'full' or 'active_only', got {mode!r}")
    succ = np.zeros(3, dtype=np.int64)  # per mode
    for start in range(0, trials, chunk_size):
        n = min(chunk_size, trials - start)
        out = _relay_chunk(s, seed, start, n)
        succ += np.bincount(out["mode"][out["decoded"]], minlength=3)
    direct_s, active_s, passive_s = (int(c) for c in succ)
    successes = direct_s + active_s + (passive_s if mode == "full" else 0)
    return SimResult(trials, successes, direct_s, active_s, passive_s,
                     successes / trials, _ci_halfwidth(successes, trials, z),
                     seed, z)


def run_multicast_sim(s: MulticastScenario, trials: int, seed: int,
                      z: float = 3.0,
                      chunk_size: int = _DEFAULT_CHUNK) -> SimResult:
    """Monte Carlo estimate of the two-destination multicast probability."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    successes = 0
    for start in range(0, trials, chunk_size):
        n = min(chunk_size, trials - start)
        successes += int(_multicast_chunk(s, seed, start, n)["decoded"].sum())
    return SimResult(trials, successes, 0, 0, 0, successes / trials,
                     _ci_halfwidth(successes, trials, z), seed, z)


def relay_mode_estimates(s: RelayScenario, trials: int, seed: int,
                         chunk_size: int = _DEFAULT_CHUNK) -> dict[str, float]:
    """Empirical per-mode success frequencies (direct/active/passive)."""
    res = run_relay_sim(s, trials, seed, chunk_size=chunk_size)
    return {DIRECT: res.direct_successes / trials,
            ACTIVE: res.active_successes / trials,
            PASSIVE: res.passive_successes / trials}


def collect_reception_histogram(s: RelayScenario, trials: int, seed: int,
                                chunk_size: int = _DEFAULT_CHUNK
                                ) -> dict[tuple[int, int, int], int]:
    """Joint histogram of (M_R, M_D, M_RD) over stage-1 receptions."""
    field = field_for_q(s.q)
    lay = _relay_layout(s, field)
    side = s.N_S + 1
    counts = np.zeros(side ** 3, dtype=np.int64)
    for start in range(0, trials, chunk_size):
        n = min(chunk_size, trials - start)
        w = _chunk_words(seed, start, n, lay.budget)
        recv_r = uniform01(w[:, lay.recv_r:lay.recv_d]) < 1.0 - s.p_SR
        recv_d = uniform01(w[:, lay.recv_d:lay.s2_vec]) < 1.0 - s.p_SD
        m_r = recv_r.sum(axis=1)
        m_d = recv_d.sum(axis=1)
        m_rd = (recv_r & recv_d).sum(axis=1)
        codes = (m_r * side + m_d) * side + m_rd
        counts += np.bincount(codes, minlength=side ** 3)
    out = {}
    for code in np.flatnonzero(counts):
        m_rd = int(code) % side
        m_d = (int(code) // side) % side
        m_r = int(code) // (side * side)
        out[(m_r, m_d, m_rd)] = int(counts[code])
    return out
