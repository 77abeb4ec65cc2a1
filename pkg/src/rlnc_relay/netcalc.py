"""Exact decoding probabilities for RLNC over erasure links.

Covers the point-to-point link, the two-destination multicast (with its
product lower bound), and the single-relay network in which the relay
re-encodes when it can decode (active mode) and otherwise retransmits
what it collected (passive mode). The three relay success events --
direct, relay-assisted active, relay-assisted passive -- are mutually
exclusive, so the overall probability is their sum; an "active only"
variant drops the passive term to model a relay that stays silent when
it cannot decode.

The relay expressions are quadruple sums over reception counts; they are
evaluated on dense numpy grids (the accumulations inherit numpy's
pairwise summation) against the probability tables of
:class:`~rlnc_relay.rankprob.RankCache`. Complexity is O(N_S^3 * N_R)
per scenario.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rankprob import get_cache


def _check_pep(name: str, p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"{name} must be a probability in [0, 1], got {p}")


def _check_q(q: int) -> None:
    if q < 2 or q > 256 or q & (q - 1):
        raise ValueError(f"q must be a power of two in [2, 256], got {q}")


@dataclass(frozen=True)
class RelayScenario:
    """One experiment point of the source/relay/destination network.

    K source packets are encoded into N_S transmissions from the source;
    an active relay sends N_R re-encoded packets. p_SD, p_SR, p_RD are
    the per-packet erasure probabilities of the three links.
    """

    K: int
    N_S: int
    N_R: int
    p_SD: float
    p_SR: float
    p_RD: float
    q: int = 2

    def __post_init__(self):
        if self.K < 1:
            raise ValueError(f"K must be at least 1, got {self.K}")
        if self.N_S < self.K:
            raise ValueError(
                f"the source must send at least K packets: N_S={self.N_S} < K={self.K}")
        if self.N_R < 0:
            raise ValueError(f"N_R must be non-negative, got {self.N_R}")
        for name in ("p_SD", "p_SR", "p_RD"):
            _check_pep(name, getattr(self, name))
        _check_q(self.q)


@dataclass(frozen=True)
class MulticastScenario:
    """One source multicasting N coded packets to two destinations."""

    K: int
    N: int
    p1: float
    p2: float
    q: int = 2

    def __post_init__(self):
        if self.K < 1:
            raise ValueError(f"K must be at least 1, got {self.K}")
        if self.N < self.K:
            raise ValueError(f"need N >= K, got N={self.N} < K={self.K}")
        _check_pep("p1", self.p1)
        _check_pep("p2", self.p2)
        _check_q(self.q)


@dataclass(frozen=True)
class ReceptionState:
    """Per-trial reception counts.

    M_R and M_D are the stage-1 packet counts at relay and destination,
    M_RD how many of those are common to both, and M_D_prime the packets
    that reached the destination from the relay in stage 2. In the
    multicast reading the triple (M_R, M_D, M_RD) is the pair of
    destination counts plus their overlap.
    """

    M_R: int
    M_D: int
    M_RD: int
    M_D_prime: int = 0

    def __post_init__(self):
        if min(self.M_R, self.M_D, self.M_RD, self.M_D_prime) < 0:
            raise ValueError("reception counts must be non-negative")
        if self.M_RD > min(self.M_R, self.M_D):
            raise ValueError(
                f"common count {self.M_RD} exceeds min(M_R, M_D)="
                f"{min(self.M_R, self.M_D)}")


# ---------------------------------------------------------------------------
# probability mass functions


def binom_pmf(M: int, N: int, p: float) -> float:
    """P(M of N packets survive a link with erasure probability p).

    Log-domain evaluation, stable up to N ~ 1024.
    """
    if not 0 <= M <= N:
        raise ValueError(f"need 0 <= M <= N, got M={M}, N={N}")
    _check_pep("p", p)
    if p == 0.0:
        return 1.0 if M == N else 0.0
    if p == 1.0:
        return 1.0 if M == 0 else 0.0
    lg = (math.lgamma(N + 1) - math.lgamma(M + 1) - math.lgamma(N - M + 1)
          + M * math.log1p(-p) + (N - M) * math.log(p))
    return math.exp(lg)


def multinomial_coefficient(x) -> int:
    """n! / (x_1! ... x_k!) for n = sum(x), exactly."""
    total = 0
    out = 1
    for xi in x:
        if xi < 0:
            raise ValueError("occurrence counts must be non-negative")
        total += xi
        out *= math.comb(total, xi)
    return out


def multinom_pmf(x, n: int, theta) -> float:
    """Probability of occurrence counts x over n trials with outcome
    probabilities theta. 0^0 counts as 1, so degenerate outcome
    probabilities are fine.
    """
    x = list(x)
    theta = list(theta)
    if len(x) != len(theta):
        raise ValueError("x and theta must have the same length")
    if sum(x) != n:
        raise ValueError(f"occurrence counts must sum to n={n}, got {sum(x)}")
    if any(t < 0 for t in theta):
        raise ValueError("outcome probabilities must be non-negative")
    if abs(sum(theta) - 1.0) > 1e-9:
        raise ValueError(f"outcome probabilities must sum to 1, got {sum(theta)}")
    out = float(multinomial_coefficient(x))
    for xi, ti in zip(x, theta):
        out *= ti ** xi
    return out


def joint_reception_pmf(M1: int, M2: int, M12: int, N: int,
                        p1: float, p2: float) -> float:
    """Joint PMF of two receivers' packet counts and their overlap after N
    multicast transmissions over independent erasure links.

    Grouped form of the four-outcome multinomial (both / only first /
    only second / neither receive).
    """
    if not (0 <= M12 <= min(M1, M2) and max(M1, M2) <= N
            and M1 + M2 - M12 <= N):
        raise ValueError(
            f"infeasible reception counts (M1={M1}, M2={M2}, M12={M12}) for N={N}")
    _check_pep("p1", p1)
    _check_pep("p2", p2)
    lcoef = (math.lgamma(N + 1) - math.lgamma(M12 + 1)
             - math.lgamma(M1 - M12 + 1) - math.lgamma(M2 - M12 + 1)
             - math.lgamma(N - M1 - M2 + M12 + 1))
    out = math.exp(lcoef)
    for M, p in ((M1, p1), (M2, p2)):
        if p == 0.0:
            if M != N:
                return 0.0
        elif p == 1.0:
            if M != 0:
                return 0.0
        else:
            out *= math.exp(M * math.log1p(-p) + (N - M) * math.log(p))
    return out


def _log_factorials(n: int) -> np.ndarray:
    out = np.zeros(n + 1)
    out[1:] = np.cumsum(np.log(np.arange(1, n + 1, dtype=float)))
    return out


def _binom_weights(n: int, p: float) -> np.ndarray:
    """Vector of binom_pmf(d, n, p) for d = 0..n."""
    d = np.arange(n + 1, dtype=float)
    lf = _log_factorials(n)
    coef = np.exp(lf[n] - lf - lf[::-1])
    return coef * np.power(1.0 - p, d) * np.power(p, n - d)


def _bstar_grid(N: int, p1: float, p2: float) -> np.ndarray:
    """Dense joint reception PMF on axes (M1, M2, M12), zero where
    infeasible."""
    idx = np.arange(N + 1)
    M1 = idx[:, None, None]
    M2 = idx[None, :, None]
    M12 = idx[None, None, :]
    a = M1 - M12
    b = M2 - M12
    c = N - M1 - M2 + M12
    feasible = (a >= 0) & (b >= 0) & (c >= 0)
    lf = _log_factorials(N)
    lcoef = (lf[N] - lf[M12] - lf[np.clip(a, 0, N)]
             - lf[np.clip(b, 0, N)] - lf[np.clip(c, 0, N)])
    grid = np.where(feasible, np.exp(lcoef), 0.0)
    pw1 = np.power(1.0 - p1, idx.astype(float)) * np.power(p1, float(N) - idx)
    pw2 = np.power(1.0 - p2, idx.astype(float)) * np.power(p2, float(N) - idx)
    grid *= pw1[:, None, None]
    grid *= pw2[None, :, None]
    return grid


# ---------------------------------------------------------------------------
# link and network decoding probabilities


def p_ptp(N: int, K: int, p: float, q: int) -> float:
    """Decoding probability of a point-to-point link: K source packets,
    N coded transmissions, erasure probability p. Zero when N < K.
    """
    _check_pep("p", p)
    if N < K:
        return 0.0
    cache = get_cache(q, K).ensure(N)
    w = _binom_weights(N, p)
    return float(np.dot(w[K:], cache.full[K:N + 1, K]))


def p_multicast(s: MulticastScenario) -> float:
    """Probability that both multicast destinations can decode."""
    cache = get_cache(s.q, s.K).ensure(s.N, s.N)
    n1 = s.N + 1
    bgrid = _bstar_grid(s.N, s.p1, s.p2)
    joint = cache.joint[:n1, :n1, :n1]
    return float(np.sum(bgrid[s.K:, s.K:, :] * joint[s.K:, s.K:, :]))


def p_multicast_lower_bound(s: MulticastScenario) -> float:
    """Product of the two point-to-point probabilities; ignores the common
    receptions, hence a lower bound that loosens as links improve."""
    return p_ptp(s.N, s.K, s.p1, s.q) * p_ptp(s.N, s.K, s.p2, s.q)


def p_relay_direct(s: RelayScenario) -> float:
    """Destination decodes from the source's stage-1 transmissions alone."""
    return p_ptp(s.N_S, s.K, s.p_SD, s.q)


def p_relay_active(s: RelayScenario) -> float:
    """Destination fails stage 1, the relay decodes and its N_R
    re-encoded packets complete the decoding."""
    N, R, K = s.N_S, s.N_R, s.K
    if R == 0:
        return 0.0
    cache = get_cache(s.q, K).ensure(N, N + R)
    n1 = N + 1
    P3 = cache.joint
    bgrid = _bstar_grid(N, s.p_SR, s.p_SD)  # axes (M_R, M_D, M_RD)
    w = _binom_weights(R, s.p_RD)
    shifted = np.zeros((n1, n1, n1))
    for d in range(1, R + 1):
        shifted += w[d] * P3[:n1, d:d + n1, :n1]
    bracket = shifted - w[1:].sum() * P3[:n1, :n1, :n1]
    return float(np.sum(bgrid[K:] * bracket[K:]))


def p_relay_passive(s: RelayScenario) -> float:
    """Destination and relay both fail stage 1; the relay's verbatim
    retransmissions complete the decoding.

    Only the M_R - M_RD packets unique to the relay can help, so the
    inner sum runs over how many of those arrive; the bracket removes
    the outcomes in which the destination could already decode or the
    relay's matrix was full rank.
    """
    N, K = s.N_S, s.K
    cache = get_cache(s.q, K).ensure(N, 2 * N)
    n1 = N + 1
    P3 = cache.joint
    pf = cache.full[:, K]
    bgrid = _bstar_grid(N, s.p_SR, s.p_SD)  # axes (M_R, M_D, M_RD)
    wp = np.zeros((n1, n1))
    for n in range(n1):
        wp[n, :n + 1] = _binom_weights(n, s.p_RD)
    idx = np.arange(n1)
    mrp = np.maximum(idx[:, None] - idx[None, :], 0)  # M_R' = M_R - M_RD
    accum = np.zeros((n1, n1, n1))
    for d in range(1, N + 1):
        L = n1 - d
        coef = wp[mrp[:, :L], d]  # zero wherever d > M_R'
        if not coef.any():
            continue
        contrib = (pf[d:d + n1] - pf[:n1])[None, :, None] \
            - P3[:n1, d:d + n1, d:d + L] + P3[:n1, :n1, :L]
        accum[:, :, :L] += coef[:, None, :] * contrib
    return float(np.sum(bgrid * accum))


def p_relay_total(s: RelayScenario, mode: str = "full") -> float:
    """Overall decoding probability of the relay network.

    mode "full" sums the direct, active and passive terms; "active_only"
    drops the passive term (relay silent when it cannot decode).
    """
    if mode not in ("full", "active_only"):
        raise ValueError(f"mode must be 'full' or 'active_only', got {mode!r}")
    total = p_relay_direct(s) + p_relay_active(s)
    if mode == "full":
        total += p_relay_passive(s)
    return total
