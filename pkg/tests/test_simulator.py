import math

import numpy as np
import pytest
from scipy.stats import chi2

from rlnc_relay.netcalc import (MulticastScenario, RelayScenario,
                                joint_reception_pmf, p_relay_active,
                                p_relay_direct, p_relay_passive)
from rlnc_relay.rankprob import p_full_rank
from rlnc_relay.rng import RandomStream
from rlnc_relay.simulator import (ACTIVE, DIRECT, PASSIVE, _relay_chunk,
                                  collect_reception_histogram,
                                  multicast_trial_budget, relay_mode_estimates,
                                  relay_trial_budget, run_multicast_sim,
                                  run_multicast_trial, run_relay_sim,
                                  run_relay_trial)

_MODE_OF = {0: DIRECT, 1: ACTIVE, 2: PASSIVE}


def _reference_outcomes(s, seed, n):
    budget = relay_trial_budget(s)
    return [run_relay_trial(s, RandomStream.for_trial(seed, t, budget))
            for t in range(n)]


@pytest.mark.parametrize("s", [
    RelayScenario(2, 4, 3, 0.3, 0.1, 0.2, 2),
    RelayScenario(3, 5, 4, 0.5, 0.3, 0.4, 256),
    RelayScenario(2, 3, 2, 0.4, 0.6, 0.3, 4),
    RelayScenario(1, 2, 2, 0.0, 0.5, 1.0, 2),
])
def test_batched_engine_reproduces_reference_trials(s):
    """The vectorised chunks replay the single-trial path trial for trial."""
    n = 256
    chunk = _relay_chunk(s, seed=1234, start=0, n=n)
    for t, out in enumerate(_reference_outcomes(s, 1234, n)):
        assert out.decoded == bool(chunk["decoded"][t])
        assert out.mode == _MODE_OF[int(chunk["mode"][t])]
        assert (out.state.M_R, out.state.M_D, out.state.M_RD,
                out.state.M_D_prime) == (int(chunk["m_r"][t]),
                                         int(chunk["m_d"][t]),
                                         int(chunk["m_rd"][t]),
                                         int(chunk["m_dp"][t]))


def test_chunk_start_offsets_are_consistent():
    s = RelayScenario(2, 4, 3, 0.3, 0.1, 0.2, 2)
    whole = _relay_chunk(s, seed=9, start=0, n=50)
    tail = _relay_chunk(s, seed=9, start=20, n=30)
    assert np.array_equal(whole["decoded"][20:], tail["decoded"])
    assert np.array_equal(whole["mode"][20:], tail["mode"])


def test_sim_deterministic_and_chunk_invariant():
    s = RelayScenario(3, 6, 6, 0.3, 0.2, 0.25, 2)
    a = run_relay_sim(s, 5000, seed=77)
    b = run_relay_sim(s, 5000, seed=77)
    c = run_relay_sim(s, 5000, seed=77, chunk_size=613)
    assert a == b == c
    d = run_relay_sim(s, 5000, seed=78)
    assert d != a


def test_trial_outcome_trivial_cases():
    # lossless links, square system: success iff the draw is full rank,
    # always classified as direct or active
    s = RelayScenario(2, 2, 2, 0.0, 0.0, 0.0, 2)
    for out in _reference_outcomes(s, 5, 50):
        assert out.state.M_R == out.state.M_D == out.state.M_RD == 2
        if out.mode == DIRECT:
            assert out.decoded
    # nothing ever reaches relay or destination in stage 1
    s = RelayScenario(1, 2, 2, 1.0, 1.0, 0.0, 2)
    for out in _reference_outcomes(s, 6, 30):
        assert not out.decoded
        assert out.mode == PASSIVE
        assert out.state == type(out.state)(0, 0, 0, 0)


def test_direct_mode_implies_decoded():
    s = RelayScenario(2, 5, 4, 0.4, 0.3, 0.3, 2)
    for out in _reference_outcomes(s, 11, 300):
        if out.mode == DIRECT:
            assert out.decoded
        assert out.state.M_RD <= min(out.state.M_R, out.state.M_D)


def test_sim_counts_are_consistent():
    s = RelayScenario(2, 4, 4, 0.4, 0.3, 0.3, 2)
    res = run_relay_sim(s, 4000, seed=3)
    assert res.successes == (res.direct_successes + res.active_successes
                             + res.passive_successes)
    assert res.estimate == res.successes / res.trials
    p = res.estimate
    assert res.ci_halfwidth == pytest.approx(
        res.z * math.sqrt(p * (1 - p) / res.trials), rel=1e-12)


def test_active_only_counts_passive_as_failure():
    s = RelayScenario(2, 4, 4, 0.4, 0.5, 0.3, 2)
    full = run_relay_sim(s, 20_000, seed=21, mode="full")
    ao = run_relay_sim(s, 20_000, seed=21, mode="active_only")
    assert ao.successes == full.direct_successes + full.active_successes
    assert ao.estimate <= full.estimate
    assert (ao.direct_successes, ao.active_successes) == \
        (full.direct_successes, full.active_successes)


def test_mode_distribution_matches_analytic_terms():
    """Per-mode frequencies vs the analytic decomposition, 3 sigma at 1e5."""
    s = RelayScenario(10, 20, 20, 0.3, 0.1, 0.2, 2)
    n = 100_000
    est = relay_mode_estimates(s, n, seed=880)
    ana = {DIRECT: p_relay_direct(s), ACTIVE: p_relay_active(s),
           PASSIVE: p_relay_passive(s)}
    for mode in (DIRECT, ACTIVE, PASSIVE):
        sigma = math.sqrt(max(ana[mode] * (1 - ana[mode]),
                              est[mode] * (1 - est[mode])) / n)
        assert abs(est[mode] - ana[mode]) <= 3 * sigma, mode


def test_reception_histogram_matches_reference_trials():
    s = RelayScenario(2, 5, 3, 0.35, 0.25, 0.2, 2)
    n = 400
    hist = collect_reception_histogram(s, n, seed=55)
    expected: dict = {}
    for out in _reference_outcomes(s, 55, n):
        key = (out.state.M_R, out.state.M_D, out.state.M_RD)
        expected[key] = expected.get(key, 0) + 1
    assert hist == expected


def test_reception_counts_follow_joint_pmf_chi2():
    """Chi-squared goodness of fit of (M_R, M_D, M_RD) against the joint
    reception PMF at alpha = 0.001, 1e5 trials."""
    s = RelayScenario(2, 5, 2, 0.4, 0.3, 0.5, 2)
    n = 100_000
    hist = collect_reception_histogram(s, n, seed=606)
    cells = []
    for m_r in range(s.N_S + 1):
        for m_d in range(s.N_S + 1):
            for m_rd in range(max(0, m_r + m_d - s.N_S), min(m_r, m_d) + 1):
                p = joint_reception_pmf(m_r, m_d, m_rd, s.N_S, s.p_SR, s.p_SD)
                cells.append((p, hist.get((m_r, m_d, m_rd), 0)))
    # pool cells with small expectation to keep the chi2 approximation valid
    main = [(p, o) for p, o in cells if p * n >= 5]
    rest_p = 1.0 - sum(p for p, _ in main)
    rest_o = n - sum(o for _, o in main)
    stat = sum((o - n * p) ** 2 / (n * p) for p, o in main)
    if rest_p * n > 0:
        stat += (rest_o - n * rest_p) ** 2 / (n * rest_p)
        dof = len(main)
    else:
        dof = len(main) - 1
    assert stat < chi2.ppf(0.999, dof)


def test_passive_duplicates_cannot_raise_rank():
    """Retransmitted rows the destination already holds never change its
    rank: stage-2 insertions in passive mode are a subset of stage-1 rows."""
    s = RelayScenario(2, 4, 4, 0.5, 0.6, 0.2, 2)
    seen_passive = 0
    for out in _reference_outcomes(s, 97, 400):
        if out.mode == PASSIVE:
            seen_passive += 1
            assert out.state.M_D_prime <= out.state.M_R
    assert seen_passive > 0


def test_multicast_sim_matches_full_rank_probability():
    s = MulticastScenario(3, 3, 0.0, 0.0, 2)
    n = 100_000
    res = run_multicast_sim(s, n, seed=14)
    p = p_full_rank(3, 3, 2)
    sigma = math.sqrt(p * (1 - p) / n)
    assert abs(res.estimate - p) <= 3 * sigma


def test_multicast_sim_dead_link():
    res = run_multicast_sim(MulticastScenario(2, 5, 1.0, 0.1, 2), 2000, seed=8)
    assert res.estimate == 0.0


def test_multicast_reference_matches_batched():
    s = MulticastScenario(2, 4, 0.3, 0.2, 4)
    budget = multicast_trial_budget(s)
    n = 300
    batched = run_multicast_sim(s, n, seed=4242)
    ref = sum(run_multicast_trial(s, RandomStream.for_trial(4242, t, budget)).decoded
              for t in range(n))
    assert ref == batched.successes


def test_sim_argument_validation():
    s = RelayScenario(2, 3, 3, 0.3, 0.1, 0.2, 2)
    with pytest.raises(ValueError):
        run_relay_sim(s, 0, seed=1)
    with pytest.raises(ValueError):
        run_relay_sim(s, 10, seed=1, mode="sometimes")


def test_random_stream_budget_guard():
    stream = RandomStream.for_trial(1, 5, 8)
    stream.words(8)
    with pytest.raises(ValueError, match="budget"):
        stream.words(1)


def test_random_stream_requires_aligned_offset():
    with pytest.raises(ValueError, match="multiple of 4"):
        RandomStream(1, offset_words=6)
