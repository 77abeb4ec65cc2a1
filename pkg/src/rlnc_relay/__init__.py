"""Decoding-probability analysis of RLNC over a single-relay erasure network.

Closed-form probabilities (rankprob, netcalc), a seedable Monte Carlo
simulator (simulator), brute-force enumeration oracles (exhaustive), and
a CLI (cli) that sweeps scenarios and emits CSV.
"""

from .gf import FieldSpec, field_for_q
from .fmatrix import GFMatrix, RankAccumulator, random_matrix, vstack
from .netcalc import (MulticastScenario, ReceptionState, RelayScenario,
                      binom_pmf, joint_reception_pmf, multinom_pmf,
                      p_multicast, p_multicast_lower_bound, p_ptp,
                      p_relay_active, p_relay_direct, p_relay_passive,
                      p_relay_total)
from .rankprob import (count_full_rank, count_rank_r, p_full_rank,
                       p_joint_full_rank, p_rank_r, p_stack_full_rank)
from .rng import RandomStream
from .simulator import (SimResult, TrialOutcome, run_multicast_sim,
                        run_multicast_trial, run_relay_sim, run_relay_trial)

__version__ = "0.1.0"

__all__ = [
    "FieldSpec", "field_for_q", "GFMatrix", "RankAccumulator",
    "random_matrix", "vstack", "MulticastScenario", "RelayScenario",
    "ReceptionState", "binom_pmf", "joint_reception_pmf", "multinom_pmf",
    "p_multicast", "p_multicast_lower_bound", "p_ptp", "p_relay_active",
    "p_relay_direct", "p_relay_passive", "p_relay_total",
    "count_full_rank", "count_rank_r", "p_full_rank", "p_joint_full_rank",
    "p_rank_r", "p_stack_full_rank", "RandomStream", "SimResult",
    "TrialOutcome", "run_multicast_sim", "run_multicast_trial",
    "run_relay_sim", "run_relay_trial",
]
