"""Survivable virtual network embedding on elastic optical networks with bandwidth squeezing."""

from .errors import BudgetExceeded, EonError, OverlapError, ParseError, ValidationError
from .exact import ExactBudget, ExactResult, bsr_monotonicity_probe, solve_exact
from .experiments import MetricsRow, compute_metrics, sweep
from .orchestrator import (
    Rejection,
    VLink,
    VnEmbedding,
    VnRequest,
    embed_vn,
    embedding_to_document,
    load_vn,
    random_vn,
    validate,
)
from .ordering import brute_force_order, build_aux_graph, get_vlink_order
from .reach import ReachTable, TransmissionConfig, best_config, load_reach_table, round_up_rate, shipped_table
from .spectrum import SpectrumState, commit, first_fit, rollback
from .topology import EonTopology, SPath, k_shortest_paths, load_topology, precompute_candidates
from .vlink_embed import EmbedParams, consolidate, enumerate_groups, find_embedding, group_path_rate, mdp

__version__ = "0.1.0"
