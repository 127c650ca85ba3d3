"""Permutation-symmetric N-qubit states: PPT rank analysis and extremal-state search."""

from .campaign import CampaignConfig, CampaignReport, run_campaign
from .classify import (
    Classification,
    EdgeVerdict,
    Verdict,
    classify_ranks,
    decompose_separable,
    edge_excluded,
    extremality_excluded,
    find_product_vector,
    schmidt_bound,
    subtract_product_vector,
)
from .extremal import SearchOptions, SearchTrajectory, find_direction, line_search_step, run_to_extremal
from .reports import classify_file, oracle_check, reproduce_rank_table
from .spectra import RankProfile, is_ppt, max_rank_profile, rank_profile, spectral_summary
from .statefile import load_state, save_state
from .symcore import (
    InvalidInputError,
    ProductVector,
    SymmetricState,
    compress_half,
    compression_isometry,
    partial_transpose_view,
    product_state_coords,
)

__all__ = [
    "CampaignConfig",
    "CampaignReport",
    "Classification",
    "EdgeVerdict",
    "InvalidInputError",
    "ProductVector",
    "RankProfile",
    "SearchOptions",
    "SearchTrajectory",
    "SymmetricState",
    "Verdict",
    "classify_file",
    "classify_ranks",
    "compress_half",
    "compression_isometry",
    "decompose_separable",
    "edge_excluded",
    "extremality_excluded",
    "find_direction",
    "find_product_vector",
    "is_ppt",
    "line_search_step",
    "load_state",
    "max_rank_profile",
    "oracle_check",
    "partial_transpose_view",
    "product_state_coords",
    "rank_profile",
    "reproduce_rank_table",
    "run_campaign",
    "run_to_extremal",
    "save_state",
    "schmidt_bound",
    "spectral_summary",
    "subtract_product_vector",
]
