"""Bipartite entanglement and localization of one-particle states on the Harper chain."""

__version__ = "0.1.0"

from .state_core import (
    BlockSelection,
    EntanglementSummary,
    OneParticleState,
    average_block_entropy,
    average_block_entropy_enumerated,
    bipartite_from_pairwise,
    block_entropy,
    delta_state,
    entropy_distribution,
    entropy_from_participation,
    make_state,
    mean_square_concurrence,
    participation_ratio,
    random_state,
    site_entropy,
    state_linear_entropy,
    summarize,
    w_state,
)
