"""Finite boundary pairs: DtN families, Krein-type identities and spectral search."""
from .analytic import ChainPair, IntervalPair, chain_dtn, chain_provider, fd_oracle, interval_dtn, interval_provider
from .constructions import bounded_modification_dtn, dirichlet_couple_ntd, direct_sum, glue_neumann, robin
from .errors import BoundaryPairError, GridDensityWarning
from .numcore import WeightedSpace
from .pair_core import (
    FiniteBoundaryPair,
    GraphModel,
    classification_constants,
    dtn,
    graph_pair,
    krein_residual,
    make_pair,
    schur_dtn,
    solution_operator,
)
from .spectral import DtnProvider, SpectralHit, find_neumann_eigenvalues, matrix_provider

__all__ = [
    "BoundaryPairError",
    "ChainPair",
    "DtnProvider",
    "FiniteBoundaryPair",
    "GraphModel",
    "GridDensityWarning",
    "IntervalPair",
    "SpectralHit",
    "WeightedSpace",
    "bounded_modification_dtn",
    "chain_dtn",
    "chain_provider",
    "classification_constants",
    "direct_sum",
    "dirichlet_couple_ntd",
    "dtn",
    "fd_oracle",
    "find_neumann_eigenvalues",
    "glue_neumann",
    "graph_pair",
    "interval_dtn",
    "interval_provider",
    "krein_residual",
    "make_pair",
    "matrix_provider",
    "robin",
    "schur_dtn",
    "solution_operator",
]
