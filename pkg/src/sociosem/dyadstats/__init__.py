"""Dyadic matrices and permutation inference (QAP, MRQAP/DSP, VIF)."""

from .factor import CentralityFactor, FactorResult, centrality_factor
from .matrix import (
    DyadMatrix,
    absdiff_matrix,
    align,
    dyad_index,
    filter_group,
    interaction_matrix,
    match_matrix,
    to_similarity,
)
from .qap import QAPCorrelation, QapResult, pearson, qap_correlation
from .regression import (
    MRQAPRegressor,
    MrqapResult,
    adjusted_r2,
    hierarchical_models,
    models_table,
    mrqap_dsp,
    vif,
)

__all__ = [
    "CentralityFactor", "FactorResult", "centrality_factor",
    "DyadMatrix", "absdiff_matrix", "align", "dyad_index", "filter_group",
    "interaction_matrix", "match_matrix", "to_similarity",
    "QAPCorrelation", "QapResult", "pearson", "qap_correlation",
    "MRQAPRegressor", "MrqapResult", "adjusted_r2", "hierarchical_models",
    "models_table", "mrqap_dsp", "vif",
]
