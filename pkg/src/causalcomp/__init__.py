"""Causal compression of paired time series.

Sparse noisy compressions of one series are chosen to maximise a directed
information objective against the other series; the coordinates that enter
the solution path give a causal segmentation and a bipartite causal graph.
"""

from . import _kernels
from .copula import SamplePanel, estimate, normal_scores_correlation, sample_correlation
from .errors import ContractViolation, DegenerateColumnError, DomainError, SingularityError
from .gaussian_info import (
    INCOMING,
    INSTANTANEOUS,
    OUTGOING,
    CovarianceModel,
    Direction,
    ObjectiveKind,
    delayed_directed_information,
    instantaneous_coupling,
    mi_decomposition,
)
from .solver import (
    SolutionPath,
    SolverConfig,
    SparsityWeights,
    calibrate_thresholds,
    information_scores,
    null_threshold,
    stagewise_solve,
)
from .synth import LinkSpec, default_fixture, population_covariance, sample
from .tasks import BipartiteCausalGraph, Segmentation, bipartite, graph_to_segmentation, segment

__version__ = "0.1.0"
BACKEND = _kernels.BACKEND

__all__ = [
    "BACKEND",
    "BipartiteCausalGraph",
    "ContractViolation",
    "CovarianceModel",
    "DegenerateColumnError",
    "Direction",
    "DomainError",
    "INCOMING",
    "INSTANTANEOUS",
    "LinkSpec",
    "OUTGOING",
    "ObjectiveKind",
    "SamplePanel",
    "Segmentation",
    "SingularityError",
    "SolutionPath",
    "SolverConfig",
    "SparsityWeights",
    "bipartite",
    "calibrate_thresholds",
    "default_fixture",
    "delayed_directed_information",
    "estimate",
    "graph_to_segmentation",
    "information_scores",
    "instantaneous_coupling",
    "mi_decomposition",
    "normal_scores_correlation",
    "null_threshold",
    "population_covariance",
    "sample",
    "sample_correlation",
    "segment",
    "stagewise_solve",
]
