"""Gaussian-copula correlation from raw samples via normal-scores ranks.

Only ranks enter the estimate, so any strictly increasing transform applied
to a column leaves the result bit-for-bit unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special, stats

from .errors import ContractViolation, DegenerateColumnError, DomainError
from .gaussian_info import CovarianceModel


@dataclass(frozen=True, eq=False)
class SamplePanel:
    """``d_samples x 2n`` observations; columns ``x1..xn`` then ``y1..yn``."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[1] % 2 or v.shape[1] == 0:
            raise ContractViolation(f"panel must be 2-D with an even, nonzero column count, got {v.shape}")
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[1] // 2

    @property
    def d_samples(self) -> int:
        return self.values.shape[0]

    def validate(self) -> "SamplePanel":
        """Check the estimation preconditions; returns ``self``."""
        v = self.values
        if v.shape[0] < 3:
            raise ContractViolation(f"need at least 3 observations, got {v.shape[0]}")
        if not np.all(np.isfinite(v)):
            raise ContractViolation("panel contains non-finite values")
        flat = np.flatnonzero(np.ptp(v, axis=0) == 0)
        if flat.size:
            raise DegenerateColumnError(f"constant column(s): {flat.tolist()}")
        return self


def column_ranks(panel: SamplePanel, k: int) -> np.ndarray:
    """Ranks ``1..d`` of column ``k``; ties receive their average rank."""
    if not 0 <= k < panel.values.shape[1]:
        raise ContractViolation(f"column {k} out of range")
    col = panel.values[:, k]
    if np.ptp(col) == 0:
        raise DegenerateColumnError(f"column {k} is constant")
    return stats.rankdata(col, method="average")


def inverse_normal_cdf(p):
    """Standard normal quantile for ``0 < p < 1``."""
    p = np.asarray(p, dtype=float)
    if np.any(~(p > 0) | ~(p < 1)):
        raise DomainError("inverse_normal_cdf needs probabilities strictly inside (0, 1)")
    out = special.ndtri(p)
    return float(out) if out.ndim == 0 else out


def rank_matrix(panel: SamplePanel) -> np.ndarray:
    panel.validate()
    return np.column_stack([column_ranks(panel, k) for k in range(panel.values.shape[1])])


def normal_scores_correlation(panel: SamplePanel) -> CovarianceModel:
    """Normal-scores rank correlation matrix of all ``2n`` columns.

    Entry ``(k, j)`` is ``sum_i q_ik q_ij / sum_i Phi^-1(i/(d+1))^2`` with
    ``q_ik = Phi^-1(r_ik / (d+1))``. The diagonal is set to exactly one.
    """
    ranks = rank_matrix(panel)
    d = ranks.shape[0]
    # canonical row order: the sum must not depend on how rows were shuffled
    ranks = ranks[np.lexsort(ranks.T[::-1])]
    scores = inverse_normal_cdf(ranks / (d + 1))
    denom = float(np.sum(inverse_normal_cdf(np.arange(1, d + 1) / (d + 1)) ** 2))
    corr = (scores.T @ scores) / denom
    corr = 0.5 * (corr + corr.T)
    np.clip(corr, -1.0, 1.0, out=corr)
    np.fill_diagonal(corr, 1.0)
    return CovarianceModel(corr)


def sample_correlation(panel: SamplePanel) -> CovarianceModel:
    """Pearson correlation of standardised columns (for strictly Gaussian data)."""
    v = panel.validate().values
    z = (v - v.mean(axis=0)) / v.std(axis=0)
    corr = (z.T @ z) / v.shape[0]
    corr = 0.5 * (corr + corr.T)
    np.fill_diagonal(corr, 1.0)
    return CovarianceModel(corr)


ESTIMATORS = {"copula": normal_scores_correlation, "gaussian": sample_correlation}


def estimate(panel: SamplePanel, estimator: str = "copula") -> CovarianceModel:
    try:
        fn = ESTIMATORS[estimator]
    except KeyError:
        raise ContractViolation(f"unknown estimator {estimator!r}; choose from {sorted(ESTIMATORS)}") from None
    return fn(panel)
