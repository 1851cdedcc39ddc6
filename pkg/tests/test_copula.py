import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from causalcomp.copula import (
    SamplePanel,
    column_ranks,
    estimate,
    inverse_normal_cdf,
    normal_scores_correlation,
    sample_correlation,
)
from causalcomp.errors import ContractViolation, DegenerateColumnError, DomainError


def panel(*cols):
    return SamplePanel(np.column_stack(cols))


class TestRanks:
    @pytest.mark.parametrize(
        "col,expected",
        [([3.2, 1.1, 7.5], [2, 1, 3]), ([5, 5, 1], [2.5, 2.5, 1]), ([1, 2, 3, 4], [1, 2, 3, 4])],
    )
    def test_examples(self, col, expected):
        p = panel(col, np.arange(len(col), dtype=float))
        np.testing.assert_array_equal(column_ranks(p, 0), expected)

    def test_constant_column(self):
        with pytest.raises(DegenerateColumnError):
            column_ranks(panel([2.0, 2.0, 2.0], [1.0, 2.0, 3.0]), 0)

    def test_out_of_range(self):
        with pytest.raises(ContractViolation):
            column_ranks(panel([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]), 2)


class TestInverseNormal:
    def test_median(self):
        assert inverse_normal_cdf(0.5) == 0.0

    def test_table_value(self):
        # high-precision reference for the 97.5% quantile
        assert inverse_normal_cdf(0.975) == pytest.approx(1.959963984540054, abs=1e-12)

    def test_symmetry(self):
        p = np.linspace(0.01, 0.99, 99)
        np.testing.assert_allclose(inverse_normal_cdf(p), -inverse_normal_cdf(1 - p), atol=1e-12)

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.2, np.nan])
    def test_domain(self, p):
        with pytest.raises(DomainError):
            inverse_normal_cdf(p)


class TestPanel:
    @pytest.mark.parametrize("shape", [(5,), (5, 3), (5, 0)])
    def test_shape(self, shape):
        with pytest.raises(ContractViolation):
            SamplePanel(np.zeros(shape))

    def test_too_few_rows(self):
        with pytest.raises(ContractViolation):
            normal_scores_correlation(SamplePanel(np.arange(4.0).reshape(2, 2)))

    def test_non_finite(self):
        with pytest.raises(ContractViolation):
            normal_scores_correlation(panel([1.0, np.inf, 3.0], [1.0, 2.0, 3.0]))


class TestNormalScores:
    def test_identical_columns(self, rng):
        x = rng.standard_normal(50)
        with pytest.warns(RuntimeWarning):
            model = normal_scores_correlation(panel(x, x))
        assert model.repaired
        assert model.matrix[0, 1] == pytest.approx(1.0, abs=1e-12)

    def test_reversed_columns(self, rng):
        x = rng.standard_normal(51)
        with pytest.warns(RuntimeWarning):
            corr = normal_scores_correlation(panel(x, -x)).matrix
        assert corr[0, 1] == -1.0

    def test_consistent(self, rng):
        z = rng.multivariate_normal([0, 0], [[1, 0.6], [0.6, 1]], size=5000)
        corr = normal_scores_correlation(SamplePanel(z)).matrix
        assert corr[0, 1] == pytest.approx(0.6, abs=0.05)

    def test_unit_diagonal_and_symmetric(self, rng):
        corr = normal_scores_correlation(SamplePanel(rng.standard_normal((40, 6)))).matrix
        np.testing.assert_array_equal(np.diag(corr), 1.0)
        np.testing.assert_array_equal(corr, corr.T)

    def test_row_permutation_bit_identical(self, rng):
        v = rng.standard_normal((60, 8))
        a = normal_scores_correlation(SamplePanel(v)).matrix
        b = normal_scores_correlation(SamplePanel(v[rng.permutation(60)])).matrix
        np.testing.assert_array_equal(a, b)

    @pytest.mark.parametrize(
        "transform",
        [np.exp, lambda x: x**3 + x, lambda x: 2.5 * x - 7.0, np.arctan],
        ids=["exp", "cubic", "affine", "arctan"],
    )
    def test_monotone_invariance_bit_identical(self, rng, transform):
        v = rng.standard_normal((80, 6))
        a = normal_scores_correlation(SamplePanel(v)).matrix
        b = normal_scores_correlation(SamplePanel(transform(v))).matrix
        np.testing.assert_array_equal(a, b)

    @settings(max_examples=30, deadline=None)
    @given(arrays(np.float64, (12, 4), elements=st.floats(-1e3, 1e3, allow_nan=False)))
    def test_bounded_entries(self, values):
        p = SamplePanel(values)
        if np.any(np.ptp(values, axis=0) == 0):
            with pytest.raises(DegenerateColumnError):
                normal_scores_correlation(p)
            return
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            corr = normal_scores_correlation(p).matrix
        assert np.all(np.abs(corr) <= 1.0 + 1e-12)


class TestEstimators:
    def test_gaussian_estimator(self, rng):
        z = rng.multivariate_normal([0, 0], [[1, 0.3], [0.3, 1]], size=4000)
        assert sample_correlation(SamplePanel(z)).matrix[0, 1] == pytest.approx(0.3, abs=0.05)

    def test_dispatch(self, rng):
        p = SamplePanel(rng.standard_normal((20, 4)))
        np.testing.assert_array_equal(estimate(p).matrix, normal_scores_correlation(p).matrix)
        np.testing.assert_array_equal(estimate(p, "gaussian").matrix, sample_correlation(p).matrix)
        with pytest.raises(ContractViolation):
            estimate(p, "kendall")
