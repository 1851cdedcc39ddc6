from collections import Counter

import numpy as np
import pytest

from causalcomp.copula import estimate
from causalcomp.errors import ContractViolation
from causalcomp.gaussian_info import CovarianceModel
from causalcomp.solver import SolverConfig, calibrate_thresholds
from causalcomp.synth import LinkSpec, default_fixture, population_covariance, sample
from causalcomp.tasks import BipartiteCausalGraph, bipartite, graph_to_segmentation, segment, threshold_for

CFG = SolverConfig(kappa_max=2.0, epsilon=0.02)


class TestThresholdFor:
    def test_scalar(self):
        assert threshold_for(0.3, "eq") == 0.3

    def test_mapping(self):
        assert threshold_for({"out": 0.1, "arrow": 0.2}, "arrow") == 0.2

    def test_missing_family(self):
        with pytest.raises(ContractViolation, match="eq"):
            threshold_for({"out": 0.1}, "eq")

    def test_negative(self):
        with pytest.raises(ContractViolation):
            threshold_for(-0.1, "out")


class TestSegment:
    def test_block_diagonal_is_empty(self):
        seg = segment(CovarianceModel(np.eye(10)), CFG)
        assert seg.sets() == (frozenset(), frozenset(), frozenset())

    def test_population_single_link(self):
        cov = population_covariance(LinkSpec(n=6, markov_order=2, links_x_to_y=[(2, 4, 0.8)]))
        seg = segment(cov, CFG, threshold=1e-6)
        assert set(seg.x_out) == {2}
        # x_in and x_eq are not asserted empty: once X's past is compressed,
        # Y_4 carries information about X_2 and through the autoregression
        # about X_4 and later points

    def test_sampled_single_link_majority(self):
        spec = LinkSpec(n=6, markov_order=2, links_x_to_y=[(2, 4, 0.8)])
        thr = calibrate_thresholds(6, 500, ("out",), CFG, reps=20, seed=1)
        votes = Counter()
        seeds = range(9)
        for s in seeds:
            votes.update(set(segment(estimate(sample(spec, 500, seed=s)), CFG, threshold=thr["out"]).x_out))
        assert votes[2] > len(seeds) / 2
        assert all(votes[j] <= len(seeds) / 2 for j in votes if j != 2)

    def test_threshold_monotone(self, model_factory):
        cov = model_factory(6)
        sizes = []
        for t in (0.0, 0.05, 0.2, 1.0, 10.0):
            sizes.append(sum(len(s) for s in segment(cov, CFG, threshold=t).sets()))
        assert sizes == sorted(sizes, reverse=True)

    def test_scores_exceed_threshold(self, model_factory):
        seg = segment(model_factory(5), CFG, threshold=0.05)
        for members in (seg.x_out, seg.x_in, seg.x_eq):
            assert all(s > 0.05 for s in members.values())
            assert all(1 <= t <= 5 for t in members)

    def test_workers_agree(self, model_factory):
        cov = model_factory(5)
        assert segment(cov, CFG, 0.01, workers=3) == segment(cov, CFG, 0.01, workers=1)

    def test_records_configuration(self, model_factory):
        seg = segment(model_factory(4), CFG, threshold={"out": 0.1, "in": 0.2, "eq": 0.3})
        assert seg.threshold_used == {"out": 0.1, "in": 0.2, "eq": 0.3}
        assert set(seg.objective_totals) == set(seg.paths) == {"out", "in", "eq"}


class TestBipartite:
    def test_block_diagonal_is_empty(self):
        g = bipartite(CovarianceModel(np.eye(8)), CFG)
        assert g.arrows_x_to_y == g.arrows_y_to_x == g.coupling_edges == ()

    def test_single_arrow(self):
        cov = population_covariance(LinkSpec(n=4, markov_order=1, links_x_to_y=[(1, 3, 0.8)]))
        g = bipartite(cov, CFG, threshold=1e-6)
        assert g.arrow_set() == (frozenset({(1, 3)}), frozenset())
        assert g.coupling_edges == ()

    def test_single_coupling(self):
        cov = population_covariance(LinkSpec(n=4, markov_order=1, couplings=[(2, 0.8)]))
        g = bipartite(cov, CFG, threshold=1e-6)
        assert [e[0] for e in g.coupling_edges] == [2]
        assert g.arrow_set() == (frozenset(), frozenset())

    def test_exchange_symmetry(self, model_factory):
        cov = model_factory(4)
        a = bipartite(cov, CFG, threshold=0.02)
        b = bipartite(cov.swapped(), CFG, threshold=0.02)
        assert a.arrows_x_to_y == b.arrows_y_to_x
        assert a.arrows_y_to_x == b.arrows_x_to_y
        assert [(i, sx, sy) for i, sx, sy in a.coupling_edges] == [(i, sy, sx) for i, sx, sy in b.coupling_edges]

    def test_one_sided_couplings_superset(self, model_factory):
        cov = model_factory(4)
        both = {e[0] for e in bipartite(cov, CFG, threshold=0.02).coupling_edges}
        either = {e[0] for e in bipartite(cov, CFG, threshold=0.02, one_sided_couplings=True).coupling_edges}
        assert both <= either

    def test_workers_agree(self, model_factory):
        cov = model_factory(4)
        assert bipartite(cov, CFG, 0.01, workers=4) == bipartite(cov, CFG, 0.01)

    def test_marginalization_consistency(self):
        thr = calibrate_thresholds(12, 500, ("out", "in", "eq", "arrow"), SolverConfig(), reps=20, seed=0)
        cov = population_covariance(default_fixture())
        seg = segment(cov, threshold=thr)
        implied = graph_to_segmentation(bipartite(cov, threshold=thr))
        for direct, via_graph in zip(seg.sets(), implied.sets()):
            assert len(direct ^ via_graph) <= 1


class TestGraphModel:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"arrows_x_to_y": [(3, 2, 0.1)]},
            {"arrows_y_to_x": [(0, 2, 0.1)]},
            {"arrows_x_to_y": [(1, 2, 0.1), (1, 2, 0.3)]},
            {"coupling_edges": [(5, 0.1, 0.1)]},
            {"coupling_edges": [(2, 0.1, None), (2, None, 0.2)]},
        ],
    )
    def test_rejects(self, kwargs):
        with pytest.raises(ContractViolation):
            BipartiteCausalGraph(4, **kwargs)

    def test_sorted(self):
        g = BipartiteCausalGraph(4, arrows_x_to_y=[(2, 4, 0.1), (1, 3, 0.2)])
        assert g.arrows_x_to_y == ((1, 3, 0.2), (2, 4, 0.1))


class TestGraphToSegmentation:
    def test_empty(self):
        assert graph_to_segmentation(BipartiteCausalGraph(3)).sets() == (frozenset(),) * 3

    def test_max_score_per_node(self):
        g = BipartiteCausalGraph(
            5,
            arrows_x_to_y=[(1, 3, 0.2), (1, 4, 0.5), (2, 5, 0.1)],
            arrows_y_to_x=[(1, 4, 0.3), (2, 4, 0.7)],
            coupling_edges=[(3, None, 0.4), (5, 0.6, 0.2)],
        )
        seg = graph_to_segmentation(g)
        assert seg.x_out == {1: 0.5, 2: 0.1}
        assert seg.x_in == {4: 0.7}
        assert seg.x_eq == {3: 0.4, 5: 0.6}
