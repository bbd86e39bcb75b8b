"""
Tests for graph edit distance and the blended similarity score.
"""
from typing import Iterator, Optional
from unittest.mock import patch

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from pydantic import ValidationError

from memograph.constants import NodeKind
from memograph.error_handler import EmptyGraph
from memograph.graph_core import ReasoningGraph
from memograph.similarity import (
    EditCosts,
    EditProblem,
    SimilarityConfig,
    approximate_ged,
    exact_ged,
    ged,
    relabel_cost,
    s_sem,
    s_struct,
    similarity,
    similarity_report,
    similarity_upper_bound,
)
from memograph.tests.values import (
    PROPERTY_SETTINGS,
    SMALL_DIM,
    SPEC,
    chain,
    graph_of,
    make_node,
    random_dag,
    unit,
    vector_node,
)

ORACLE_PAIRS = 500
ORACLE_MAX_NODES = 4
COSTS = EditCosts()


def partial_injections(n: int, m: int) -> Iterator[list[Optional[int]]]:
    """
    Every mapping of n source nodes to distinct target nodes or to deletion.
    """
    if n == 0:
        yield []
        return
    for rest in partial_injections(n - 1, m):
        yield rest + [None]
        for right in range(m):
            if right not in rest:
                yield rest + [right]


def brute_force_ged(g1: ReasoningGraph, g2: ReasoningGraph, costs: EditCosts) -> float:
    problem = EditProblem(g1, g2, costs)
    return min(
        problem.mapping_cost(mapping) for mapping in partial_injections(len(g1), len(g2))
    )


@st.composite
def small_graphs(draw, max_nodes: int = 5):
    seed = draw(st.integers(min_value=0, max_value=2**32 - 1))
    n_nodes = draw(st.integers(min_value=1, max_value=max_nodes))
    return random_dag(np.random.default_rng(seed), n_nodes)


class TestRelabelCost:
    def test_identical_nodes_are_free(self):
        """Test that the same kind, label and feature costs nothing"""
        node = make_node("a", "load")
        assert relabel_cost(node, make_node("b", "load"), COSTS) == 0.0

    def test_kind_change_costs_full_price(self):
        """Test that relabeling across kinds costs node_relabel"""
        first = make_node("a", "load", NodeKind.GENERIC)
        second = make_node("b", "load", NodeKind.TOOL_CALL)
        assert relabel_cost(first, second, EditCosts(node_relabel=0.7)) == 0.7

    def test_same_kind_scaled_by_dissimilarity(self):
        """Test that a same-kind relabel costs node_relabel times (1 - cosine)"""
        first, second = make_node("a", "load orders"), make_node("b", "load customers")
        cos = float(np.dot(first.vector, second.vector))
        assert relabel_cost(first, second, COSTS) == pytest.approx(1.0 - max(cos, 0.0))
        assert 0.0 < relabel_cost(first, second, COSTS) < 1.0

    def test_colliding_features_cost_full_price(self):
        """Test that equal features under unrelated labels are priced as a full relabel"""
        first = vector_node("a", unit(1), "plot sales")
        assert relabel_cost(first, vector_node("b", unit(1), "drop table"), COSTS) == 1.0
        assert relabel_cost(first, vector_node("c", unit(1), "Sales, plot"), COSTS) == 0.0

    def test_triangle_rule(self):
        """Test that relabel may not cost more than delete plus insert"""
        with pytest.raises(ValidationError):
            EditCosts(node_relabel=3.0)


class TestGed:
    def test_identity_is_zero(self, sample_diamond):
        """Test that a graph is at distance 0 from itself"""
        assert exact_ged(sample_diamond, sample_diamond, COSTS) == 0.0

    def test_against_empty_graph(self, sample_diamond):
        """Test that the distance to the empty graph deletes everything"""
        empty = ReasoningGraph(sample_diamond.dim)
        assert exact_ged(sample_diamond, empty, COSTS) == 4 + 4
        assert exact_ged(empty, sample_diamond, COSTS) == 4 + 4

    def test_extra_tail_node(self):
        """Test that appending one node and edge costs two unit edits"""
        short = chain(["load", "join"])
        long = chain(["load", "join", "plot"])
        assert exact_ged(short, long, COSTS) == pytest.approx(2.0)

    def test_ids_do_not_matter(self):
        """Test that renamed ids with equal content are at distance 0"""
        first = chain(["load", "join", "plot"], prefix="a")
        second = chain(["load", "join", "plot"], prefix="b")
        assert exact_ged(first, second, COSTS) == 0.0

    def test_exact_matches_brute_force(self):
        """Test branch and bound against full enumeration on small graphs"""
        rng = np.random.default_rng(2024)
        for _ in range(ORACLE_PAIRS):
            g1 = random_dag(rng, int(rng.integers(1, ORACLE_MAX_NODES + 1)))
            g2 = random_dag(rng, int(rng.integers(1, ORACLE_MAX_NODES + 1)))
            assert exact_ged(g1, g2, COSTS) == pytest.approx(
                brute_force_ged(g1, g2, COSTS), abs=1e-9
            )

    def test_asymmetric_prices(self):
        """Test the exact search under unequal insert and delete prices"""
        costs = EditCosts(node_insert=2.0, node_delete=0.5, edge_insert=1.5, edge_delete=0.25)
        rng = np.random.default_rng(7)
        for _ in range(50):
            g1 = random_dag(rng, int(rng.integers(1, ORACLE_MAX_NODES + 1)))
            g2 = random_dag(rng, int(rng.integers(1, ORACLE_MAX_NODES + 1)))
            assert exact_ged(g1, g2, costs) == pytest.approx(brute_force_ged(g1, g2, costs))

    def test_large_graphs_use_approximation(self):
        """Test that graphs above the exact limit are flagged approximate"""
        rng = np.random.default_rng(3)
        g1, g2 = random_dag(rng, 6), random_dag(rng, 6)
        result = ged(g1, g2, COSTS, exact_max_nodes=3)
        assert result.approximate
        assert result.distance == approximate_ged(g1, g2, COSTS)
        assert result.distance >= exact_ged(g1, g2, COSTS) - 1e-9

    @PROPERTY_SETTINGS
    @given(small_graphs(), small_graphs())
    def test_exact_is_symmetric(self, g1, g2):
        """Test that exact GED does not depend on argument order"""
        assert exact_ged(g1, g2, COSTS) == pytest.approx(exact_ged(g2, g1, COSTS))


class TestSimilarity:
    def test_identical_graphs_score_one(self, sample_chain, similarity_cfg):
        """Test that equal content scores exactly 1"""
        other = chain(["load sales table", "compute monthly totals", "plot trend"])
        assert similarity(sample_chain, other, similarity_cfg) == 1.0

    def test_alpha_extremes(self, sample_chain, similarity_cfg):
        """Test that alpha 1 and alpha 0 select the structural and semantic parts"""
        other = chain(["load sales table", "compute yearly totals"])
        structural = SimilarityConfig(alpha=1.0)
        semantic = SimilarityConfig(alpha=0.0)
        assert similarity(sample_chain, other, structural) == pytest.approx(
            s_struct(sample_chain, other, COSTS)
        )
        assert similarity(sample_chain, other, semantic) == pytest.approx(
            s_sem(sample_chain, other)
        )

    def test_single_node_relabel(self):
        """Test the structural score of two one-node graphs"""
        first, second = make_node("a", "load orders"), make_node("a", "load customers")
        expected = 1.0 - relabel_cost(first, second, COSTS) / 2.0
        assert s_struct(graph_of([first]), graph_of([second]), COSTS) == pytest.approx(expected)

    def test_report_components(self, sample_chain, sample_diamond, similarity_cfg):
        """Test that the report blends its own components"""
        report = similarity_report(sample_chain, sample_diamond, similarity_cfg)
        blended = 0.5 * report.structural + 0.5 * report.semantic
        assert report.score == pytest.approx(blended)
        assert not report.approximate

    def test_asymmetric_prices_not_shared_in_cache(self):
        """Test that both argument orders are scored on their own under asymmetric prices"""
        costs = EditCosts(node_insert=2.0, node_delete=0.5, edge_insert=1.5, edge_delete=0.25)
        cfg = SimilarityConfig(edit_costs=costs)
        small, large = chain(["load"]), chain(["load", "join", "plot"])
        forward = similarity_report(small, large, cfg)
        backward = similarity_report(large, small, cfg)
        assert forward.structural == pytest.approx(s_struct(small, large, costs))
        assert backward.structural == pytest.approx(s_struct(large, small, costs))
        assert backward.structural > forward.structural

    def test_symmetric_prices_share_cache(self, sample_chain, sample_diamond, similarity_cfg):
        """Test that symmetric prices reuse one score for both argument orders"""
        forward = similarity_report(sample_chain, sample_diamond, similarity_cfg)
        with patch("memograph.similarity.scores.structural_score") as scorer:
            backward = similarity_report(sample_diamond, sample_chain, similarity_cfg)
        scorer.assert_not_called()
        assert backward == forward

    def test_empty_graph(self, sample_chain, similarity_cfg):
        """Test that scoring against an empty graph raises"""
        with pytest.raises(EmptyGraph):
            similarity(sample_chain, ReasoningGraph(SPEC.dim), similarity_cfg)

    def test_semantic_without_evidence(self):
        """Test that all-zero features give the neutral semantic score"""
        blank = graph_of([vector_node("a", [0.0] * SMALL_DIM)], dim=SMALL_DIM)
        other = graph_of([vector_node("b", unit(0))], dim=SMALL_DIM)
        assert s_sem(blank, other) == 0.5

    @PROPERTY_SETTINGS
    @given(small_graphs(), small_graphs())
    def test_axioms(self, g1, g2):
        """Test range, symmetry, reflexivity and the cheap upper bound"""
        cfg = SimilarityConfig()
        score = similarity(g1, g2, cfg)
        assert 0.0 <= score <= 1.0
        assert similarity(g1, g1, cfg) == 1.0
        assert s_struct(g1, g2, COSTS) == pytest.approx(s_struct(g2, g1, COSTS))
        assert s_sem(g1, g2) == pytest.approx(s_sem(g2, g1))
        assert score <= similarity_upper_bound(g1, g2, cfg)
