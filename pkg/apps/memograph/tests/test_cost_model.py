from dataclasses import replace
from math import fsum

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from memograph.cost_model import (
    CostCoefficients,
    ReuseRegion,
    inconsistency,
    regions_from_provenance,
    structural_cost,
    total_loss,
    weighted_inconsistency,
)
from memograph.embedding import embed_text
from memograph.error_handler import DanglingProvenance, NotFound, UnknownNode
from memograph.graph_core import Provenance, ReasoningGraph, replace_nodes
from memograph.tests.values import PROPERTY_SETTINGS, SPEC, chain, graph_of, make_node, random_dag

COEFFS = CostCoefficients()


def cite(graph: ReasoningGraph, source: str, node_ids: list[str], version: int = 1):
    """
    Mark ``node_ids`` as copied from the same ids of ``source``@``version``.
    """
    return replace_nodes(
        graph,
        {
            node_id: replace(graph.node(node_id), origin=Provenance(source, version, node_id))
            for node_id in node_ids
        },
    )


@pytest.fixture()
def stored_chain(store, sample_chain):
    store.put("src", sample_chain, tuple(embed_text(SPEC, "sales")))
    return store


class TestStructuralCost:
    def test_cold_diamond(self, sample_diamond):
        """Test every cost term of a fully executed diamond"""
        breakdown = structural_cost(sample_diamond, COEFFS)
        assert (breakdown.calls, breakdown.depth, breakdown.reused) == (4, 2, 0)
        assert breakdown.latency_ms == 50.0
        assert (breakdown.tokens, breakdown.tool_calls) == (40, 4)
        expected = (
            COEFFS.a1 * 4
            + COEFFS.a2 * 50.0
            + COEFFS.a3 * 2
            + COEFFS.c_llm * 40
            + COEFFS.c_tool * 4
            + COEFFS.c_lat * 50.0
        )
        assert breakdown.total == pytest.approx(expected)
        assert breakdown.is_consistent()

    def test_reuse_mask(self, sample_diamond):
        """Test that reused nodes cost c_retrieve instead of their meters"""
        breakdown = structural_cost(sample_diamond, COEFFS, reused={"a", "b"})
        assert breakdown.calls == 2
        assert breakdown.latency_ms == 35.0
        assert breakdown.retrieval_overhead == pytest.approx(2 * COEFFS.c_retrieve)
        assert breakdown.depth == 2

    def test_mask_defaults_to_provenance(self, sample_diamond):
        """Test that nodes carrying an origin count as reused"""
        cited = cite(sample_diamond, "src", ["d"])
        assert structural_cost(cited, COEFFS).reused == 1
        assert structural_cost(cited, COEFFS, reused=[]).reused == 0

    def test_unknown_reused_node(self, sample_diamond):
        """Test that the mask may only name nodes of the graph"""
        with pytest.raises(UnknownNode):
            structural_cost(sample_diamond, COEFFS, reused={"zz"})

    def test_negative_coefficient_rejected(self):
        """Test that cost prices are nonnegative"""
        with pytest.raises(ValueError):
            CostCoefficients(a1=-1.0)

    @PROPERTY_SETTINGS
    @given(
        st.integers(min_value=0, max_value=2**32 - 1),
        st.integers(min_value=1, max_value=8),
        st.data(),
    )
    def test_savings_are_linear(self, seed, n_nodes, data):
        """Test that reusing a set of nodes saves exactly the sum of their charges"""
        graph = random_dag(np.random.default_rng(seed), n_nodes)
        mask = data.draw(st.sets(st.sampled_from(graph.node_ids)))
        cold = structural_cost(graph, COEFFS)
        warm = structural_cost(graph, COEFFS, reused=mask)

        def charge(node_id: str) -> float:
            meters = graph.node(node_id).meters
            return (
                COEFFS.a1
                + (COEFFS.a2 + COEFFS.c_lat) * meters.latency_ms
                + COEFFS.c_llm * meters.tokens
                + COEFFS.c_tool * meters.tool_calls
                - COEFFS.c_retrieve
            )

        saved = fsum(charge(node_id) for node_id in mask)
        assert cold.total - warm.total == pytest.approx(saved, abs=1e-9)


class TestRegions:
    def test_components_split(self):
        """Test that disconnected nodes citing one entry form separate regions"""
        graph = chain(["load", "join", "filter", "plot"])
        cited = cite(graph, "src", ["c0", "c2", "c3"])
        regions = regions_from_provenance(cited)
        assert [sorted(region.nodes) for region in regions] == [["c0"], ["c2", "c3"]]
        assert [region.anchor for region in regions] == ["c0", "c2"]
        assert all(region.source_ref[:2] == ("src", 1) for region in regions)

    def test_no_provenance(self, sample_chain):
        """Test that a cold graph has no regions"""
        assert regions_from_provenance(sample_chain) == []

    def test_region_document(self):
        """Test the serialized form of a region"""
        region = ReuseRegion(frozenset({"b", "a"}), ("src", 2, "a"))
        assert region.to_document() == {
            "nodes": ["a", "b"],
            "source": {"graph_id": "src", "version": 2, "anchor": "a"},
        }
        assert region.weight == 2


class TestInconsistency:
    def test_weighted_average(self):
        """Test the node-weighted average of region divergence"""
        assert weighted_inconsistency([(2, 1.0), (1, 0.4)]) == pytest.approx(0.2)
        assert weighted_inconsistency([]) == 0.0

    def test_faithful_copy_is_consistent(self, stored_chain, sample_chain, similarity_cfg):
        """Test that an unchanged copy of the source has zero inconsistency"""
        stitched = cite(sample_chain, "src", ["c1", "c2"])
        regions = regions_from_provenance(stitched)
        assert inconsistency(stitched, regions, stored_chain, similarity_cfg) == 0.0

    def test_drifted_copy(self, stored_chain, sample_chain, similarity_cfg):
        """Test that a relabeled region node raises inconsistency above zero"""
        drifted = replace_nodes(sample_chain, {"c2": make_node("c2", "plot trend rev2")})
        stitched = cite(drifted, "src", ["c1", "c2"])
        regions = regions_from_provenance(stitched)
        value = inconsistency(stitched, regions, stored_chain, similarity_cfg)
        assert 0.0 < value <= 1.0

    def test_dangling_source(self, mock_repo_view, sample_chain, similarity_cfg):
        """Test that a region citing a missing entry raises DanglingProvenance"""
        mock_repo_view.get.side_effect = NotFound("src")
        stitched = cite(sample_chain, "src", ["c0"])
        with pytest.raises(DanglingProvenance):
            inconsistency(
                stitched, regions_from_provenance(stitched), mock_repo_view, similarity_cfg
            )

    def test_missing_source_node(self, stored_chain, similarity_cfg):
        """Test that citing a node absent from the source raises DanglingProvenance"""
        graph = graph_of([make_node("x", "other")])
        stitched = cite(graph, "src", ["x"])
        with pytest.raises(DanglingProvenance):
            inconsistency(
                stitched, regions_from_provenance(stitched), stored_chain, similarity_cfg
            )


class TestTotalLoss:
    def test_combines_cost_and_inconsistency(self, stored_chain, sample_chain, similarity_cfg):
        """Test L = cost + lambda * inconsistency on a drifted graft"""
        drifted = replace_nodes(sample_chain, {"c2": make_node("c2", "plot trend rev2")})
        stitched = cite(drifted, "src", ["c1", "c2"])
        regions = regions_from_provenance(stitched)
        breakdown = total_loss(stitched, regions, COEFFS, 3.0, stored_chain, similarity_cfg)
        assert breakdown.lam == 3.0
        assert breakdown.total == pytest.approx(breakdown.cost + 3.0 * breakdown.inconsistency)
        assert breakdown.is_consistent()
        assert breakdown.to_document()["lambda"] == 3.0

    def test_negative_lambda(self, sample_chain, mock_repo_view, similarity_cfg):
        """Test that lambda must be nonnegative"""
        with pytest.raises(ValueError):
            total_loss(sample_chain, [], COEFFS, -0.1, mock_repo_view, similarity_cfg)

    def test_cold_loss_is_cost(self, sample_chain, mock_repo_view, similarity_cfg):
        """Test that a graph without reuse pays exactly its structural cost"""
        breakdown = total_loss(sample_chain, [], COEFFS, 5.0, mock_repo_view, similarity_cfg)
        assert breakdown.total == structural_cost(sample_chain, COEFFS).total
        assert breakdown.inconsistency == 0.0
        mock_repo_view.get.assert_not_called()
