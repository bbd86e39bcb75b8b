import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from pydantic import ValidationError

from memograph.constants import EmbeddingScheme, NodeKind
from memograph.embedding import (
    EmbeddingSpec,
    build_node,
    cosine,
    embed_text,
    get_provider,
    node_text,
    pool_graph,
    tokenize,
)
from memograph.error_handler import EmptyGraph, UnsupportedScheme
from memograph.graph_core import ReasoningGraph
from memograph.tests.values import (
    PROPERTY_SETTINGS,
    SMALL_DIM,
    SPEC,
    graph_of,
    make_node,
    unit,
    vector_node,
)

words = st.text(alphabet="abcdefghij ", min_size=1, max_size=30)


class TestEmbedText:
    def test_deterministic(self):
        """Test that the same text gives the same vector twice"""
        first = embed_text(SPEC, "join orders with customers")
        same_space = EmbeddingSpec(dim=SPEC.dim, seed=SPEC.seed)
        second = embed_text(same_space, "join orders with customers")
        assert np.array_equal(first, second)

    def test_unit_norm(self):
        """Test that text with tokens embeds onto the unit sphere"""
        vector = embed_text(SPEC, "compute monthly totals")
        assert vector.shape == (SPEC.dim,)
        assert np.linalg.norm(vector) == pytest.approx(1.0)

    @pytest.mark.parametrize("text", ["", "   ", "--- !!"])
    def test_empty_text_is_zero(self, text):
        """Test that text without tokens maps to the zero vector"""
        assert not embed_text(SPEC, text).any()

    def test_case_and_punctuation_ignored(self):
        """Test that tokenization lowercases and splits on punctuation"""
        assert tokenize("Load, SALES-table!") == ["load", "sales", "table"]
        assert np.array_equal(embed_text(SPEC, "Load SALES"), embed_text(SPEC, "load, sales"))

    def test_seed_changes_space(self):
        """Test that a different seed gives a different embedding"""
        other = EmbeddingSpec(dim=SPEC.dim, seed=SPEC.seed + 1)
        assert not np.array_equal(embed_text(SPEC, "plot trend"), embed_text(other, "plot trend"))

    def test_shared_tokens_raise_cosine(self):
        """Test that overlapping token bags score above disjoint ones"""
        base = embed_text(SPEC, "revenue by region quarterly")
        near = embed_text(SPEC, "revenue by region monthly")
        far = embed_text(SPEC, "tokenize prompt template")
        assert cosine(base, near) > cosine(base, far)

    def test_cancelling_tokens_not_zero(self):
        """Test that tokens whose hashes cancel still embed onto the unit sphere"""
        spec = EmbeddingSpec(dim=2, seed=17)
        vector = embed_text(spec, "beta delta")
        assert np.linalg.norm(vector) == pytest.approx(1.0)
        assert np.array_equal(vector, embed_text(spec, "delta beta"))
        assert not np.array_equal(vector, embed_text(spec, "alpha count"))

    @PROPERTY_SETTINGS
    @given(words)
    def test_norm_property(self, text):
        """Test that an embedding is zero exactly when the text has no tokens"""
        norm = np.linalg.norm(embed_text(SPEC, text))
        if tokenize(text):
            assert norm == pytest.approx(1.0)
        else:
            assert norm == 0.0


class TestEmbeddingSpec:
    def test_hashing_requires_seed(self):
        """Test that hashing-v1 without a seed is rejected"""
        with pytest.raises(ValidationError):
            EmbeddingSpec(seed=None)

    def test_zero_dim_rejected(self):
        """Test that the dimension must be positive"""
        with pytest.raises(ValidationError):
            EmbeddingSpec(dim=0)

    def test_external_scheme_unsupported(self):
        """Test that the external scheme has no built in provider"""
        spec = EmbeddingSpec(scheme=EmbeddingScheme.EXTERNAL, seed=None)
        with pytest.raises(UnsupportedScheme):
            get_provider(spec)


class TestCosine:
    def test_equal_vectors_exactly_one(self):
        """Test that cosine of a vector with itself is exactly 1"""
        vector = embed_text(SPEC, "filter rows by date")
        assert cosine(vector, vector.copy()) == 1.0

    def test_zero_vector(self):
        """Test that cosine against the zero vector is 0"""
        assert cosine(np.zeros(4), np.ones(4)) == 0.0

    def test_orthogonal(self):
        """Test that orthogonal vectors have cosine 0"""
        assert cosine(np.array(unit(0)), np.array(unit(1))) == 0.0


class TestPooling:
    def test_pool_is_unit(self, sample_chain):
        """Test that the pooled feature is normalized"""
        assert np.linalg.norm(pool_graph(sample_chain)) == pytest.approx(1.0)

    def test_pool_ignores_ids_and_order(self):
        """Test that equal feature multisets pool to the same vector"""
        first = graph_of([make_node("a", "load"), make_node("b", "join")])
        second = graph_of([make_node("x", "join"), make_node("y", "load")])
        assert np.array_equal(pool_graph(first), pool_graph(second))

    def test_cancelling_features_pool_to_zero(self):
        """Test that opposite features pool to the zero vector"""
        feature = np.array(unit(2))
        graph = graph_of(
            [vector_node("a", feature), vector_node("b", -feature)], dim=SMALL_DIM
        )
        assert not pool_graph(graph).any()

    def test_empty_graph(self):
        """Test that pooling an empty graph raises EmptyGraph"""
        with pytest.raises(EmptyGraph):
            pool_graph(ReasoningGraph(SPEC.dim))


class TestBuildNode:
    def test_feature_embeds_kind_and_label(self):
        """Test that the node feature is the embedding of kind name and label"""
        node = build_node("n", NodeKind.SQL_CTE, "monthly totals", SPEC)
        expected = embed_text(SPEC, node_text(NodeKind.SQL_CTE, "monthly totals"))
        assert np.array_equal(node.vector, expected)

    def test_kind_separates_same_label(self):
        """Test that the same label under two kinds embeds differently"""
        prompt = build_node("n", NodeKind.PROMPT, "summarize", SPEC)
        tool = build_node("n", NodeKind.TOOL_CALL, "summarize", SPEC)
        assert prompt.feature != tool.feature
