"""
Vector helpers shared by similarity and retrieval: cosine, graph pooling and node
featurization.
"""
from typing import Optional

import numpy as np

from memograph.constants import NodeKind
from memograph.embedding.providers import EmbeddingSpec, embed_text
from memograph.error_handler import EmptyGraph
from memograph.graph_core import CostAnnotation, Provenance, ReasoningGraph, ReasoningNode


def normalize(vector: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(vector)
    if norm == 0:
        return np.zeros_like(vector, dtype=float)
    return vector / norm


def cosine(first: np.ndarray, second: np.ndarray) -> float:
    """
    Cosine similarity; 0 when either side is the zero vector, exactly 1 for equal vectors.
    """
    first = np.asarray(first, dtype=float)
    second = np.asarray(second, dtype=float)
    first_norm = np.linalg.norm(first)
    second_norm = np.linalg.norm(second)
    if first_norm == 0 or second_norm == 0:
        return 0.0
    if np.array_equal(first, second):
        return 1.0
    value = float(np.dot(first, second) / (first_norm * second_norm))
    return min(1.0, max(-1.0, value))


def pool_graph(graph: ReasoningGraph) -> np.ndarray:
    """
    Mean node feature, re-normalized; zero when the features cancel or are all zero.
    :param graph: nonempty ReasoningGraph
    :return: vector of length ``graph.dim``
    """
    if graph.is_empty:
        raise EmptyGraph("pool_graph")
    cached = graph.__dict__.get("_pooled")
    if cached is None:
        # rows in a fixed order so equal node multisets pool to identical vectors
        rows = sorted(node.feature for node in graph.nodes)
        cached = normalize(np.asarray(rows, dtype=float).mean(axis=0))
        graph.__dict__["_pooled"] = cached
    return cached


def node_text(kind: NodeKind, label: str) -> str:
    return f"{kind.value} {label}"


def build_node(
    node_id: str,
    kind: NodeKind,
    label: str,
    spec: EmbeddingSpec,
    meters: Optional[CostAnnotation] = None,
    origin: Optional[Provenance] = None,
) -> ReasoningNode:
    """
    Node whose feature is the embedding of its kind name and label.
    """
    return ReasoningNode(
        id=node_id,
        kind=kind,
        label=label,
        feature=tuple(embed_text(spec, node_text(kind, label))),
        meters=meters or CostAnnotation(),
        origin=origin,
    )
