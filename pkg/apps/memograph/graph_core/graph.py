"""
Immutable labeled DAG of reasoning nodes and the operations over it.

Graphs never change after construction: ``add_node`` and ``add_edge`` return new graphs.
The plain constructor stores whatever it is given (it is how untrusted documents are
loaded), so ``validate`` is the authority on structural soundness.
"""
import hashlib
import json
from collections import Counter
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Optional

import networkx as nx
import numpy as np

from memograph.constants import ViolationCode
from memograph.error_handler import (
    CycleIntroduced,
    CyclicGraph,
    DimensionMismatch,
    DuplicateEdge,
    DuplicateNodeId,
    UnknownEndpoint,
    UnknownNode,
)
from memograph.graph_core.types import ReasoningEdge, ReasoningNode, Violation

NORM_TOLERANCE = 1e-6


class ReasoningGraph:
    """
    A labeled directed acyclic graph G = (V, E) with a graph-wide feature dimension.

    Nodes are kept sorted by id and edges by (src, dst, kind) so that every enumeration,
    serialization and digest is canonical.
    """

    def __init__(
        self,
        dim: int,
        nodes: Iterable[ReasoningNode] = (),
        edges: Iterable[ReasoningEdge] = (),
    ) -> None:
        self.dim = dim
        self.nodes: tuple[ReasoningNode, ...] = tuple(sorted(nodes, key=lambda node: node.id))
        self.edges: tuple[ReasoningEdge, ...] = tuple(sorted(edges, key=lambda edge: edge.key))

    def __len__(self) -> int:
        return len(self.nodes)

    def __contains__(self, node_id: object) -> bool:
        return node_id in self.node_index

    def __iter__(self) -> Iterator[ReasoningNode]:
        return iter(self.nodes)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ReasoningGraph):
            return NotImplemented
        return canonical_hash(self) == canonical_hash(other)

    def __hash__(self) -> int:
        return hash(canonical_hash(self))

    def __repr__(self) -> str:
        return f"ReasoningGraph(dim={self.dim}, nodes={len(self.nodes)}, edges={len(self.edges)})"

    @cached_property
    def node_index(self) -> dict[str, ReasoningNode]:
        return {node.id: node for node in self.nodes}

    @cached_property
    def edge_keys(self) -> frozenset[tuple[str, str, str]]:
        return frozenset(edge.key for edge in self.edges)

    @cached_property
    def digraph(self) -> nx.DiGraph:
        """
        networkx view over the graph; parallel edges of different kinds collapse.
        """
        digraph = nx.DiGraph()
        digraph.add_nodes_from(node.id for node in self.nodes)
        digraph.add_edges_from(
            (edge.src, edge.dst)
            for edge in self.edges
            if edge.src in self.node_index and edge.dst in self.node_index
        )
        return digraph

    @property
    def node_ids(self) -> list[str]:
        return [node.id for node in self.nodes]

    @property
    def is_empty(self) -> bool:
        return not self.nodes

    def node(self, node_id: str) -> ReasoningNode:
        try:
            return self.node_index[node_id]
        except KeyError:
            raise UnknownNode(node_id)

    def successors(self, node_id: str) -> list[str]:
        return sorted(self.digraph.successors(node_id))

    def predecessors(self, node_id: str) -> list[str]:
        return sorted(self.digraph.predecessors(node_id))

    def feature_matrix(self) -> np.ndarray:
        if not self.nodes:
            return np.zeros((0, self.dim))
        return np.vstack([node.vector for node in self.nodes])


def add_node(graph: ReasoningGraph, node: ReasoningNode) -> ReasoningGraph:
    """
    Return a new graph that also contains ``node``.
    :param graph: ReasoningGraph
    :param node: ReasoningNode with a feature of dimension ``graph.dim``
    :return: ReasoningGraph
    """
    if node.id in graph:
        raise DuplicateNodeId(node.id)
    if len(node.feature) != graph.dim:
        raise DimensionMismatch(graph.dim, len(node.feature), context=f"node '{node.id}'")
    return ReasoningGraph(graph.dim, graph.nodes + (node,), graph.edges)


def add_edge(graph: ReasoningGraph, edge: ReasoningEdge) -> ReasoningGraph:
    """
    Return a new graph that also contains ``edge``; rejected atomically if it would
    close a cycle.
    :param graph: ReasoningGraph
    :param edge: ReasoningEdge
    :return: ReasoningGraph
    """
    for endpoint in (edge.src, edge.dst):
        if endpoint not in graph:
            raise UnknownEndpoint(edge.src, edge.dst, endpoint)
    if edge.key in graph.edge_keys:
        raise DuplicateEdge(edge.src, edge.dst, edge.kind.value)
    if edge.src == edge.dst or nx.has_path(graph.digraph, edge.dst, edge.src):
        raise CycleIntroduced(edge.src, edge.dst)
    return ReasoningGraph(graph.dim, graph.nodes, graph.edges + (edge,))


def build_graph(
    dim: int, nodes: Iterable[ReasoningNode], edges: Iterable[ReasoningEdge] = ()
) -> ReasoningGraph:
    """
    Build a graph through the checked ``add_node`` / ``add_edge`` path.
    """
    graph = ReasoningGraph(dim)
    for node in nodes:
        graph = add_node(graph, node)
    for edge in edges:
        graph = add_edge(graph, edge)
    return graph


def topological_order(graph: ReasoningGraph) -> list[str]:
    """
    Dependency order with ties broken by ascending node id.
    :param graph: ReasoningGraph
    :return: list of node ids
    """
    try:
        return list(nx.lexicographical_topological_sort(graph.digraph))
    except nx.NetworkXUnfeasible as exc:
        raise CyclicGraph(str(exc))


def validate(graph: ReasoningGraph) -> list[Violation]:
    """
    Report every violated structural invariant; an empty list means the graph is sound.
    :param graph: ReasoningGraph
    :return: list of Violation
    """
    violations: list[Violation] = []

    for node_id, count in sorted(Counter(node.id for node in graph.nodes).items()):
        if count > 1:
            violations.append(
                Violation(ViolationCode.DUPLICATE_NODE_ID, f"'{node_id}' appears {count} times")
            )

    for node in graph.nodes:
        if len(node.feature) != graph.dim:
            violations.append(
                Violation(
                    ViolationCode.DIMENSION_MISMATCH,
                    f"'{node.id}' has dimension {len(node.feature)}, graph has {graph.dim}",
                )
            )
            continue
        norm = float(np.linalg.norm(node.vector))
        if not np.isfinite(norm) or (norm > NORM_TOLERANCE and abs(norm - 1.0) > NORM_TOLERANCE):
            violations.append(
                Violation(ViolationCode.UNNORMALIZED_FEATURE, f"'{node.id}' has norm {norm}")
            )

    known = {node.id for node in graph.nodes}
    for edge in graph.edges:
        for endpoint in (edge.src, edge.dst):
            if endpoint not in known:
                violations.append(
                    Violation(
                        ViolationCode.UNKNOWN_ENDPOINT,
                        f"{edge.src} -> {edge.dst} names unknown node '{endpoint}'",
                    )
                )

    for key, count in sorted(Counter(edge.key for edge in graph.edges).items()):
        if count > 1:
            violations.append(
                Violation(ViolationCode.DUPLICATE_EDGE, f"{key} appears {count} times")
            )

    self_loops = [edge for edge in graph.edges if edge.src == edge.dst]
    if self_loops or not nx.is_directed_acyclic_graph(graph.digraph):
        detail = (
            f"self loop on '{self_loops[0].src}'"
            if self_loops
            else f"cycle through {nx.find_cycle(graph.digraph)}"
        )
        violations.append(Violation(ViolationCode.CYCLE_INTRODUCED, detail))

    return violations


def induced_subgraph(graph: ReasoningGraph, node_ids: Iterable[str]) -> ReasoningGraph:
    """
    Subgraph on ``node_ids`` with every edge whose both endpoints are kept.
    """
    keep = set(node_ids)
    for node_id in keep:
        if node_id not in graph:
            raise UnknownNode(node_id)
    return ReasoningGraph(
        graph.dim,
        (node for node in graph.nodes if node.id in keep),
        (edge for edge in graph.edges if edge.src in keep and edge.dst in keep),
    )


def descendant_subgraph(
    graph: ReasoningGraph, root: str, max_depth: Optional[int]
) -> ReasoningGraph:
    """
    Induced subgraph on every node reachable from ``root`` within ``max_depth`` edges.
    :param graph: ReasoningGraph
    :param root: node id
    :param max_depth: nonnegative depth limit, None for unlimited
    :return: ReasoningGraph containing root
    """
    if root not in graph:
        raise UnknownNode(root)
    reachable = nx.single_source_shortest_path_length(graph.digraph, root, cutoff=max_depth)
    return induced_subgraph(graph, reachable)


def replace_nodes(
    graph: ReasoningGraph, replacements: Mapping[str, ReasoningNode]
) -> ReasoningGraph:
    """
    Swap node records in place, keeping ids and edges untouched.
    """
    for node_id, node in replacements.items():
        if node_id not in graph:
            raise UnknownNode(node_id)
        if node.id != node_id:
            raise UnknownNode(node.id)
    return ReasoningGraph(
        graph.dim,
        (replacements.get(node.id, node) for node in graph.nodes),
        graph.edges,
    )


def longest_path_length(graph: ReasoningGraph) -> int:
    if len(graph.nodes) < 2:
        return 0
    return int(nx.dag_longest_path_length(graph.digraph))


def canonical_document(graph: ReasoningGraph) -> dict:
    """
    JSON-ready document with the field order of the graph serialization format.
    """
    return {
        "dim": graph.dim,
        "nodes": [
            {
                "id": node.id,
                "kind": node.kind.value,
                "label": node.label,
                "feature": list(node.feature),
                "meters": {
                    "tokens": node.meters.tokens,
                    "tool_calls": node.meters.tool_calls,
                    "latency_ms": node.meters.latency_ms,
                },
                "origin": (
                    {
                        "graph_id": node.origin.graph_id,
                        "version": node.origin.version,
                        "node_id": node.origin.node_id,
                    }
                    if node.origin is not None
                    else None
                ),
            }
            for node in graph.nodes
        ],
        "edges": [
            {"src": edge.src, "dst": edge.dst, "kind": edge.kind.value, "label": edge.label}
            for edge in graph.edges
        ],
    }


def canonical_json(document: object) -> str:
    return json.dumps(document, separators=(",", ":"), ensure_ascii=False, allow_nan=False)


def canonical_hash(graph: ReasoningGraph) -> str:
    """
    SHA-256 hex digest of the canonical serialization.
    :param graph: ReasoningGraph
    :return: 64-character hex string
    """
    cached = graph.__dict__.get("_canonical_hash")
    if cached is None:
        cached = hashlib.sha256(canonical_json(canonical_document(graph)).encode()).hexdigest()
        graph.__dict__["_canonical_hash"] = cached
    return cached


def content_digest(graph: ReasoningGraph) -> str:
    """
    Digest over what similarity looks at (kinds, labels, features, edge triples); it
    ignores meters and provenance so stitched copies of a subgraph share cache entries.
    """
    cached = graph.__dict__.get("_content_digest")
    if cached is None:
        document = [
            graph.dim,
            [[node.id, node.kind.value, node.label, list(node.feature)] for node in graph.nodes],
            [list(edge.key) for edge in graph.edges],
        ]
        cached = hashlib.sha256(canonical_json(document).encode()).hexdigest()
        graph.__dict__["_content_digest"] = cached
    return cached
