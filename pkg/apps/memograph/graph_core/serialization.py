"""
Canonical JSON (de)serialization of reasoning graphs.
"""
import json
from typing import Any

from pydantic import ValidationError

from memograph.error_handler import InvalidGraph
from memograph.graph_core.graph import (
    ReasoningGraph,
    canonical_document,
    canonical_json,
    validate,
)
from memograph.graph_core.schemas import GraphDocument
from memograph.graph_core.types import (
    CostAnnotation,
    Provenance,
    ReasoningEdge,
    ReasoningNode,
)


def graph_to_document(graph: ReasoningGraph) -> dict[str, Any]:
    return canonical_document(graph)


def graph_from_document(document: Any) -> ReasoningGraph:
    """
    Load a graph from a parsed JSON document and reject it unless it validates.
    :param document: parsed JSON value
    :return: ReasoningGraph
    """
    try:
        parsed = GraphDocument.model_validate(document)
    except ValidationError as exc:
        raise InvalidGraph(
            [f"{'.'.join(map(str, err['loc']))}: {err['msg']}" for err in exc.errors()]
        )

    graph = ReasoningGraph(
        parsed.dim,
        (
            ReasoningNode(
                id=node.id,
                kind=node.kind,
                label=node.label,
                feature=tuple(node.feature),
                meters=CostAnnotation(
                    tokens=node.meters.tokens,
                    tool_calls=node.meters.tool_calls,
                    latency_ms=node.meters.latency_ms,
                ),
                origin=(
                    Provenance(node.origin.graph_id, node.origin.version, node.origin.node_id)
                    if node.origin is not None
                    else None
                ),
            )
            for node in parsed.nodes
        ),
        (
            ReasoningEdge(src=edge.src, dst=edge.dst, kind=edge.kind, label=edge.label)
            for edge in parsed.edges
        ),
    )
    violations = validate(graph)
    if violations:
        raise InvalidGraph(violations)
    return graph


def dumps_graph(graph: ReasoningGraph) -> str:
    return canonical_json(graph_to_document(graph))


def loads_graph(text: str | bytes) -> ReasoningGraph:
    try:
        document = json.loads(text)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise InvalidGraph([f"not a JSON document: {exc}"])
    return graph_from_document(document)
