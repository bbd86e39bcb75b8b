from .graph import (
    ReasoningGraph,
    add_edge,
    add_node,
    build_graph,
    canonical_document,
    canonical_hash,
    canonical_json,
    content_digest,
    descendant_subgraph,
    induced_subgraph,
    longest_path_length,
    replace_nodes,
    topological_order,
    validate,
)
from .serialization import dumps_graph, graph_from_document, graph_to_document, loads_graph
from .types import CostAnnotation, Provenance, ReasoningEdge, ReasoningNode, Violation
