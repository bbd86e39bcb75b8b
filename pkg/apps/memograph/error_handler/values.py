from dataclasses import dataclass


@dataclass
class MessageTemplates:
    """
    Dataclass for error messages.

    :cvar DUPLICATE_NODE_ID: Node identifier already present in the graph.
    :cvar DIMENSION_MISMATCH: Vector length differs from the expected dimension.
    :cvar STORE_MISMATCH: Store opened with an incompatible embedding spec.
    """

    DUPLICATE_NODE_ID: str = "Node '{node_id}' is already present in the graph."
    DIMENSION_MISMATCH: str = "Expected dimension {expected}, got {actual} ({context})."
    UNKNOWN_ENDPOINT: str = "Edge {src} -> {dst} names unknown node '{missing}'."
    CYCLE_INTRODUCED: str = "Edge {src} -> {dst} would introduce a cycle."
    DUPLICATE_EDGE: str = "Edge {src} -> {dst} ({kind}) is already present in the graph."
    CYCLIC_GRAPH: str = "Graph is not acyclic: {detail}."
    UNKNOWN_NODE: str = "Node '{node_id}' does not exist in the graph."
    INVALID_GRAPH: str = "Graph failed validation: {violations}."
    EMPTY_GRAPH: str = "Operation '{operation}' requires a nonempty graph."
    UNSUPPORTED_SCHEME: str = "Embedding scheme '{scheme}' has no provider."
    STORAGE_FAILURE: str = "Storage failure at {path}: {reason}."
    STORE_CORRUPTION: str = "Store log {path} is corrupt at offset {offset}: {reason}."
    STORE_MISMATCH: str = "Store {path} has {field}={stored}, but {requested} was requested."
    NOT_FOUND: str = "Graph '{graph_id}' is not in the repository."
    VERSION_NOT_FOUND: str = "Graph '{graph_id}' has no version {version}."
    DANGLING_PROVENANCE: str = "Region cites missing source {graph_id}@{version} ({reason})."
    MISSING_EXECUTOR: str = "No executor registered for node kinds: {kinds}."
    EXECUTOR_FAILURE: str = "Executor failed on node '{node_id}': {reason}."
    INVALID_CONFIG: str = "Invalid configuration ({source}): {reason}."
    IO_FAILURE: str = "Cannot write {path}: {reason}."
