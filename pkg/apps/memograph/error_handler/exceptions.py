from typing import Iterable

from memograph.error_handler.values import MessageTemplates


class MemographError(Exception):
    """
    Base class for every error raised by memograph.
    """

    def __init__(self, *args: object) -> None:
        super().__init__(*args)


class DuplicateNodeId(MemographError):
    """
    Exception class raised when a node identifier is already present in a graph.
    """

    def __init__(self, node_id: str):
        super().__init__(node_id)
        self.node_id = node_id

    def __str__(self):
        return MessageTemplates.DUPLICATE_NODE_ID.format(node_id=self.node_id)


class DimensionMismatch(MemographError):
    """
    Exception class raised when a vector has the wrong dimension.
    """

    def __init__(self, expected: int, actual: int, context: str = "feature"):
        super().__init__(expected, actual, context)
        self.expected = expected
        self.actual = actual
        self.context = context

    def __str__(self):
        return MessageTemplates.DIMENSION_MISMATCH.format(
            expected=self.expected, actual=self.actual, context=self.context
        )


class UnknownEndpoint(MemographError):
    def __init__(self, src: str, dst: str, missing: str):
        super().__init__(src, dst, missing)
        self.src = src
        self.dst = dst
        self.missing = missing

    def __str__(self):
        return MessageTemplates.UNKNOWN_ENDPOINT.format(
            src=self.src, dst=self.dst, missing=self.missing
        )


class CycleIntroduced(MemographError):
    def __init__(self, src: str, dst: str):
        super().__init__(src, dst)
        self.src = src
        self.dst = dst

    def __str__(self):
        return MessageTemplates.CYCLE_INTRODUCED.format(src=self.src, dst=self.dst)


class DuplicateEdge(MemographError):
    def __init__(self, src: str, dst: str, kind: str):
        super().__init__(src, dst, kind)
        self.src = src
        self.dst = dst
        self.kind = kind

    def __str__(self):
        return MessageTemplates.DUPLICATE_EDGE.format(src=self.src, dst=self.dst, kind=self.kind)


class CyclicGraph(MemographError):
    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail

    def __str__(self):
        return MessageTemplates.CYCLIC_GRAPH.format(detail=self.detail)


class UnknownNode(MemographError):
    def __init__(self, node_id: str):
        super().__init__(node_id)
        self.node_id = node_id

    def __str__(self):
        return MessageTemplates.UNKNOWN_NODE.format(node_id=self.node_id)


class InvalidGraph(MemographError):
    """
    Exception class raised when a graph fails validation; keeps the violation list.
    """

    def __init__(self, violations: Iterable[object]):
        self.violations = list(violations)
        super().__init__(self.violations)

    def __str__(self):
        return MessageTemplates.INVALID_GRAPH.format(
            violations="; ".join(str(violation) for violation in self.violations)
        )


class EmptyGraph(MemographError):
    def __init__(self, operation: str):
        super().__init__(operation)
        self.operation = operation

    def __str__(self):
        return MessageTemplates.EMPTY_GRAPH.format(operation=self.operation)


class UnsupportedScheme(MemographError):
    def __init__(self, scheme: str):
        super().__init__(scheme)
        self.scheme = scheme

    def __str__(self):
        return MessageTemplates.UNSUPPORTED_SCHEME.format(scheme=self.scheme)


class StorageFailure(MemographError):
    def __init__(self, path: str, reason: str):
        super().__init__(path, reason)
        self.path = path
        self.reason = reason

    def __str__(self):
        return MessageTemplates.STORAGE_FAILURE.format(path=self.path, reason=self.reason)


class StoreCorruption(MemographError):
    """
    Exception class raised when a committed record of the store log cannot be read back.
    """

    def __init__(self, path: str, offset: int, reason: str):
        super().__init__(path, offset, reason)
        self.path = path
        self.offset = offset
        self.reason = reason

    def __str__(self):
        return MessageTemplates.STORE_CORRUPTION.format(
            path=self.path, offset=self.offset, reason=self.reason
        )


class StoreMismatch(MemographError):
    """
    Exception class raised when a store is opened with an incompatible embedding spec.
    """

    def __init__(self, path: str, field: str, stored: object, requested: object):
        super().__init__(path, field, stored, requested)
        self.path = path
        self.field = field
        self.stored = stored
        self.requested = requested

    def __str__(self):
        return MessageTemplates.STORE_MISMATCH.format(
            path=self.path, field=self.field, stored=self.stored, requested=self.requested
        )


class NotFound(MemographError):
    def __init__(self, graph_id: str):
        super().__init__(graph_id)
        self.graph_id = graph_id

    def __str__(self):
        return MessageTemplates.NOT_FOUND.format(graph_id=self.graph_id)


class VersionNotFound(MemographError):
    def __init__(self, graph_id: str, version: int):
        super().__init__(graph_id, version)
        self.graph_id = graph_id
        self.version = version

    def __str__(self):
        return MessageTemplates.VERSION_NOT_FOUND.format(
            graph_id=self.graph_id, version=self.version
        )


class DanglingProvenance(MemographError):
    def __init__(self, graph_id: str, version: int, reason: str):
        super().__init__(graph_id, version, reason)
        self.graph_id = graph_id
        self.version = version
        self.reason = reason

    def __str__(self):
        return MessageTemplates.DANGLING_PROVENANCE.format(
            graph_id=self.graph_id, version=self.version, reason=self.reason
        )


class MissingExecutor(MemographError):
    def __init__(self, kinds: Iterable[str]):
        self.kinds = sorted(kinds)
        super().__init__(self.kinds)

    def __str__(self):
        return MessageTemplates.MISSING_EXECUTOR.format(kinds=", ".join(self.kinds))


class ExecutorFailure(MemographError):
    """
    Exception class raised when a node executor fails; carries the failing node id.
    """

    def __init__(self, node_id: str, reason: str):
        super().__init__(node_id, reason)
        self.node_id = node_id
        self.reason = reason

    def __str__(self):
        return MessageTemplates.EXECUTOR_FAILURE.format(node_id=self.node_id, reason=self.reason)


class InvalidConfig(MemographError):
    def __init__(self, source: str, reason: str):
        super().__init__(source, reason)
        self.source = source
        self.reason = reason

    def __str__(self):
        return MessageTemplates.INVALID_CONFIG.format(source=self.source, reason=self.reason)


class IoFailure(MemographError):
    def __init__(self, path: str, reason: str):
        super().__init__(path, reason)
        self.path = path
        self.reason = reason

    def __str__(self):
        return MessageTemplates.IO_FAILURE.format(path=self.path, reason=self.reason)
