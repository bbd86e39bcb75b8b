from .exceptions import (
    CycleIntroduced,
    CyclicGraph,
    DanglingProvenance,
    DimensionMismatch,
    DuplicateEdge,
    DuplicateNodeId,
    EmptyGraph,
    ExecutorFailure,
    InvalidConfig,
    InvalidGraph,
    IoFailure,
    MemographError,
    MissingExecutor,
    NotFound,
    StorageFailure,
    StoreCorruption,
    StoreMismatch,
    UnknownEndpoint,
    UnknownNode,
    UnsupportedScheme,
    VersionNotFound,
)
from .values import MessageTemplates
