"""
Value types of a reasoning graph: nodes, edges, their cost meters and provenance.
"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from memograph.constants import EdgeKind, NodeKind, ViolationCode


@dataclass(frozen=True)
class CostAnnotation:
    """
    Additive execution meters of a node.
    """

    tokens: int = 0
    tool_calls: int = 0
    latency_ms: float = 0.0

    def __post_init__(self) -> None:
        if self.tokens < 0 or self.tool_calls < 0 or self.latency_ms < 0:
            raise ValueError(f"Meters must be nonnegative, got {self}")
        object.__setattr__(self, "latency_ms", float(self.latency_ms))

    def __add__(self, other: "CostAnnotation") -> "CostAnnotation":
        return CostAnnotation(
            tokens=self.tokens + other.tokens,
            tool_calls=self.tool_calls + other.tool_calls,
            latency_ms=self.latency_ms + other.latency_ms,
        )


@dataclass(frozen=True)
class Provenance:
    """
    Pinned reference to the node of a stored graph version that a reused node came from.
    """

    graph_id: str
    version: int
    node_id: str

    @property
    def entry_ref(self) -> tuple[str, int]:
        return self.graph_id, self.version


@dataclass(frozen=True)
class ReasoningNode:
    """
    A typed reasoning step. ``feature`` is stored as a tuple so nodes stay hashable.
    """

    id: str
    kind: NodeKind
    label: str
    feature: tuple[float, ...]
    meters: CostAnnotation = field(default_factory=CostAnnotation)
    origin: Optional[Provenance] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "feature", tuple(float(value) for value in self.feature))

    @property
    def vector(self) -> np.ndarray:
        return np.asarray(self.feature, dtype=float)

    @property
    def is_reused(self) -> bool:
        return self.origin is not None


@dataclass(frozen=True)
class ReasoningEdge:
    src: str
    dst: str
    kind: EdgeKind = EdgeKind.DATAFLOW
    label: str = ""

    @property
    def key(self) -> tuple[str, str, str]:
        return self.src, self.dst, self.kind.value


@dataclass(frozen=True)
class Violation:
    code: ViolationCode
    detail: str

    def __str__(self) -> str:
        return f"{self.code.value}: {self.detail}"
