"""
Pydantic schemas for graph documents read from untrusted bytes.
"""
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, PositiveInt

from memograph.constants import EdgeKind, NodeKind


class MetersDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    tokens: int = Field(ge=0)
    tool_calls: int = Field(ge=0)
    latency_ms: float = Field(ge=0, allow_inf_nan=False)


class ProvenanceDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    graph_id: str
    version: PositiveInt
    node_id: str


class NodeDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str
    kind: NodeKind
    label: str
    feature: list[float]
    meters: MetersDocument
    origin: Optional[ProvenanceDocument] = None


class EdgeDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    src: str
    dst: str
    kind: EdgeKind
    label: str = ""


class GraphDocument(BaseModel):
    """
    Schema of the graph serialization format.
    """

    model_config = ConfigDict(extra="forbid")

    dim: PositiveInt
    nodes: list[NodeDocument]
    edges: list[EdgeDocument]
