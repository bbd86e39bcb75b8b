"""
Records held by the repository and the messages exchanged with it.
"""
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, PositiveInt

from memograph.constants import EntrySource, PruneStrategy
from memograph.graph_core import ReasoningGraph


@dataclass(frozen=True)
class RepositoryEntry:
    """
    One stored version of a reasoning graph with its annotations.

    ``sequence`` is the position of the entry record in the log and orders entries by age;
    ``offset`` is its byte offset in ``log.jsonl``.
    """

    graph_id: str
    version: int
    graph: ReasoningGraph
    task_embedding: tuple[float, ...]
    output_signature: str
    created_at: str
    metrics: Mapping[str, float] = field(default_factory=dict)
    node_signatures: Mapping[str, str] = field(default_factory=dict)
    source: EntrySource = EntrySource.API
    environment: Mapping[str, str] = field(default_factory=dict)
    tombstone: bool = False
    sequence: int = 0
    offset: int = 0

    @property
    def entry_ref(self) -> tuple[str, int]:
        return self.graph_id, self.version

    @property
    def embedding(self) -> np.ndarray:
        return np.asarray(self.task_embedding, dtype=float)


@dataclass(frozen=True)
class QueryResult:
    entry_ref: tuple[str, int]
    anchor: str
    score: float
    approx_flag: bool = False

    @property
    def graph_id(self) -> str:
        return self.entry_ref[0]

    @property
    def version(self) -> int:
        return self.entry_ref[1]

    @property
    def sort_key(self) -> tuple[float, str, int, str]:
        return -self.score, self.graph_id, self.version, self.anchor


@dataclass(frozen=True)
class TaskQuery:
    """
    What a query looks for: a task embedding and optionally a graph fragment to match.
    """

    embedding: tuple[float, ...]
    graph: Optional[ReasoningGraph] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "embedding", tuple(float(value) for value in self.embedding))

    @property
    def vector(self) -> np.ndarray:
        return np.asarray(self.embedding, dtype=float)


class PruneConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    max_entries: PositiveInt
    strategy: PruneStrategy = PruneStrategy.OLDEST_FIRST
