"""
Tasks handed to the memo engine and the planner contract that expands them.
"""
from dataclasses import dataclass
from typing import Any, Protocol

import numpy as np

from memograph.embedding import EmbeddingSpec, embed_text
from memograph.graph_core import ReasoningGraph


@dataclass(frozen=True)
class TaskSpec:
    """
    A task and its demand vector, the embedding of its description.
    """

    id: str
    description: str
    demand: tuple[float, ...]
    family: str = ""
    seed: int = 0

    @classmethod
    def create(
        cls, task_id: str, description: str, spec: EmbeddingSpec, family: str = "", seed: int = 0
    ) -> "TaskSpec":
        return cls(
            id=task_id,
            description=description,
            demand=tuple(float(value) for value in embed_text(spec, description)),
            family=family,
            seed=seed,
        )

    @property
    def vector(self) -> np.ndarray:
        return np.asarray(self.demand, dtype=float)

    def to_document(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "description": self.description,
            "demand": list(self.demand),
            "family": self.family,
            "seed": self.seed,
        }


class Planner(Protocol):
    """
    Deterministic cold expansion of a task into its full plan.
    """

    def plan(self, task: TaskSpec) -> ReasoningGraph:
        ...
