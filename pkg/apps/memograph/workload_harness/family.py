"""
Synthetic task families: consecutive tasks whose cold plans share a controlled fraction of
their reasoning steps.

Every plan of a family has the same skeleton: a task-specific ``Prompt`` root feeding a
chain of ``base_nodes`` slots, plus a few skip edges. Task ``i`` copies
``ceil(overlap * base_nodes)`` slots verbatim from task ``i - 1`` and fills the others with
fresh steps, or with near-variants of the previous step when ``drift`` is set.
"""
import logging
import math
import string
from dataclasses import dataclass
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PositiveInt, model_validator

from memograph.constants import EdgeKind, NodeKind
from memograph.embedding import EmbeddingSpec, build_node
from memograph.graph_core import CostAnnotation, ReasoningEdge, ReasoningGraph, build_graph
from memograph.memo_engine import TaskSpec

logger = logging.getLogger(__name__)

SCENARIO_DESCRIPTIONS = (
    "Generate features for monthly sales trends",
    "Update sales features for Q2 segmentation",
    "Forecast category-wise sales using prior features",
)
PHRASE_BANK = (
    "Refresh weekly revenue features by region",
    "Segment customers by quarterly order volume",
    "Aggregate returns per product category",
    "Join inventory snapshots with sales facts",
    "Rank stores by year-over-year growth",
    "Detect anomalies in daily transaction counts",
)
ROOT_ID = "root"
TOKEN_LENGTH = 6


def default_kinds_mix() -> dict[NodeKind, float]:
    return {
        NodeKind.FEATURE_DEF: 0.3,
        NodeKind.SQL_CTE: 0.2,
        NodeKind.TOOL_CALL: 0.2,
        NodeKind.AGGREGATE: 0.2,
        NodeKind.GENERIC: 0.1,
    }


class MeterRanges(BaseModel):
    """
    Inclusive sampling ranges of the meters of fresh steps.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    tokens: tuple[int, int] = (50, 800)
    tool_calls: tuple[int, int] = (0, 2)
    latency_ms: tuple[float, float] = (50.0, 1500.0)

    @model_validator(mode="after")
    def check_ranges(self) -> "MeterRanges":
        for name in ("tokens", "tool_calls", "latency_ms"):
            low, high = getattr(self, name)
            if low < 0 or high < low:
                raise ValueError(f"{name} range must satisfy 0 <= low <= high, got {low}..{high}")
        return self


class FamilyConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str = "sales"
    n_tasks: PositiveInt = 8
    base_nodes: PositiveInt = 12
    overlap: float = Field(default=0.7, ge=0, le=1)
    drift: float = Field(default=0.0, ge=0, le=1)
    skip_edge_prob: float = Field(default=0.2, ge=0, le=1)
    kinds_mix: dict[NodeKind, float] = Field(default_factory=default_kinds_mix)
    meter_ranges: MeterRanges = Field(default_factory=MeterRanges)
    seed: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def check_kinds_mix(self) -> "FamilyConfig":
        if not self.kinds_mix:
            raise ValueError("kinds_mix must name at least one kind")
        if any(weight < 0 for weight in self.kinds_mix.values()):
            raise ValueError("kinds_mix weights must be nonnegative")
        if sum(self.kinds_mix.values()) <= 0:
            raise ValueError("kinds_mix weights must not all be zero")
        return self

    @property
    def shared_slots(self) -> int:
        return math.ceil(self.overlap * self.base_nodes)


@dataclass(frozen=True)
class Step:
    kind: NodeKind
    label: str
    meters: CostAnnotation


def slot_id(index: int) -> str:
    return f"n{index:02d}"


def task_id(cfg: FamilyConfig, index: int) -> str:
    return f"{cfg.name}-t{index + 1:03d}"


def describe(index: int) -> str:
    if index < len(SCENARIO_DESCRIPTIONS):
        return SCENARIO_DESCRIPTIONS[index]
    return PHRASE_BANK[(index - len(SCENARIO_DESCRIPTIONS)) % len(PHRASE_BANK)]


class FamilyPlanner:
    """
    Deterministic cold planner of a family. All step tables are drawn up front from the
    family seed, task by task, so ``plan`` only assembles graphs.
    """

    def __init__(self, cfg: FamilyConfig, spec: Optional[EmbeddingSpec] = None) -> None:
        self.cfg = cfg
        self.spec = spec or EmbeddingSpec()
        self._rng = np.random.default_rng([cfg.seed, 0x5EED])
        self._labels: set[str] = set()
        self.edges = self._skeleton()
        self.steps: list[list[Step]] = []
        self.shared: list[frozenset[int]] = []
        for index in range(cfg.n_tasks):
            self._draw_task(index)
        self._index = {task_id(cfg, index): index for index in range(cfg.n_tasks)}

    def _token(self) -> str:
        letters = self._rng.choice(list(string.ascii_lowercase), size=TOKEN_LENGTH)
        return "".join(letters)

    def _fresh_label(self) -> str:
        # two random tokens keep unrelated steps far apart under feature hashing
        while True:
            label = f"{self._token()} {self._token()}"
            if label not in self._labels:
                self._labels.add(label)
                return label

    def _fresh_step(self) -> Step:
        kinds = sorted(self.cfg.kinds_mix, key=lambda kind: kind.value)
        weights = np.array([self.cfg.kinds_mix[kind] for kind in kinds], dtype=float)
        kind = kinds[int(self._rng.choice(len(kinds), p=weights / weights.sum()))]
        ranges = self.cfg.meter_ranges
        meters = CostAnnotation(
            tokens=int(self._rng.integers(ranges.tokens[0], ranges.tokens[1] + 1)),
            tool_calls=int(self._rng.integers(ranges.tool_calls[0], ranges.tool_calls[1] + 1)),
            latency_ms=float(self._rng.uniform(ranges.latency_ms[0], ranges.latency_ms[1])),
        )
        return Step(kind, self._fresh_label(), meters)

    def _variant(self, step: Step, index: int) -> Step:
        label = f"{step.label} revised v{index + 1}"
        self._labels.add(label)
        return Step(step.kind, label, step.meters)

    def _skeleton(self) -> list[ReasoningEdge]:
        edges = [ReasoningEdge(ROOT_ID, slot_id(0), EdgeKind.CAUSAL)]
        for position in range(1, self.cfg.base_nodes):
            edges.append(ReasoningEdge(slot_id(position - 1), slot_id(position), EdgeKind.DATAFLOW))
        for position in range(2, self.cfg.base_nodes):
            if self._rng.random() < self.cfg.skip_edge_prob:
                source = int(self._rng.integers(0, position - 1))
                edges.append(ReasoningEdge(slot_id(source), slot_id(position), EdgeKind.CAUSAL))
        return edges

    def _draw_task(self, index: int) -> None:
        base = self.cfg.base_nodes
        if index == 0:
            self.steps.append([self._fresh_step() for _ in range(base)])
            self.shared.append(frozenset())
            return
        previous = self.steps[-1]
        shared = frozenset(
            int(slot) for slot in self._rng.choice(base, size=self.cfg.shared_slots, replace=False)
        )
        others = [slot for slot in range(base) if slot not in shared]
        variants = set(
            int(slot)
            for slot in self._rng.permutation(others)[: math.floor(self.cfg.drift * len(others))]
        )
        steps = []
        for slot in range(base):
            if slot in shared:
                steps.append(previous[slot])
            elif slot in variants:
                steps.append(self._variant(previous[slot], index))
            else:
                steps.append(self._fresh_step())
        self.steps.append(steps)
        self.shared.append(shared)

    def index_of(self, task: TaskSpec) -> int:
        if task.id not in self._index:
            raise KeyError(f"task '{task.id}' is not part of family '{self.cfg.name}'")
        return self._index[task.id]

    def plan(self, task: TaskSpec) -> ReasoningGraph:
        """
        Cold plan of ``task``.
        :param task: TaskSpec of this family
        :return: ReasoningGraph with ``base_nodes + 1`` nodes
        """
        index = self.index_of(task)
        nodes = [build_node(ROOT_ID, NodeKind.PROMPT, task.id, self.spec)]
        for slot, step in enumerate(self.steps[index]):
            nodes.append(build_node(slot_id(slot), step.kind, step.label, self.spec, step.meters))
        return build_graph(self.spec.dim, nodes, self.edges)

    def labels(self, index: int) -> set[str]:
        return {step.label for step in self.steps[index]}


def generate_family(
    cfg: FamilyConfig, spec: Optional[EmbeddingSpec] = None
) -> tuple[list[TaskSpec], FamilyPlanner]:
    """
    Tasks of a family and the planner that expands them.
    :param cfg: FamilyConfig
    :param spec: EmbeddingSpec for task demands and node features
    :return: tasks in order, FamilyPlanner
    """
    spec = spec or EmbeddingSpec()
    planner = FamilyPlanner(cfg, spec)
    tasks = [
        TaskSpec.create(task_id(cfg, index), describe(index), spec, cfg.name, cfg.seed + index)
        for index in range(cfg.n_tasks)
    ]
    logger.info(
        f"Generated family '{cfg.name}': {cfg.n_tasks} tasks, {cfg.base_nodes} steps each, "
        f"{cfg.shared_slots} shared per task, drift {cfg.drift}"
    )
    return tasks, planner
