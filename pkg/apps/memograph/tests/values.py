"""
Graph builders and constants shared by the test modules.
"""
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
from hypothesis import settings

from memograph.constants import EdgeKind, NodeKind
from memograph.cost_model import CostCoefficients
from memograph.embedding import EmbeddingSpec, build_node
from memograph.graph_core import (
    CostAnnotation,
    Provenance,
    ReasoningEdge,
    ReasoningGraph,
    ReasoningNode,
    build_graph,
    topological_order,
)
from memograph.memo_engine import MemoEngine, StitchState, TaskSpec

DIM = 64
SPEC = EmbeddingSpec(dim=DIM, seed=17)
SMALL_DIM = 8

PROPERTY_SETTINGS = settings(deadline=None, max_examples=60)

UNIT_COEFFS = CostCoefficients(
    a1=1.0, a2=0.0, a3=0.0, c_llm=0.0, c_tool=0.0, c_lat=0.0, c_retrieve=0.0
)


def make_node(
    node_id: str,
    label: Optional[str] = None,
    kind: NodeKind = NodeKind.GENERIC,
    meters: Optional[CostAnnotation] = None,
    origin: Optional[Provenance] = None,
    spec: EmbeddingSpec = SPEC,
) -> ReasoningNode:
    return build_node(node_id, kind, label or f"step {node_id}", spec, meters, origin)


def unit(index: int, dim: int = SMALL_DIM) -> tuple[float, ...]:
    vector = [0.0] * dim
    vector[index] = 1.0
    return tuple(vector)


def blend(first: int, second: int, dim: int = SMALL_DIM) -> tuple[float, ...]:
    vector = np.zeros(dim)
    vector[first] = vector[second] = 1.0
    return tuple(vector / np.linalg.norm(vector))


def tilted(major: int, minor: int, dim: int = SMALL_DIM) -> tuple[float, ...]:
    """
    Unit vector twice as long along ``major`` as along ``minor``.
    """
    vector = np.zeros(dim)
    vector[major], vector[minor] = 2.0, 1.0
    return tuple(vector / np.linalg.norm(vector))


def vector_node(
    node_id: str,
    feature: Sequence[float],
    label: Optional[str] = None,
    kind: NodeKind = NodeKind.GENERIC,
    meters: Optional[CostAnnotation] = None,
) -> ReasoningNode:
    return ReasoningNode(
        id=node_id,
        kind=kind,
        label=label or node_id,
        feature=tuple(feature),
        meters=meters or CostAnnotation(),
    )


def graph_of(
    nodes: Iterable[ReasoningNode],
    edges: Iterable[tuple[str, str]] = (),
    dim: int = DIM,
    kind: EdgeKind = EdgeKind.DATAFLOW,
) -> ReasoningGraph:
    return build_graph(dim, list(nodes), [ReasoningEdge(src, dst, kind) for src, dst in edges])


def chain(labels: Sequence[str], prefix: str = "c", **node_options) -> ReasoningGraph:
    ids = [f"{prefix}{index}" for index in range(len(labels))]
    nodes = [make_node(node_id, label, **node_options) for node_id, label in zip(ids, labels)]
    return graph_of(nodes, zip(ids, ids[1:]))


def diamond() -> ReasoningGraph:
    nodes = [
        make_node(node_id, f"{node_id} step", meters=CostAnnotation(10, 1, 5.0 * (i + 1)))
        for i, node_id in enumerate("abcd")
    ]
    return graph_of(nodes, [("a", "b"), ("a", "c"), ("b", "d"), ("c", "d")])


def random_dag(
    rng: np.random.Generator,
    n_nodes: int,
    kinds: Sequence[NodeKind] = (NodeKind.GENERIC, NodeKind.TOOL_CALL),
    labels: Sequence[str] = ("load", "join"),
    edge_prob: float = 0.4,
    spec: EmbeddingSpec = SPEC,
) -> ReasoningGraph:
    """
    DAG over ids g0..g{n-1}; edges only point from lower to higher index.
    """
    nodes = []
    for index in range(n_nodes):
        meters = CostAnnotation(
            tokens=int(rng.integers(0, 500)),
            tool_calls=int(rng.integers(0, 3)),
            latency_ms=float(rng.integers(0, 2000)) / 4.0,
        )
        kind = kinds[int(rng.integers(0, len(kinds)))]
        label = labels[int(rng.integers(0, len(labels)))]
        nodes.append(make_node(f"g{index}", label, kind, meters, spec=spec))
    edges = [
        (f"g{src}", f"g{dst}")
        for src in range(n_nodes)
        for dst in range(src + 1, n_nodes)
        if rng.random() < edge_prob
    ]
    return graph_of(nodes, edges, dim=spec.dim)


@dataclass(frozen=True)
class FixedPlanner:
    graph: ReasoningGraph

    def plan(self, task: TaskSpec) -> ReasoningGraph:
        return self.graph


def exhaustive_best(engine: MemoEngine, task: TaskSpec, plan: ReasoningGraph) -> float:
    """
    Lowest loss over every stitching in plan order: each uncovered node is generated or
    takes any admissible candidate, whatever its loss change, and every resulting state
    is completed by greedy rescans.
    """
    states = {StitchState(plan).key: StitchState(plan)}
    for node_id in topological_order(plan):
        pool = {}
        for state in states.values():
            pool.setdefault(state.key, state)
            if node_id in state.covered:
                continue
            for candidate in engine.find_candidates(task.demand, state, node_id):
                if candidate.admissible:
                    pool.setdefault(candidate.stitched.key, candidate.stitched)
        states = pool
    return min(engine.loss(engine.complete(task, state)[0]).total for state in states.values())
