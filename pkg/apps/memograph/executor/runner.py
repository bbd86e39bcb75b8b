"""
Topological execution of a stitched reasoning graph.
"""
import logging
from collections import deque
from concurrent.futures import FIRST_COMPLETED, Future, ThreadPoolExecutor, wait
from typing import Callable, Mapping, Optional, Protocol, Sequence

from memograph.constants import ExecutionStatus, NodeKind
from memograph.error_handler import (
    ExecutorFailure,
    InvalidGraph,
    MemographError,
    MissingExecutor,
    NotFound,
    VersionNotFound,
)
from memograph.executor.simulated import provenance_signature
from memograph.executor.trace import ExecutionEvent, ExecutionTrace, NodeOutcome
from memograph.graph_core import (
    CostAnnotation,
    Provenance,
    ReasoningGraph,
    ReasoningNode,
    topological_order,
    validate,
)
from memograph.repository import RepositoryView

logger = logging.getLogger(__name__)

ReuseGuard = Callable[[ReasoningNode, Provenance], bool]


class NodeExecutor(Protocol):
    """
    Deterministic given (node, inputs, run seed).
    """

    def __call__(self, node: ReasoningNode, inputs: Sequence[str], seed: int) -> NodeOutcome:
        ...


def approve_all(node: ReasoningNode, origin: Provenance) -> bool:
    return True


def replay_signature(origin: Provenance, repo_view: Optional[RepositoryView]) -> str:
    """
    Signature recorded for the source node of a reused node, or a digest of the provenance
    when the source never recorded one.
    """
    if repo_view is not None:
        try:
            entry = repo_view.get(origin.graph_id, origin.version)
        except (NotFound, VersionNotFound):
            logger.warning(
                f"Source {origin.graph_id}@{origin.version} is gone, replaying provenance digest"
            )
        else:
            signature = entry.node_signatures.get(origin.node_id)
            if signature is not None:
                return signature
    return provenance_signature(origin)


def _run(
    executor: NodeExecutor, node: ReasoningNode, inputs: tuple[str, ...], seed: int
) -> NodeOutcome:
    try:
        return executor(node, inputs, seed)
    except MemographError:
        raise
    except Exception as exc:
        raise ExecutorFailure(node.id, f"{type(exc).__name__}: {exc}") from exc


def execute(
    graph: ReasoningGraph,
    executors: Mapping[NodeKind, NodeExecutor],
    seed: int,
    reuse_guard: Optional[ReuseGuard] = None,
    repo_view: Optional[RepositoryView] = None,
    workers: int = 1,
) -> ExecutionTrace:
    """
    Run every node after its predecessors. Nodes carrying provenance replay their source
    signature and spend nothing unless ``reuse_guard`` vetoes them. With several workers,
    ready nodes run concurrently but events keep the deterministic topological order.
    :param graph: valid ReasoningGraph
    :param executors: executor per node kind
    :param seed: run seed handed to every executor
    :param reuse_guard: (node, provenance) -> bool, approves every reuse by default
    :param repo_view: repository or snapshot holding the recorded source signatures
    :param workers: thread count, 1 runs inline
    :return: ExecutionTrace
    """
    violations = validate(graph)
    if violations:
        raise InvalidGraph(violations)
    missing = {node.kind.value for node in graph.nodes if node.kind not in executors}
    if missing:
        raise MissingExecutor(missing)

    guard = reuse_guard or approve_all
    order = topological_order(graph)
    reused: dict[str, Provenance] = {}
    for node_id in order:
        node = graph.node(node_id)
        if node.origin is None:
            continue
        if guard(node, node.origin):
            reused[node_id] = node.origin
        else:
            logger.warning(
                f"Reuse of {node.origin.graph_id}@{node.origin.version}:{node.origin.node_id} "
                f"vetoed for node {node_id}, executing it"
            )

    inputs: dict[str, tuple[str, ...]] = {}
    outcomes: dict[str, NodeOutcome] = {}

    def inputs_of(node_id: str) -> tuple[str, ...]:
        return tuple(
            outcomes[parent].output_signature for parent in sorted(graph.predecessors(node_id))
        )

    def replay(node_id: str) -> None:
        outcomes[node_id] = NodeOutcome(
            replay_signature(reused[node_id], repo_view), CostAnnotation()
        )

    if workers <= 1:
        for node_id in order:
            inputs[node_id] = inputs_of(node_id)
            if node_id in reused:
                replay(node_id)
            else:
                node = graph.node(node_id)
                outcomes[node_id] = _run(executors[node.kind], node, inputs[node_id], seed)
    else:
        _execute_parallel(
            graph, executors, seed, order, reused, inputs_of, replay, inputs, outcomes, workers
        )

    events = []
    walltime = 0.0
    for node_id in order:
        outcome = outcomes[node_id]
        status = ExecutionStatus.REUSED if node_id in reused else ExecutionStatus.EXECUTED
        if status == ExecutionStatus.EXECUTED:
            walltime += outcome.meters.latency_ms
        events.append(
            ExecutionEvent(
                node_id=node_id,
                status=status,
                output_signature=outcome.output_signature,
                meters=outcome.meters,
                inputs=inputs[node_id],
                cumulative_walltime_ms=walltime,
                origin=reused.get(node_id),
            )
        )
    trace = ExecutionTrace.from_events(events, seed=seed)
    logger.info(
        f"Executed {trace.executed_count} nodes, replayed {trace.reused_count}; "
        f"tokens={trace.totals.tokens} tool_calls={trace.totals.tool_calls} "
        f"walltime={trace.walltime_ms:.3f}ms"
    )
    return trace


def _execute_parallel(
    graph: ReasoningGraph,
    executors: Mapping[NodeKind, NodeExecutor],
    seed: int,
    order: list[str],
    reused: Mapping[str, Provenance],
    inputs_of: Callable[[str], tuple[str, ...]],
    replay: Callable[[str], None],
    inputs: dict[str, tuple[str, ...]],
    outcomes: dict[str, NodeOutcome],
    workers: int,
) -> None:
    position = {node_id: index for index, node_id in enumerate(order)}
    waiting = {node_id: len(graph.predecessors(node_id)) for node_id in order}
    ready = deque(node_id for node_id in order if waiting[node_id] == 0)
    running: dict[Future, str] = {}

    def finish(node_id: str) -> None:
        for child in sorted(graph.successors(node_id), key=position.__getitem__):
            waiting[child] -= 1
            if waiting[child] == 0:
                ready.append(child)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        while ready or running:
            while ready:
                node_id = ready.popleft()
                inputs[node_id] = inputs_of(node_id)
                if node_id in reused:
                    replay(node_id)
                    finish(node_id)
                    continue
                node = graph.node(node_id)
                future = pool.submit(_run, executors[node.kind], node, inputs[node_id], seed)
                running[future] = node_id
            if not running:
                continue
            done, _ = wait(running, return_when=FIRST_COMPLETED)
            for future in sorted(done, key=lambda item: position[running[item]]):
                node_id = running.pop(future)
                outcomes[node_id] = future.result()
                logger.debug(f"Node {node_id} completed")
                finish(node_id)
