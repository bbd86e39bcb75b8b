"""
Cold and memoized runs of a task sequence against one store.
"""
import logging
from dataclasses import dataclass
from typing import Any, Optional, Sequence

from memograph.constants import EntrySource, RunMode
from memograph.cost_model import CostCoefficients, LossBreakdown, total_loss
from memograph.executor import ExecutorProfile, default_executors, execute
from memograph.graph_core import ReasoningGraph
from memograph.memo_engine import Planner, ReusePolicy, StitchTrace, TaskSpec, memo
from memograph.repository import EntryRef, Repository
from memograph.similarity import SimilarityConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunReport:
    """
    Outcome of one task: the loss of the graph that ran, reuse ratios and measured wall
    time, plus references to the stored result.
    """

    task_id: str
    mode: RunMode
    breakdown: LossBreakdown
    rho_nodes: float
    rho_edges: float
    walltime_ms: float
    stored_ref: EntryRef
    merges: int = 0
    strategy: str = ""
    residual_delta: Optional[float] = None

    def to_document(self) -> dict[str, Any]:
        return {
            "task_id": self.task_id,
            "mode": self.mode.value,
            "breakdown": self.breakdown.to_document(),
            "rho_nodes": self.rho_nodes,
            "rho_edges": self.rho_edges,
            "walltime_ms": self.walltime_ms,
            "stored_ref": {"graph_id": self.stored_ref[0], "version": self.stored_ref[1]},
            "merges": self.merges,
            "strategy": self.strategy,
            "residual_delta": self.residual_delta,
        }


def reuse_ratios(graph: ReasoningGraph) -> tuple[float, float]:
    """
    Fraction of reused nodes, and of edges whose endpoints are both reused from the same
    stored entry.
    :param graph: stitched ReasoningGraph
    :return: (rho_nodes, rho_edges)
    """
    if graph.is_empty:
        return 0.0, 0.0
    reused = sum(1 for node in graph.nodes if node.origin is not None)
    inherited = 0
    for edge in graph.edges:
        src, dst = graph.node(edge.src).origin, graph.node(edge.dst).origin
        if src is not None and dst is not None and src.entry_ref == dst.entry_ref:
            inherited += 1
    rho_edges = inherited / len(graph.edges) if graph.edges else 0.0
    return reused / len(graph), rho_edges


def run_experiment(
    tasks: Sequence[TaskSpec],
    planner: Planner,
    store: Repository,
    policy: ReusePolicy,
    coeffs: CostCoefficients,
    mode: RunMode,
    cfg: Optional[SimilarityConfig] = None,
    profile: Optional[ExecutorProfile] = None,
    seed: int = 0,
    workers: int = 1,
) -> list[RunReport]:
    """
    Run ``tasks`` in order. Each task is planned cold or stitched from the store, executed,
    reported, and then stored in both modes so the repository grows alike.
    :param tasks: tasks in order
    :param planner: cold planner of the tasks
    :param store: open Repository
    :param policy: ReusePolicy
    :param coeffs: CostCoefficients
    :param mode: RunMode
    :param cfg: SimilarityConfig; alpha comes from the policy
    :param profile: ExecutorProfile of the simulated executors
    :param seed: run seed mixed into every execution
    :param workers: executor threads per task
    :return: one RunReport per task, in task order
    """
    similarity_cfg = policy.similarity_config(cfg)
    executors = default_executors(profile or ExecutorProfile())
    reports = []
    for position, task in enumerate(tasks):
        trace: Optional[StitchTrace] = None
        snapshot = store.snapshot()
        if mode == RunMode.COLD:
            graph = planner.plan(task)
            breakdown = total_loss(graph, [], coeffs, policy.lam, snapshot, similarity_cfg)
        else:
            trace = memo(task, snapshot, policy, coeffs, similarity_cfg, planner)
            graph = trace.final_graph
            breakdown = trace.loss
            for region in trace.regions:
                store.record_reuse((region.graph_id, region.version))

        execution = execute(
            graph, executors, seed=seed + task.seed, repo_view=snapshot, workers=workers
        )
        rho_nodes, rho_edges = reuse_ratios(graph)
        stored_ref = store.put(
            task.id,
            graph,
            task.demand,
            metrics={
                "loss": breakdown.total,
                "cost": breakdown.cost,
                "inconsistency": breakdown.inconsistency,
                "rho_nodes": rho_nodes,
                "walltime_ms": execution.walltime_ms,
            },
            node_signatures=execution.signatures,
            source=EntrySource.HARNESS,
        )
        report = RunReport(
            task_id=task.id,
            mode=mode,
            breakdown=breakdown,
            rho_nodes=rho_nodes,
            rho_edges=rho_edges,
            walltime_ms=execution.walltime_ms,
            stored_ref=stored_ref,
            merges=len(trace.accepted) if trace is not None else 0,
            strategy=trace.strategy if trace is not None else "",
            residual_delta=trace.residual_delta if trace is not None else None,
        )
        logger.info(
            f"[{position + 1}/{len(tasks)}] {task.id} {mode.value}: L={breakdown.total:.6g} "
            f"cost={breakdown.cost:.6g} inconsistency={breakdown.inconsistency:.6g} "
            f"rho={rho_nodes:.3f}"
        )
        reports.append(report)
    return reports


def aggregate(reports: Sequence[RunReport]) -> dict[str, float]:
    """
    Means over tasks 2..n; the first task never has history. A single report is its own
    aggregate.
    :param reports: RunReports of one run, in task order
    :return: mean_cost, mean_inconsistency, mean_rho, mean_L and mean_walltime_ms
    """
    if not reports:
        raise ValueError("no reports to aggregate")
    window = reports[1:] if len(reports) > 1 else reports
    count = len(window)
    return {
        "mean_cost": sum(report.breakdown.cost for report in window) / count,
        "mean_inconsistency": sum(report.breakdown.inconsistency for report in window) / count,
        "mean_rho": sum(report.rho_nodes for report in window) / count,
        "mean_L": sum(report.breakdown.total for report in window) / count,
        "mean_walltime_ms": sum(report.walltime_ms for report in window) / count,
    }
