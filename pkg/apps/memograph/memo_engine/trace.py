"""
Stitching states, scored candidates and the merge trace a stitching run leaves behind.
"""
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Mapping, Optional, Sequence

from memograph.constants import MergeAction, ReasonCode
from memograph.cost_model import LossBreakdown, ReuseRegion
from memograph.graph_core import ReasoningGraph, canonical_json, graph_to_document
from memograph.repository import QueryResult

LOSS_TOLERANCE = 1e-9

StateKey = tuple[frozenset, frozenset]


@dataclass(frozen=True, eq=False)
class StitchState:
    """
    A cold plan with some of its nodes grafted from the repository. The structure never
    changes, so the state is fully described by its regions and node origins.
    """

    graph: ReasoningGraph
    regions: tuple[ReuseRegion, ...] = ()

    @cached_property
    def covered(self) -> frozenset[str]:
        return frozenset(node_id for region in self.regions for node_id in region.nodes)

    @cached_property
    def key(self) -> StateKey:
        origins = frozenset(
            (node.id, node.origin) for node in self.graph.nodes if node.origin is not None
        )
        return frozenset(self.regions), origins

    @cached_property
    def order_key(self) -> tuple:
        return tuple(
            sorted((region.source_ref, tuple(sorted(region.nodes))) for region in self.regions)
        )


@dataclass(frozen=True)
class MatchCandidate:
    """
    A retrieved subgraph for frontier node ``node`` with its marginal loss change.
    Inadmissible candidates carry reason codes and an infinite ``delta_loss``.
    """

    node: str
    result: QueryResult
    delta_loss: float = math.inf
    admissible: bool = False
    reasons: tuple[ReasonCode, ...] = ()
    mapping: Mapping[str, str] = field(default_factory=dict, compare=False)
    stitched: Optional[StitchState] = field(default=None, compare=False, repr=False)

    @property
    def sort_key(self) -> tuple[float, float, str, int, str]:
        return (
            self.delta_loss,
            -self.result.score,
            self.result.graph_id,
            self.result.version,
            self.result.anchor,
        )

    def to_document(self) -> dict[str, Any]:
        return {
            "graph_id": self.result.graph_id,
            "version": self.result.version,
            "anchor": self.result.anchor,
            "score": self.result.score,
            "delta_loss": self.delta_loss if math.isfinite(self.delta_loss) else None,
            "admissible": self.admissible,
            "reasons": [reason.value for reason in self.reasons],
        }


@dataclass(frozen=True)
class MergeEvent:
    """
    One decision at a frontier node. ``source`` is (graph_id, version, anchor) for reuse.
    A lookahead merge was taken by beam search although it did not pass the margin.
    """

    node: str
    action: MergeAction
    loss_before: float
    loss_after: float
    source: Optional[tuple[str, int, str]] = None
    delta: Optional[float] = None
    pass_index: int = 0
    candidates: tuple[MatchCandidate, ...] = ()
    lookahead: bool = False

    @property
    def accepted(self) -> bool:
        return self.action == MergeAction.REUSE

    def to_document(self) -> dict[str, Any]:
        return {
            "node": self.node,
            "action": self.action.value,
            "source": (
                {"graph_id": self.source[0], "version": self.source[1], "anchor": self.source[2]}
                if self.source is not None
                else None
            ),
            "loss_before": self.loss_before,
            "loss_after": self.loss_after,
            "delta": self.delta,
            "pass": self.pass_index,
            "lookahead": self.lookahead,
            "candidates": [candidate.to_document() for candidate in self.candidates],
        }


@dataclass(frozen=True)
class StitchTrace:
    """
    Ordered merge events of a stitching run, the stitched graph and its loss.

    ``residual_delta`` is the best admissible loss change left in the final rescan, None
    when no admissible candidate remained.
    """

    task_id: str
    events: tuple[MergeEvent, ...]
    final_graph: ReasoningGraph
    regions: tuple[ReuseRegion, ...]
    loss: LossBreakdown
    tau_margin: float = 0.0
    residual_delta: Optional[float] = None
    strategy: str = "greedy"

    @property
    def accepted(self) -> list[MergeEvent]:
        return [event for event in self.events if event.accepted]

    @property
    def reused_nodes(self) -> frozenset[str]:
        return frozenset(node_id for region in self.regions for node_id in region.nodes)

    def to_document(self) -> dict[str, Any]:
        return {
            "task_id": self.task_id,
            "strategy": self.strategy,
            "events": [event.to_document() for event in self.events],
            "final_graph": graph_to_document(self.final_graph),
            "regions": [region.to_document() for region in self.regions],
            "loss": self.loss.to_document(),
            "residual_delta": self.residual_delta,
        }

    def to_json(self) -> str:
        return canonical_json(self.to_document())


def best_admissible_delta(candidates: Sequence[MatchCandidate]) -> Optional[float]:
    deltas = [candidate.delta_loss for candidate in candidates if candidate.admissible]
    return min(deltas) if deltas else None


def verify_monotone(
    trace: StitchTrace, rescanned: Optional[Sequence[MatchCandidate]] = None
) -> bool:
    """
    Check that every accepted merge strictly lowered the loss by more than the margin, that
    losses never rise between merges and that the final graph admits no gated merge.

    Lookahead merges of a beam trace may raise the loss on their own; such a trace must
    instead end more than the margin below the loss it started from.

    Without ``rescanned`` the stability check trusts the ``residual_delta`` recorded in the
    trace. Pass the candidates of ``MemoEngine.rescan`` to check against a fresh search.
    :param trace: StitchTrace
    :param rescanned: candidates found at the uncovered nodes of the final graph
    :return: bool
    """
    previous_after: Optional[float] = None
    for event in trace.events:
        if not event.accepted:
            if event.loss_after > event.loss_before:
                return False
            continue
        if previous_after is not None and event.loss_before > previous_after + LOSS_TOLERANCE:
            return False
        previous_after = event.loss_after
        if event.lookahead:
            continue
        if not event.loss_after < event.loss_before:
            return False
        if not event.loss_after - event.loss_before < -trace.tau_margin:
            return False
    if any(event.lookahead for event in trace.events):
        start = trace.events[0].loss_before
        if not trace.loss.total - start < -trace.tau_margin:
            return False

    residual = trace.residual_delta if rescanned is None else best_admissible_delta(rescanned)
    if residual is not None and residual < -trace.tau_margin:
        return False
    return True
