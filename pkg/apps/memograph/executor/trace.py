"""
Execution events and the trace an execution run produces.
"""
from dataclasses import dataclass
from typing import Any, Iterable, Optional

from memograph.constants import ExecutionStatus
from memograph.graph_core import CostAnnotation, Provenance, canonical_json


def meters_document(meters: CostAnnotation) -> dict[str, Any]:
    return {
        "tokens": meters.tokens,
        "tool_calls": meters.tool_calls,
        "latency_ms": meters.latency_ms,
    }


@dataclass(frozen=True)
class NodeOutcome:
    """
    What a node executor returns: a digest standing in for the output, and the meters spent.
    """

    output_signature: str
    meters: CostAnnotation


@dataclass(frozen=True)
class ExecutionEvent:
    node_id: str
    status: ExecutionStatus
    output_signature: str
    meters: CostAnnotation
    inputs: tuple[str, ...] = ()
    cumulative_walltime_ms: float = 0.0
    origin: Optional[Provenance] = None

    @property
    def executed(self) -> bool:
        return self.status == ExecutionStatus.EXECUTED

    def to_document(self) -> dict[str, Any]:
        return {
            "node_id": self.node_id,
            "status": self.status.value,
            "output_signature": self.output_signature,
            "meters": meters_document(self.meters),
            "inputs": list(self.inputs),
            "cumulative_walltime_ms": self.cumulative_walltime_ms,
            "origin": (
                {
                    "graph_id": self.origin.graph_id,
                    "version": self.origin.version,
                    "node_id": self.origin.node_id,
                }
                if self.origin is not None
                else None
            ),
        }


def sum_meters(meters: Iterable[CostAnnotation]) -> CostAnnotation:
    total = CostAnnotation()
    for item in meters:
        total = total + item
    return total


@dataclass(frozen=True)
class ExecutionTrace:
    """
    Events in the deterministic topological order of the executed graph.
    ``totals`` sums the meters of executed events only.
    """

    events: tuple[ExecutionEvent, ...]
    totals: CostAnnotation
    seed: int = 0

    @classmethod
    def from_events(cls, events: Iterable[ExecutionEvent], seed: int = 0) -> "ExecutionTrace":
        events = tuple(events)
        totals = sum_meters(event.meters for event in events if event.executed)
        return cls(events=events, totals=totals, seed=seed)

    @property
    def walltime_ms(self) -> float:
        return self.events[-1].cumulative_walltime_ms if self.events else 0.0

    @property
    def signatures(self) -> dict[str, str]:
        return {event.node_id: event.output_signature for event in self.events}

    @property
    def executed_count(self) -> int:
        return sum(1 for event in self.events if event.executed)

    @property
    def reused_count(self) -> int:
        return len(self.events) - self.executed_count

    def event(self, node_id: str) -> ExecutionEvent:
        for event in self.events:
            if event.node_id == node_id:
                return event
        raise KeyError(node_id)

    def to_jsonl(self) -> str:
        """
        One canonical JSON line per event followed by a totals line.
        """
        lines = [canonical_json(event.to_document()) for event in self.events]
        lines.append(
            canonical_json(
                {
                    "totals": meters_document(self.totals),
                    "walltime_ms": self.walltime_ms,
                    "executed": self.executed_count,
                    "reused": self.reused_count,
                    "seed": self.seed,
                }
            )
        )
        return "\n".join(lines) + "\n"
