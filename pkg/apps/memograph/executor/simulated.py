"""
Simulated node executors: replay annotated meters with seeded latency jitter.
"""
import hashlib
import threading
from typing import Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from memograph.constants import NodeKind
from memograph.executor.trace import NodeOutcome
from memograph.graph_core import CostAnnotation, Provenance, ReasoningNode, canonical_json

SEED_MASK = (1 << 64) - 1


class ExecutorProfile(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    latency_jitter_pct: float = Field(default=0.0, ge=0, le=100)
    seed: int = 0


def output_signature(label: str, inputs: Sequence[str]) -> str:
    """
    Digest of a node label and its sorted input signatures; identical subcomputations share it.
    """
    payload = canonical_json({"label": label, "inputs": sorted(inputs)})
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def provenance_signature(origin: Provenance) -> str:
    payload = canonical_json(
        {"graph_id": origin.graph_id, "version": origin.version, "node_id": origin.node_id}
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def _node_stream(node_id: str) -> int:
    return int.from_bytes(hashlib.sha256(node_id.encode("utf-8")).digest()[:8], "big")


class SimulatedExecutor:
    """
    Emits the node's annotated meters. Latency is scaled by ``1 + j * u`` with ``j`` the
    jitter fraction and ``u`` uniform in [-1, 1], drawn from a generator seeded by the
    profile seed, the run seed and the node id.
    """

    def __init__(self, profile: ExecutorProfile) -> None:
        self.profile = profile
        self.calls = 0
        self._lock = threading.Lock()

    def __call__(self, node: ReasoningNode, inputs: Sequence[str], seed: int) -> NodeOutcome:
        with self._lock:
            self.calls += 1
        meters = node.meters
        if self.profile.latency_jitter_pct > 0:
            rng = np.random.default_rng(
                [self.profile.seed & SEED_MASK, seed & SEED_MASK, _node_stream(node.id)]
            )
            factor = 1.0 + self.profile.latency_jitter_pct / 100.0 * rng.uniform(-1.0, 1.0)
            meters = CostAnnotation(
                tokens=meters.tokens,
                tool_calls=meters.tool_calls,
                latency_ms=max(0.0, meters.latency_ms * factor),
            )
        return NodeOutcome(output_signature(node.label, inputs), meters)


def simulated_executor(profile: ExecutorProfile) -> SimulatedExecutor:
    return SimulatedExecutor(profile)


def default_executors(profile: ExecutorProfile) -> dict[NodeKind, SimulatedExecutor]:
    """
    One shared simulated executor for every node kind.
    """
    executor = simulated_executor(profile)
    return {kind: executor for kind in NodeKind}
