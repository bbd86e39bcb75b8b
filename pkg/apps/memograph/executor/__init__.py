from .runner import NodeExecutor, ReuseGuard, approve_all, execute, replay_signature
from .simulated import (
    ExecutorProfile,
    SimulatedExecutor,
    default_executors,
    output_signature,
    provenance_signature,
    simulated_executor,
)
from .trace import ExecutionEvent, ExecutionTrace, NodeOutcome, meters_document, sum_meters
