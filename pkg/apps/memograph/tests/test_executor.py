import json
import logging
from dataclasses import replace
from unittest.mock import MagicMock

import numpy as np
import pytest

from memograph.constants import ExecutionStatus, NodeKind
from memograph.cost_model import CostCoefficients, structural_cost
from memograph.embedding import embed_text
from memograph.error_handler import ExecutorFailure, InvalidGraph, MissingExecutor
from memograph.executor import (
    ExecutorProfile,
    NodeOutcome,
    SimulatedExecutor,
    default_executors,
    execute,
    output_signature,
    provenance_signature,
    simulated_executor,
)
from memograph.graph_core import (
    CostAnnotation,
    Provenance,
    ReasoningEdge,
    ReasoningGraph,
    replace_nodes,
)
from memograph.tests.values import DIM, SPEC, chain, graph_of, make_node, random_dag

PARALLEL_GRAPHS = 20


def cite(graph: ReasoningGraph, refs: dict[str, Provenance]) -> ReasoningGraph:
    return replace_nodes(
        graph, {node_id: replace(graph.node(node_id), origin=ref) for node_id, ref in refs.items()}
    )


@pytest.fixture()
def simulated():
    """
    Shared jitter-free executor and its per-kind table.
    """
    executor = simulated_executor(ExecutorProfile())
    assert isinstance(executor, SimulatedExecutor)
    return executor, {kind: executor for kind in NodeKind}


class TestExecute:
    def test_diamond_inputs(self, sample_diamond, simulated):
        """Test that each node sees its predecessors' signatures in id order"""
        executor, executors = simulated
        trace = execute(sample_diamond, executors, seed=0)
        signatures = trace.signatures
        assert [event.node_id for event in trace.events] == ["a", "b", "c", "d"]
        assert trace.event("a").inputs == ()
        assert trace.event("d").inputs == (signatures["b"], signatures["c"])
        assert signatures["d"] == output_signature("d step", [signatures["b"], signatures["c"]])
        assert executor.calls == 4

    def test_walltime_is_cumulative(self, sample_diamond, simulated):
        """Test that walltime adds up executed latencies in order"""
        _, executors = simulated
        trace = execute(sample_diamond, executors, seed=0)
        assert [event.cumulative_walltime_ms for event in trace.events] == [5.0, 15.0, 30.0, 50.0]
        assert trace.walltime_ms == 50.0

    def test_same_subcomputation_same_signature(self, simulated):
        """Test that equal labels over equal inputs produce equal signatures"""
        _, executors = simulated
        first = execute(chain(["load", "join"], prefix="a"), executors, seed=0)
        second = execute(chain(["load", "join"], prefix="b"), executors, seed=9)
        assert first.signatures["a1"] == second.signatures["b1"]

    def test_reused_nodes_cost_nothing(self, sample_diamond, simulated):
        """Test that nodes with provenance replay instead of calling the executor"""
        executor, executors = simulated
        stitched = cite(
            sample_diamond, {"a": Provenance("src", 1, "a"), "b": Provenance("src", 1, "b")}
        )
        trace = execute(stitched, executors, seed=0)
        assert executor.calls == 2
        assert trace.reused_count == 2
        assert trace.event("a").status == ExecutionStatus.REUSED
        assert trace.event("a").meters == CostAnnotation()
        assert trace.event("a").output_signature == provenance_signature(Provenance("src", 1, "a"))
        assert trace.totals == CostAnnotation(20, 2, 35.0)

    def test_replays_recorded_signature(self, store, sample_diamond, simulated):
        """Test that a reused node replays the signature its source recorded"""
        _, executors = simulated
        store.put(
            "src", sample_diamond, tuple(embed_text(SPEC, "src")), node_signatures={"b": "sig-b"}
        )
        stitched = cite(
            sample_diamond, {"b": Provenance("src", 1, "b"), "c": Provenance("gone", 1, "c")}
        )
        trace = execute(stitched, executors, seed=0, repo_view=store.snapshot())
        assert trace.event("b").output_signature == "sig-b"
        assert trace.event("c").output_signature == provenance_signature(
            Provenance("gone", 1, "c")
        )
        assert trace.event("d").inputs == ("sig-b", trace.event("c").output_signature)

    @pytest.mark.parametrize("seed", [0, 3, 11])
    def test_reconciles_with_cost_model(self, seed, simulated):
        """Test that executed meters match the structural cost counters"""
        _, executors = simulated
        graph = random_dag(np.random.default_rng(seed), 8)
        stitched = cite(graph, {"g1": Provenance("src", 1, "g1")})
        trace = execute(stitched, executors, seed=seed)
        breakdown = structural_cost(stitched, CostCoefficients())
        assert trace.executed_count == breakdown.calls
        assert trace.totals.tokens == breakdown.tokens
        assert trace.totals.tool_calls == breakdown.tool_calls
        assert trace.walltime_ms == pytest.approx(breakdown.latency_ms)

    def test_veto_executes_node(self, sample_diamond, simulated, caplog):
        """Test that a vetoed reuse is logged and executed"""
        executor, executors = simulated
        stitched = cite(sample_diamond, {"b": Provenance("src", 1, "b")})
        with caplog.at_level(logging.WARNING, logger="memograph"):
            trace = execute(stitched, executors, seed=0, reuse_guard=lambda node, origin: False)
        assert "vetoed" in caplog.text
        assert executor.calls == 4
        assert trace.event("b").executed

    def test_guard_sees_provenance(self, sample_diamond, simulated):
        """Test that the reuse guard is asked about every cited node"""
        _, executors = simulated
        origin = Provenance("src", 1, "b")
        guard = MagicMock(return_value=True)
        stitched = cite(sample_diamond, {"b": origin})
        execute(stitched, executors, seed=0, reuse_guard=guard)
        guard.assert_called_once_with(stitched.node("b"), origin)

    def test_to_jsonl(self, sample_diamond, simulated):
        """Test one line per event plus a totals line"""
        _, executors = simulated
        lines = execute(sample_diamond, executors, seed=4).to_jsonl().splitlines()
        assert len(lines) == 5
        assert json.loads(lines[0])["node_id"] == "a"
        summary = json.loads(lines[-1])
        assert summary["executed"] == 4
        assert summary["seed"] == 4
        assert summary["totals"]["tokens"] == 40


class TestFailures:
    def test_missing_executor(self, simulated):
        """Test that a kind without executor is refused before running"""
        executor, _ = simulated
        graph = graph_of([make_node("a"), make_node("b", kind=NodeKind.TOOL_CALL)])
        with pytest.raises(MissingExecutor):
            execute(graph, {NodeKind.GENERIC: executor}, seed=0)
        assert executor.calls == 0

    def test_executor_failure(self, sample_diamond):
        """Test that an executor exception names the failing node"""
        failing = MagicMock(side_effect=RuntimeError("boom"))
        with pytest.raises(ExecutorFailure) as error:
            execute(sample_diamond, {NodeKind.GENERIC: failing}, seed=0)
        assert error.value.node_id == "a"

    @pytest.mark.parametrize("workers", [1, 3])
    def test_failure_in_parallel(self, sample_diamond, workers):
        """Test that a failing node stops the run in both modes"""

        def flaky(node, inputs, seed):
            if node.id == "c":
                raise ValueError("bad input")
            return NodeOutcome(output_signature(node.label, inputs), node.meters)

        with pytest.raises(ExecutorFailure) as error:
            execute(sample_diamond, {NodeKind.GENERIC: flaky}, seed=0, workers=workers)
        assert error.value.node_id == "c"

    def test_invalid_graph(self, simulated):
        """Test that a cyclic graph is rejected"""
        _, executors = simulated
        a, b = make_node("a"), make_node("b")
        cyclic = ReasoningGraph(DIM, [a, b], [ReasoningEdge("a", "b"), ReasoningEdge("b", "a")])
        with pytest.raises(InvalidGraph):
            execute(cyclic, executors, seed=0)


class TestJitter:
    def test_deterministic(self, sample_diamond):
        """Test that the same seeds give the same jittered latencies"""
        profile = ExecutorProfile(latency_jitter_pct=20.0, seed=5)
        first = execute(sample_diamond, default_executors(profile), seed=7)
        second = execute(sample_diamond, default_executors(profile), seed=7)
        assert first == second

    def test_bounded_and_seeded(self, sample_diamond):
        """Test that jitter stays within its percentage and follows the run seed"""
        profile = ExecutorProfile(latency_jitter_pct=20.0, seed=5)
        first = execute(sample_diamond, default_executors(profile), seed=7)
        other = execute(sample_diamond, default_executors(profile), seed=8)
        for event in first.events:
            base = sample_diamond.node(event.node_id).meters.latency_ms
            assert 0.8 * base <= event.meters.latency_ms <= 1.2 * base
        assert first.walltime_ms != other.walltime_ms
        assert first.signatures == other.signatures

    def test_profile_bounds(self):
        """Test that the jitter percentage is limited to [0, 100]"""
        with pytest.raises(ValueError):
            ExecutorProfile(latency_jitter_pct=150.0)


class TestParallel:
    def test_matches_inline(self):
        """Test that threaded execution yields the inline trace"""
        rng = np.random.default_rng(21)
        profile = ExecutorProfile(latency_jitter_pct=10.0, seed=1)
        for _ in range(PARALLEL_GRAPHS):
            graph = random_dag(rng, int(rng.integers(1, 12)), edge_prob=0.3)
            if len(graph) > 2:
                graph = cite(graph, {"g1": Provenance("src", 1, "g1")})
            inline = execute(graph, default_executors(profile), seed=2)
            threaded = execute(graph, default_executors(profile), seed=2, workers=4)
            assert threaded == inline
