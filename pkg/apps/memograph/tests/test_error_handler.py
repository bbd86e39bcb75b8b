import pytest

from memograph.error_handler import (
    CycleIntroduced,
    DanglingProvenance,
    DimensionMismatch,
    ExecutorFailure,
    InvalidGraph,
    MemographError,
    MissingExecutor,
    NotFound,
    StoreCorruption,
    StoreMismatch,
    VersionNotFound,
)


class TestMessages:
    @pytest.mark.parametrize(
        "error, message",
        [
            (CycleIntroduced("a", "b"), "Edge a -> b would introduce a cycle."),
            (
                DimensionMismatch(64, 32, "task embedding"),
                "Expected dimension 64, got 32 (task embedding).",
            ),
            (NotFound("sales-t001"), "Graph 'sales-t001' is not in the repository."),
            (VersionNotFound("sales-t001", 4), "Graph 'sales-t001' has no version 4."),
            (
                StoreCorruption("store/log.jsonl", 18, "checksum mismatch"),
                "Store log store/log.jsonl is corrupt at offset 18: checksum mismatch.",
            ),
            (
                StoreMismatch("store", "dim", 64, 32),
                "Store store has dim=64, but 32 was requested.",
            ),
            (
                DanglingProvenance("src", 2, "entry pruned"),
                "Region cites missing source src@2 (entry pruned).",
            ),
        ],
    )
    def test_templates(self, error, message):
        """Test that every error renders its message template"""
        assert str(error) == message
        assert isinstance(error, MemographError)

    def test_missing_executor_sorts_kinds(self):
        """Test that missing kinds are listed in sorted order"""
        error = MissingExecutor({"tool_call", "prompt"})
        assert error.kinds == ["prompt", "tool_call"]
        assert str(error) == "No executor registered for node kinds: prompt, tool_call."

    def test_invalid_graph_keeps_violations(self):
        """Test that validation failures keep the violation list"""
        error = InvalidGraph(["cycle a -> b", "dangling edge c -> z"])
        assert error.violations == ["cycle a -> b", "dangling edge c -> z"]
        assert "cycle a -> b; dangling edge c -> z" in str(error)


class TestAttributes:
    def test_executor_failure(self):
        """Test that an executor failure names its node"""
        with pytest.raises(MemographError) as error:
            raise ExecutorFailure("n03", "TimeoutError: slow tool")
        assert error.value.node_id == "n03"
        assert error.value.reason == "TimeoutError: slow tool"

    def test_store_corruption_offset(self):
        """Test that corruption reports keep the byte offset"""
        error = StoreCorruption("log.jsonl", 1024, "bad frame")
        assert (error.path, error.offset, error.reason) == ("log.jsonl", 1024, "bad frame")

    def test_dangling_provenance(self):
        """Test that a dangling citation keeps the cited entry"""
        error = DanglingProvenance("src", 3, "node n01 missing")
        assert (error.graph_id, error.version) == ("src", 3)
