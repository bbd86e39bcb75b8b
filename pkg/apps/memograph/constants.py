""" This module contains the closed enumerations and constants used across memograph. """

from enum import Enum

VERSION = "0.1.0"
STORE_FORMAT = "memograph-store-v1"
DEFAULT_DIM = 64
DEFAULT_EMBEDDING_SEED = 17
DEFAULT_EXACT_GED_MAX_NODES = 8
DEFAULT_CANDIDATE_DEPTH = 3
PREFILTER_WIDTH_FACTOR = 4
REPORT_FLOAT_FORMAT = "%.9g"

SWEEP_COLUMNS: list[str] = [
    "lambda",
    "tau_margin",
    "beam",
    "mean_cost",
    "mean_inconsistency",
    "mean_rho",
    "mean_L",
]


class ChoicesMixin:
    """
    Adds a ``choices`` helper to value enumerations.
    """

    @classmethod
    def choices(cls) -> list[str]:
        """
        This method returns the values of the enum.
        :return: list of values
        """
        return [choice.value for choice in cls]  # type: ignore[attr-defined]


class NodeKind(ChoicesMixin, Enum):
    """
    Typed node interfaces of a reasoning graph.
    """

    FEATURE_DEF: str = "FeatureDef"
    SQL_CTE: str = "SQLCTE"
    TOOL_CALL: str = "ToolCall"
    PROMPT: str = "Prompt"
    AGGREGATE: str = "Aggregate"
    GENERIC: str = "Generic"


class EdgeKind(ChoicesMixin, Enum):
    """
    Dependency kinds between reasoning steps.
    """

    CAUSAL: str = "causal"
    DATAFLOW: str = "dataflow"
    ENTAILMENT: str = "entailment"


class EmbeddingScheme(ChoicesMixin, Enum):
    HASHING_V1: str = "hashing-v1"
    EXTERNAL: str = "external"


class PruneStrategy(ChoicesMixin, Enum):
    OLDEST_FIRST: str = "oldest-first"
    LOWEST_REUSE_COUNT_FIRST: str = "lowest-reuse-count-first"


class RunMode(ChoicesMixin, Enum):
    COLD: str = "cold"
    MEMOIZED: str = "memoized"


class MergeAction(ChoicesMixin, Enum):
    REUSE: str = "reuse"
    GENERATE: str = "generate"


class ExecutionStatus(ChoicesMixin, Enum):
    EXECUTED: str = "executed"
    REUSED: str = "reused"


class ViolationCode(ChoicesMixin, Enum):
    """
    Structural violations reported by graph validation.
    """

    CYCLE_INTRODUCED: str = "CycleIntroduced"
    UNKNOWN_ENDPOINT: str = "UnknownEndpoint"
    DUPLICATE_NODE_ID: str = "DuplicateNodeId"
    DUPLICATE_EDGE: str = "DuplicateEdge"
    DIMENSION_MISMATCH: str = "DimensionMismatch"
    UNNORMALIZED_FEATURE: str = "UnnormalizedFeature"


class ReasonCode(ChoicesMixin, Enum):
    """
    Why a retrieved candidate cannot be grafted.
    """

    TYPE_MISMATCH: str = "TYPE_MISMATCH"
    BELOW_THRESHOLD: str = "BELOW_THRESHOLD"
    NODE_COVERED: str = "NODE_COVERED"
    NO_ALIGNMENT: str = "NO_ALIGNMENT"
    CYCLE_INTRODUCED: str = "CYCLE_INTRODUCED"
    DANGLING_PROVENANCE: str = "DANGLING_PROVENANCE"


class EntrySource(ChoicesMixin, Enum):
    HARNESS: str = "harness"
    CLI: str = "cli"
    API: str = "api"


class RecordType(ChoicesMixin, Enum):
    ENTRY: str = "entry"
    TOMBSTONE: str = "tombstone"
    REUSE: str = "reuse"


class ReportFormat(ChoicesMixin, Enum):
    CSV: str = "csv"
    JSON: str = "json"


class ExitCode:
    SUCCESS = 0
    INVALID_CONFIG = 2
    STORE_CORRUPTION = 3
    RUNTIME_FAILURE = 4
