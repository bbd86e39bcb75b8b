"""
Durable versioned store of reasoning graphs.

Layout of a store directory::

    <root>/meta.json   format tag and embedding spec
    <root>/log.jsonl   append-only record log (entry, tombstone and reuse records)
    <root>/index.bin   graph_id -> [(version, offset)], rebuildable from the log

Entries live in memory as an immutable ``RepositorySnapshot`` that the single writer
swaps under a lock after each durable append.
"""
import json
import logging
import threading
from datetime import datetime, timezone
from pathlib import Path
from types import MappingProxyType
from typing import Mapping, Optional, Sequence

import networkx as nx
import numpy as np
import pandas as pd
import pydantic
from pydantic import ValidationError

from memograph.constants import (
    DEFAULT_CANDIDATE_DEPTH,
    STORE_FORMAT,
    VERSION,
    EntrySource,
    PruneStrategy,
)
from memograph.embedding import EmbeddingSpec
from memograph.error_handler import (
    DimensionMismatch,
    InvalidGraph,
    StorageFailure,
    StoreCorruption,
    StoreMismatch,
)
from memograph.graph_core import (
    ReasoningGraph,
    canonical_hash,
    graph_from_document,
    graph_to_document,
    validate,
)
from memograph.repository.entry import PruneConfig, QueryResult, RepositoryEntry, TaskQuery
from memograph.repository.log import IndexMap, RecordLog, read_index, write_index
from memograph.repository.records import EntryRecord, ReuseRecord, TombstoneRecord, parse_record
from memograph.repository.snapshot import AnchorFilter, EntryRef, RepositorySnapshot
from memograph.similarity import SimilarityConfig

logger = logging.getLogger(__name__)

META_FILE = "meta.json"
LOG_FILE = "log.jsonl"
INDEX_FILE = "index.bin"


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


def environment_tags(spec: EmbeddingSpec) -> dict[str, str]:
    return {
        "memograph": VERSION,
        "numpy": np.__version__,
        "networkx": nx.__version__,
        "pandas": pd.__version__,
        "pydantic": pydantic.VERSION,
        "embedding_scheme": spec.scheme.value,
    }


class Repository:
    """
    Single writer, many readers: ``snapshot`` hands out the current immutable view and
    never blocks on a concurrent ``put``.
    """

    def __init__(self, root: Path, spec: EmbeddingSpec) -> None:
        self.root = Path(root)
        self.spec = spec
        self.log = RecordLog(self.root / LOG_FILE)
        self.index_path = self.root / INDEX_FILE
        self._state = RepositorySnapshot(dim=spec.dim)
        self._index: IndexMap = {}
        self._lock = threading.Lock()

    @property
    def dim(self) -> int:
        return self.spec.dim

    @classmethod
    def init(cls, root: Path | str, spec: Optional[EmbeddingSpec] = None) -> "Repository":
        """
        Create a store directory, or open it if it already holds a store.
        :param root: store directory
        :param spec: EmbeddingSpec, defaults from settings
        :return: Repository
        """
        root = Path(root)
        spec = spec or EmbeddingSpec()
        if (root / META_FILE).exists():
            return cls.open(root, spec)
        try:
            root.mkdir(parents=True, exist_ok=True)
            meta = {"format": STORE_FORMAT, "embedding": spec.model_dump(mode="json")}
            meta["dim"] = spec.dim
            (root / META_FILE).write_text(json.dumps(meta, indent=2, sort_keys=True))
            (root / LOG_FILE).touch()
        except OSError as exc:
            raise StorageFailure(str(root), str(exc))
        write_index(root / INDEX_FILE, 0, {})
        logger.info(f"Initialized store at {root} (dim={spec.dim}, scheme={spec.scheme.value})")
        return cls.open(root, spec)

    @classmethod
    def open(cls, root: Path | str, spec: Optional[EmbeddingSpec] = None) -> "Repository":
        """
        Open an existing store and replay its log.
        :param root: store directory
        :param spec: requested EmbeddingSpec; must agree with the stored one when given
        :return: Repository
        """
        root = Path(root)
        meta_path = root / META_FILE
        if not meta_path.exists():
            raise StorageFailure(str(root), "not a memograph store, run init first")
        try:
            meta = json.loads(meta_path.read_text())
            stored = EmbeddingSpec.model_validate(meta["embedding"])
        except (OSError, ValueError, KeyError, TypeError, ValidationError) as exc:
            raise StoreCorruption(str(meta_path), 0, f"unreadable metadata: {exc}")
        if meta.get("format") != STORE_FORMAT:
            raise StoreMismatch(str(root), "format", meta.get("format"), STORE_FORMAT)
        if meta.get("dim", stored.dim) != stored.dim:
            raise StoreCorruption(str(meta_path), 0, "dim disagrees with embedding spec")
        if spec is not None:
            for name in ("dim", "scheme", "seed"):
                stored_value, requested = getattr(stored, name), getattr(spec, name)
                if stored_value != requested:
                    raise StoreMismatch(
                        str(root),
                        name,
                        getattr(stored_value, "value", stored_value),
                        getattr(requested, "value", requested),
                    )

        repository = cls(root, stored)
        repository._load()
        return repository

    def _replay(self) -> tuple[RepositorySnapshot, IndexMap]:
        scan = self.log.scan()
        if scan.torn_bytes:
            self.log.truncate(scan.valid_size)

        entries: list[RepositoryEntry] = []
        tombstones: set[EntryRef] = set()
        reuse_counts: dict[EntryRef, int] = {}
        index: IndexMap = {}
        next_versions: dict[str, int] = {}
        for offset, document in scan.records:
            try:
                record = parse_record(document)
            except ValidationError as exc:
                raise StoreCorruption(str(self.log.path), offset, f"invalid record: {exc}")
            ref = (record.graph_id, record.version)
            if isinstance(record, EntryRecord):
                expected = next_versions.get(record.graph_id, 1)
                if record.version != expected:
                    raise StoreCorruption(
                        str(self.log.path),
                        offset,
                        f"version {record.version} of '{record.graph_id}', expected {expected}",
                    )
                next_versions[record.graph_id] = expected + 1
                entries.append(self._entry_from_record(record, offset, len(entries)))
                index.setdefault(record.graph_id, []).append((record.version, offset))
            elif isinstance(record, TombstoneRecord):
                tombstones.add(ref)
            elif isinstance(record, ReuseRecord):
                reuse_counts[ref] = reuse_counts.get(ref, 0) + 1

        state = RepositorySnapshot(
            dim=self.dim, entries=tuple(entries), reuse_counts=MappingProxyType(reuse_counts)
        ).with_tombstones(tombstones)
        return state, index

    def _entry_from_record(
        self, record: EntryRecord, offset: int, sequence: int
    ) -> RepositoryEntry:
        try:
            graph = graph_from_document(record.graph)
        except InvalidGraph as exc:
            raise StoreCorruption(str(self.log.path), offset, str(exc))
        if canonical_hash(graph) != record.output_signature:
            raise StoreCorruption(str(self.log.path), offset, "output signature mismatch")
        return RepositoryEntry(
            graph_id=record.graph_id,
            version=record.version,
            graph=graph,
            task_embedding=tuple(record.task_embedding),
            output_signature=record.output_signature,
            created_at=record.created_at,
            metrics=dict(record.metrics),
            node_signatures=dict(record.node_signatures),
            source=record.source,
            environment=dict(record.environment),
            sequence=sequence,
            offset=offset,
        )

    def _load(self) -> None:
        state, index = self._replay()
        stored = read_index(self.index_path)
        if stored != (self.log.size(), index):
            logger.warning(f"Index at {self.index_path} is stale or missing, rebuilding")
        self._state, self._index = state, index
        if stored != (self.log.size(), index):
            self._sync_index()
        logger.info(f"Opened store {self.root} with {len(state.entries)} entries")

    def _sync_index(self) -> None:
        """
        Rewrite ``index.bin`` for the current log. The log is the source of truth, so a
        failed write only leaves a stale index that the next open or write replaces.
        """
        try:
            write_index(self.index_path, self.log.size(), self._index)
        except StorageFailure as exc:
            logger.warning(f"Index at {self.index_path} left stale: {exc}")

    def rebuild_index(self) -> IndexMap:
        """
        Rebuild ``index.bin`` from a full replay of the log.
        :return: the rebuilt graph_id -> [(version, offset)] map
        """
        with self._lock:
            state, index = self._replay()
            write_index(self.index_path, self.log.size(), index)
            self._state, self._index = state, index
        logger.info(f"Rebuilt index of {self.root} for {len(state.entries)} entries")
        return {graph_id: list(items) for graph_id, items in index.items()}

    def snapshot(self) -> RepositorySnapshot:
        return self._state

    def __len__(self) -> int:
        return len(self._state)

    def put(
        self,
        graph_id: str,
        graph: ReasoningGraph,
        task_embedding: Sequence[float],
        metrics: Optional[Mapping[str, float]] = None,
        node_signatures: Optional[Mapping[str, str]] = None,
        source: EntrySource = EntrySource.API,
    ) -> EntryRef:
        """
        Append a new version of ``graph_id``; durable once it returns.
        :param graph_id: stable identifier
        :param graph: valid, nonempty ReasoningGraph of the store dimension
        :param task_embedding: vector of the store dimension
        :param metrics: open metric map
        :param node_signatures: per-node output signatures from execution
        :param source: which surface produced the entry
        :return: (graph_id, version)
        """
        if not graph_id:
            raise ValueError("graph_id must be nonempty")
        violations = validate(graph)
        if violations:
            raise InvalidGraph(violations)
        if graph.is_empty:
            raise InvalidGraph(["graph has no nodes"])
        if graph.dim != self.dim:
            raise DimensionMismatch(self.dim, graph.dim, context="graph")
        if len(task_embedding) != self.dim:
            raise DimensionMismatch(self.dim, len(task_embedding), context="task embedding")

        with self._lock:
            state = self._state
            version = state.next_version(graph_id)
            record = EntryRecord(
                graph_id=graph_id,
                version=version,
                created_at=utc_now(),
                graph=graph_to_document(graph),
                task_embedding=[float(value) for value in task_embedding],
                output_signature=canonical_hash(graph),
                metrics={name: float(value) for name, value in (metrics or {}).items()},
                node_signatures=dict(node_signatures or {}),
                source=source,
                environment=environment_tags(self.spec),
            )
            offset = self.log.append(record.model_dump(mode="json"))
            entry = RepositoryEntry(
                graph_id=graph_id,
                version=version,
                graph=graph,
                task_embedding=tuple(record.task_embedding),
                output_signature=record.output_signature,
                created_at=record.created_at,
                metrics=record.metrics,
                node_signatures=record.node_signatures,
                source=source,
                environment=record.environment,
                sequence=len(state.entries),
                offset=offset,
            )
            self._index.setdefault(graph_id, []).append((version, offset))
            self._state = state.with_entry(entry)
            self._sync_index()
        logger.info(f"Stored {graph_id}@{version} ({len(graph)} nodes) at offset {offset}")
        return graph_id, version

    def get(self, graph_id: str, version: Optional[int] = None) -> RepositoryEntry:
        return self._state.get(graph_id, version)

    def query(
        self,
        request: TaskQuery,
        top_k: int,
        tau_sim: float,
        cfg: SimilarityConfig,
        depth: Optional[int] = DEFAULT_CANDIDATE_DEPTH,
        anchor_filter: Optional[AnchorFilter] = None,
    ) -> list[QueryResult]:
        return self._state.query(request, top_k, tau_sim, cfg, depth, anchor_filter)

    def record_reuse(self, ref: EntryRef) -> None:
        """
        Count one graft from the entry ``ref``; the count drives reuse-based pruning.
        """
        with self._lock:
            state = self._state
            state.get(*ref)
            record = ReuseRecord(graph_id=ref[0], version=ref[1], created_at=utc_now())
            self.log.append(record.model_dump(mode="json"))
            self._state = state.with_reuse(ref)
            self._sync_index()
        logger.debug(f"Recorded reuse of {ref[0]}@{ref[1]}")

    def prune(self, cfg: PruneConfig) -> list[EntryRef]:
        """
        Tombstone live entries beyond ``cfg.max_entries``.
        :param cfg: PruneConfig
        :return: tombstoned (graph_id, version) in the order they were chosen
        """
        with self._lock:
            state = self._state
            live = state.live_entries
            excess = len(live) - cfg.max_entries
            if excess <= 0:
                return []
            if cfg.strategy == PruneStrategy.LOWEST_REUSE_COUNT_FIRST:
                ordered = sorted(
                    live, key=lambda entry: (state.reuse_count(entry.entry_ref), entry.sequence)
                )
            else:
                ordered = sorted(live, key=lambda entry: entry.sequence)
            victims = [entry.entry_ref for entry in ordered[:excess]]
            created_at = utc_now()
            for graph_id, version in victims:
                record = TombstoneRecord(graph_id=graph_id, version=version, created_at=created_at)
                self.log.append(record.model_dump(mode="json"))
                self._state = self._state.with_tombstones([(graph_id, version)])
            self._sync_index()
        logger.info(f"Pruned {len(victims)} entries from {self.root} ({cfg.strategy.value})")
        return victims

    def locate(self, graph_id: str, version: int) -> int:
        """
        Byte offset of an entry record according to the side index.
        """
        for indexed_version, offset in self._index.get(graph_id, ()):
            if indexed_version == version:
                return offset
        self._state.get(graph_id, version)
        raise StoreCorruption(str(self.index_path), 0, f"{graph_id}@{version} is not indexed")

    def read_record(self, graph_id: str, version: int) -> dict:
        """
        Raw entry record straight from the log, for provenance audits.
        """
        return self.log.read_at(self.locate(graph_id, version))
