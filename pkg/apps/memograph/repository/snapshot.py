"""
Immutable point-in-time view of the repository, and the retrieval that runs over it.
"""
import logging
from dataclasses import dataclass, field, replace
from functools import cached_property
from types import MappingProxyType
from typing import Callable, Iterable, Mapping, Optional, Protocol

from memograph.constants import DEFAULT_CANDIDATE_DEPTH, PREFILTER_WIDTH_FACTOR
from memograph.embedding import cosine
from memograph.error_handler import DimensionMismatch, NotFound, VersionNotFound
from memograph.graph_core import ReasoningNode, descendant_subgraph, topological_order
from memograph.repository.entry import QueryResult, RepositoryEntry, TaskQuery
from memograph.similarity import SimilarityConfig, similarity_report, similarity_upper_bound

logger = logging.getLogger(__name__)

EntryRef = tuple[str, int]
AnchorFilter = Callable[[ReasoningNode], bool]


class RepositoryView(Protocol):
    """
    Read access shared by ``Repository`` and ``RepositorySnapshot``.
    """

    def get(self, graph_id: str, version: Optional[int] = None) -> RepositoryEntry:
        ...

    def query(
        self,
        request: TaskQuery,
        top_k: int,
        tau_sim: float,
        cfg: SimilarityConfig,
        depth: Optional[int] = DEFAULT_CANDIDATE_DEPTH,
        anchor_filter: Optional[AnchorFilter] = None,
    ) -> list[QueryResult]:
        ...


@dataclass(frozen=True, eq=False)
class RepositorySnapshot:
    """
    Read-only view of the entries committed at the moment it was taken. Writers build a
    new snapshot for every change, so a view never observes later puts or prunes.
    """

    dim: int
    entries: tuple[RepositoryEntry, ...] = ()
    reuse_counts: Mapping[EntryRef, int] = field(default_factory=lambda: MappingProxyType({}))

    def __len__(self) -> int:
        return len(self.live_entries)

    @cached_property
    def by_ref(self) -> dict[EntryRef, RepositoryEntry]:
        return {entry.entry_ref: entry for entry in self.entries}

    @cached_property
    def versions(self) -> dict[str, list[RepositoryEntry]]:
        versions: dict[str, list[RepositoryEntry]] = {}
        for entry in sorted(self.entries, key=lambda item: (item.graph_id, item.version)):
            versions.setdefault(entry.graph_id, []).append(entry)
        return versions

    @cached_property
    def live_entries(self) -> list[RepositoryEntry]:
        return [entry for entry in self.entries if not entry.tombstone]

    def with_entry(self, entry: RepositoryEntry) -> "RepositorySnapshot":
        return replace(self, entries=self.entries + (entry,))

    def with_tombstones(self, refs: Iterable[EntryRef]) -> "RepositorySnapshot":
        dead = set(refs)
        return replace(
            self,
            entries=tuple(
                replace(entry, tombstone=True) if entry.entry_ref in dead else entry
                for entry in self.entries
            ),
        )

    def with_reuse(self, ref: EntryRef) -> "RepositorySnapshot":
        counts = dict(self.reuse_counts)
        counts[ref] = counts.get(ref, 0) + 1
        return replace(self, reuse_counts=MappingProxyType(counts))

    def reuse_count(self, ref: EntryRef) -> int:
        return self.reuse_counts.get(ref, 0)

    def next_version(self, graph_id: str) -> int:
        return len(self.versions.get(graph_id, ())) + 1

    def get(self, graph_id: str, version: Optional[int] = None) -> RepositoryEntry:
        """
        Stored entry by id; the latest live version when ``version`` is omitted. Tombstoned
        entries stay reachable by explicit version.
        :param graph_id: graph identifier
        :param version: positive version number or None
        :return: RepositoryEntry
        """
        history = self.versions.get(graph_id)
        if not history:
            raise NotFound(graph_id)
        if version is None:
            live = [entry for entry in history if not entry.tombstone]
            if not live:
                raise NotFound(graph_id)
            return live[-1]
        entry = self.by_ref.get((graph_id, version))
        if entry is None:
            raise VersionNotFound(graph_id, version)
        return entry

    def _prefilter(self, request: TaskQuery, width: int) -> list[tuple[float, RepositoryEntry]]:
        request_vector = request.vector
        scored = [(cosine(entry.embedding, request_vector), entry) for entry in self.live_entries]
        scored.sort(key=lambda item: (-item[0], item[1].graph_id, item[1].version))
        return scored[:width]

    def query(
        self,
        request: TaskQuery,
        top_k: int,
        tau_sim: float,
        cfg: SimilarityConfig,
        depth: Optional[int] = DEFAULT_CANDIDATE_DEPTH,
        anchor_filter: Optional[AnchorFilter] = None,
    ) -> list[QueryResult]:
        """
        Two-stage retrieval: keep the ``4 * top_k`` entries whose task embedding is closest
        to the request, then score their anchored descendant subgraphs against the request graph.
        Without a request graph the entries are ranked by (1 + cosine) / 2 of the embeddings.
        :param request: TaskQuery
        :param top_k: number of results to return
        :param tau_sim: minimum score
        :param cfg: SimilarityConfig
        :param depth: depth of candidate subgraphs below their anchor
        :param anchor_filter: optional predicate restricting candidate anchors
        :return: results sorted by descending score, then (graph_id, version, anchor)
        """
        if top_k < 1:
            raise ValueError(f"top_k must be positive, got {top_k}")
        if len(request.embedding) != self.dim:
            raise DimensionMismatch(self.dim, len(request.embedding), context="request embedding")
        if request.graph is not None and request.graph.dim != self.dim:
            raise DimensionMismatch(self.dim, request.graph.dim, context="request graph")

        shortlist = self._prefilter(request, PREFILTER_WIDTH_FACTOR * top_k)
        results: list[QueryResult] = []

        if request.graph is None or request.graph.is_empty:
            for embedding_cosine, entry in shortlist:
                score = min(1.0, max(0.0, (1.0 + embedding_cosine) / 2.0))
                if score >= tau_sim and not entry.graph.is_empty:
                    anchor = topological_order(entry.graph)[0]
                    results.append(QueryResult(entry.entry_ref, anchor, score))
        else:
            for _, entry in shortlist:
                results.extend(
                    self._score_entry(entry, request, tau_sim, cfg, depth, anchor_filter)
                )

        results.sort(key=lambda result: result.sort_key)
        logger.debug(f"Query kept {len(results)} results from {len(shortlist)} entries")
        return results[:top_k]

    def _score_entry(
        self,
        entry: RepositoryEntry,
        request: TaskQuery,
        tau_sim: float,
        cfg: SimilarityConfig,
        depth: Optional[int],
        anchor_filter: Optional[AnchorFilter],
    ) -> list[QueryResult]:
        assert request.graph is not None
        results = []
        for node in entry.graph.nodes:
            if anchor_filter is not None and not anchor_filter(node):
                continue
            candidate = descendant_subgraph(entry.graph, node.id, depth)
            if similarity_upper_bound(request.graph, candidate, cfg) < tau_sim:
                continue
            report = similarity_report(request.graph, candidate, cfg)
            if report.score >= tau_sim:
                results.append(
                    QueryResult(entry.entry_ref, node.id, report.score, report.approximate)
                )
        return results
