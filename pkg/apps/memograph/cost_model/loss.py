"""
Objective L = Cost + lambda * Inconsistency of a stitched reasoning graph.

Meters are charged per executed node; a reused node costs ``c_retrieve`` instead.
Inconsistency compares every reuse region against the pinned source it was copied from.
"""
import logging
from dataclasses import asdict, dataclass
from typing import Iterable, Optional

import networkx as nx

from memograph.cost_model.coefficients import CostCoefficients
from memograph.error_handler import DanglingProvenance, NotFound, UnknownNode, VersionNotFound
from memograph.graph_core import (
    ReasoningGraph,
    induced_subgraph,
    longest_path_length,
    topological_order,
)
from memograph.repository import RepositoryEntry, RepositoryView
from memograph.similarity import SimilarityConfig, similarity

logger = logging.getLogger(__name__)

TOTAL_TOLERANCE = 1e-9


@dataclass(frozen=True)
class ReuseRegion:
    """
    Connected set of stitched-graph nodes copied from one pinned repository entry.
    ``anchor`` is the source node the graft was rooted at.
    """

    nodes: frozenset[str]
    source_ref: tuple[str, int, str]

    @property
    def graph_id(self) -> str:
        return self.source_ref[0]

    @property
    def version(self) -> int:
        return self.source_ref[1]

    @property
    def anchor(self) -> str:
        return self.source_ref[2]

    @property
    def weight(self) -> int:
        return len(self.nodes)

    def to_document(self) -> dict:
        return {
            "nodes": sorted(self.nodes),
            "source": {"graph_id": self.graph_id, "version": self.version, "anchor": self.anchor},
        }


@dataclass(frozen=True)
class LossBreakdown:
    """
    Weighted cost terms, the inconsistency and their combination
    ``total = cost_calls + cost_latency + cost_depth + cost_meters + retrieval_overhead
    + lam * inconsistency``. The raw counters the terms were priced from ride along.
    """

    cost_calls: float = 0.0
    cost_latency: float = 0.0
    cost_depth: float = 0.0
    cost_meters: float = 0.0
    retrieval_overhead: float = 0.0
    inconsistency: float = 0.0
    lam: float = 0.0
    total: float = 0.0
    calls: int = 0
    latency_ms: float = 0.0
    depth: int = 0
    tokens: int = 0
    tool_calls: int = 0
    reused: int = 0

    @property
    def cost(self) -> float:
        return (
            self.cost_calls
            + self.cost_latency
            + self.cost_depth
            + self.cost_meters
            + self.retrieval_overhead
        )

    def is_consistent(self) -> bool:
        return abs(self.cost + self.lam * self.inconsistency - self.total) <= TOTAL_TOLERANCE

    def to_document(self) -> dict:
        document = asdict(self)
        document["lambda"] = document.pop("lam")
        return document


def reused_node_ids(graph: ReasoningGraph) -> set[str]:
    return {node.id for node in graph.nodes if node.origin is not None}


def regions_from_provenance(graph: ReasoningGraph) -> list[ReuseRegion]:
    """
    Recover reuse regions from node origins: connected groups of nodes that cite the same
    entry. Each region is anchored at the source node of its topologically first member.
    :param graph: stitched ReasoningGraph
    :return: regions sorted by source and members
    """
    groups: dict[tuple[str, int], list[str]] = {}
    for node in graph.nodes:
        if node.origin is not None:
            groups.setdefault(node.origin.entry_ref, []).append(node.id)
    position = {node_id: index for index, node_id in enumerate(topological_order(graph))}
    regions = []
    for (graph_id, version), members in groups.items():
        view = graph.digraph.subgraph(members)
        for component in nx.weakly_connected_components(view):
            first = min(component, key=position.__getitem__)
            origin = graph.node(first).origin
            assert origin is not None
            regions.append(ReuseRegion(frozenset(component), (graph_id, version, origin.node_id)))
    return sorted(regions, key=lambda region: (region.source_ref, sorted(region.nodes)))


def structural_cost(
    graph: ReasoningGraph, coeffs: CostCoefficients, reused: Optional[Iterable[str]] = None
) -> LossBreakdown:
    """
    Cost terms of a graph under a reuse mask; ``total`` holds the cost alone.
    :param graph: ReasoningGraph
    :param coeffs: CostCoefficients
    :param reused: ids of reused nodes, by default the nodes carrying provenance
    :return: LossBreakdown with inconsistency 0
    """
    mask = reused_node_ids(graph) if reused is None else set(reused)
    for node_id in sorted(mask):
        if node_id not in graph:
            raise UnknownNode(node_id)

    executed = [node for node in graph.nodes if node.id not in mask]
    calls = len(executed)
    latency = sum(node.meters.latency_ms for node in executed)
    tokens = sum(node.meters.tokens for node in executed)
    tool_calls = sum(node.meters.tool_calls for node in executed)
    depth = longest_path_length(graph)

    breakdown = LossBreakdown(
        cost_calls=coeffs.a1 * calls,
        cost_latency=coeffs.a2 * latency,
        cost_depth=coeffs.a3 * depth,
        cost_meters=coeffs.c_llm * tokens + coeffs.c_tool * tool_calls + coeffs.c_lat * latency,
        retrieval_overhead=coeffs.c_retrieve * len(mask),
        calls=calls,
        latency_ms=latency,
        depth=depth,
        tokens=tokens,
        tool_calls=tool_calls,
        reused=len(mask),
    )
    return _with_total(breakdown, inconsistency=0.0, lam=0.0)


def _with_total(breakdown: LossBreakdown, inconsistency: float, lam: float) -> LossBreakdown:
    values = asdict(breakdown)
    values.update(inconsistency=inconsistency, lam=lam)
    values["total"] = breakdown.cost + lam * inconsistency
    return LossBreakdown(**values)


def _resolve(region: ReuseRegion, repo_view: RepositoryView) -> RepositoryEntry:
    try:
        return repo_view.get(region.graph_id, region.version)
    except (NotFound, VersionNotFound) as exc:
        raise DanglingProvenance(region.graph_id, region.version, str(exc))


def region_similarity(
    graph: ReasoningGraph,
    region: ReuseRegion,
    repo_view: RepositoryView,
    cfg: SimilarityConfig,
) -> float:
    """
    Similarity between a region's induced subgraph and the subgraph of its pinned source
    induced on the nodes it was copied from.
    """
    entry = _resolve(region, repo_view)
    source_ids = set()
    for node_id in region.nodes:
        origin = graph.node(node_id).origin
        if origin is None or origin.entry_ref != (region.graph_id, region.version):
            raise DanglingProvenance(
                region.graph_id, region.version, f"node '{node_id}' does not cite this source"
            )
        if origin.node_id not in entry.graph:
            raise DanglingProvenance(
                region.graph_id, region.version, f"source node '{origin.node_id}' is missing"
            )
        source_ids.add(origin.node_id)
    return similarity(
        induced_subgraph(graph, region.nodes), induced_subgraph(entry.graph, source_ids), cfg
    )


def weighted_inconsistency(scored_regions: Iterable[tuple[int, float]]) -> float:
    """
    One minus the weight-averaged similarity; 0 when nothing is reused.
    :param scored_regions: (weight, similarity) pairs
    :return: float in [0, 1]
    """
    total_weight = 0.0
    weighted = 0.0
    for weight, score in scored_regions:
        total_weight += weight
        weighted += weight * score
    if total_weight == 0:
        return 0.0
    return min(1.0, max(0.0, 1.0 - weighted / total_weight))


def inconsistency(
    graph: ReasoningGraph,
    regions: list[ReuseRegion],
    repo_view: RepositoryView,
    cfg: SimilarityConfig,
) -> float:
    """
    Node-count weighted divergence of the reuse regions from their sources.
    :param graph: stitched ReasoningGraph
    :param regions: list of ReuseRegion
    :param repo_view: repository or snapshot the regions were grafted from
    :param cfg: SimilarityConfig
    :return: float in [0, 1]
    """
    scored = []
    for region in regions:
        score = region_similarity(graph, region, repo_view, cfg)
        if score < 1.0:
            logger.debug(
                f"Region at {region.graph_id}@{region.version}:{region.anchor} deviates "
                f"from its source by {1.0 - score:.6f}"
            )
        scored.append((region.weight, score))
    return weighted_inconsistency(scored)


def total_loss(
    graph: ReasoningGraph,
    regions: list[ReuseRegion],
    coeffs: CostCoefficients,
    lam: float,
    repo_view: RepositoryView,
    cfg: SimilarityConfig,
) -> LossBreakdown:
    """
    L = Cost + lam * Inconsistency.
    :param graph: stitched ReasoningGraph
    :param regions: list of ReuseRegion
    :param coeffs: CostCoefficients
    :param lam: nonnegative inconsistency weight
    :param repo_view: repository or snapshot the regions were grafted from
    :param cfg: SimilarityConfig
    :return: LossBreakdown
    """
    if lam < 0:
        raise ValueError(f"lambda must be nonnegative, got {lam}")
    cost = structural_cost(graph, coeffs)
    return _with_total(cost, inconsistency(graph, regions, repo_view, cfg), lam)
