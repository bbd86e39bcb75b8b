"""
Blended similarity S = alpha * S_struct + (1 - alpha) * S_sem between reasoning graphs.
"""
import threading
from dataclasses import dataclass

from memograph.embedding import cosine, pool_graph
from memograph.error_handler import EmptyGraph
from memograph.graph_core import ReasoningGraph, content_digest
from memograph.similarity.config import EditCosts, SimilarityConfig
from memograph.similarity.ged import GedResult, ged

CACHE_LIMIT = 200_000
SCORE_SLACK = 1e-12


@dataclass(frozen=True)
class SimilarityScore:
    score: float
    structural: float
    semantic: float
    approximate: bool


class _ScoreCache:
    """
    Memo of similarity scores keyed by content digests; cleared wholesale when full.
    """

    def __init__(self, limit: int = CACHE_LIMIT) -> None:
        self.limit = limit
        self._scores: dict[tuple[str, str, SimilarityConfig], SimilarityScore] = {}
        self._lock = threading.Lock()

    def get(self, key: tuple[str, str, SimilarityConfig]) -> SimilarityScore | None:
        return self._scores.get(key)

    def put(self, key: tuple[str, str, SimilarityConfig], value: SimilarityScore) -> None:
        with self._lock:
            if len(self._scores) >= self.limit:
                self._scores.clear()
            self._scores[key] = value

    def clear(self) -> None:
        with self._lock:
            self._scores.clear()


SCORE_CACHE = _ScoreCache()


def _normalizer(g1: ReasoningGraph, g2: ReasoningGraph, costs: EditCosts) -> float:
    denominator = costs.node_insert * (len(g1.nodes) + len(g2.nodes)) + costs.edge_insert * (
        len(g1.edges) + len(g2.edges)
    )
    return denominator if denominator > 0 else 1.0


def _clamp(value: float) -> float:
    return min(1.0, max(0.0, value))


def structural_score(
    g1: ReasoningGraph, g2: ReasoningGraph, cfg: SimilarityConfig
) -> tuple[float, GedResult]:
    result = ged(g1, g2, cfg.edit_costs, cfg.exact_ged_max_nodes)
    return _clamp(1.0 - result.distance / _normalizer(g1, g2, cfg.edit_costs)), result


def s_struct(
    g1: ReasoningGraph, g2: ReasoningGraph, costs: EditCosts, exact_max_nodes: int = 8
) -> float:
    """
    Structural similarity 1 - GED / D, with D the cost of inserting both graphs.
    :param g1: ReasoningGraph
    :param g2: ReasoningGraph
    :param costs: EditCosts
    :param exact_max_nodes: size limit for exact GED
    :return: float in [0, 1]
    """
    cfg = SimilarityConfig(edit_costs=costs, exact_ged_max_nodes=exact_max_nodes)
    score, _ = structural_score(g1, g2, cfg)
    return score


def s_sem(g1: ReasoningGraph, g2: ReasoningGraph) -> float:
    """
    Semantic similarity (1 + cos) / 2 of pooled features; 0.5 without evidence.
    :param g1: nonempty ReasoningGraph
    :param g2: nonempty ReasoningGraph
    :return: float in [0, 1]
    """
    if g1.is_empty or g2.is_empty:
        raise EmptyGraph("s_sem")
    first, second = pool_graph(g1), pool_graph(g2)
    if not first.any() or not second.any():
        return 0.5
    return _clamp((1.0 + cosine(first, second)) / 2.0)


def _blend(structural: float, semantic: float, alpha: float) -> float:
    return _clamp(semantic + alpha * (structural - semantic))


def similarity_report(
    g1: ReasoningGraph, g2: ReasoningGraph, cfg: SimilarityConfig
) -> SimilarityScore:
    """
    Blended similarity with its components and the approximation flag.
    """
    if g1.is_empty or g2.is_empty:
        raise EmptyGraph("similarity")
    first_key, second_key = content_digest(g1), content_digest(g2)
    if first_key == second_key:
        return SimilarityScore(score=1.0, structural=1.0, semantic=1.0, approximate=False)
    # symmetric prices let (g1, g2) and (g2, g1) share one entry
    if cfg.edit_costs.symmetric:
        first_key, second_key = sorted((first_key, second_key))
    key = (first_key, second_key, cfg)
    cached = SCORE_CACHE.get(key)
    if cached is not None:
        return cached
    structural, result = structural_score(g1, g2, cfg)
    semantic = s_sem(g1, g2)
    report = SimilarityScore(
        score=_blend(structural, semantic, cfg.alpha),
        structural=structural,
        semantic=semantic,
        approximate=result.approximate,
    )
    SCORE_CACHE.put(key, report)
    return report


def similarity(g1: ReasoningGraph, g2: ReasoningGraph, cfg: SimilarityConfig) -> float:
    """
    S = alpha * s_struct + (1 - alpha) * s_sem.
    :param g1: nonempty ReasoningGraph
    :param g2: nonempty ReasoningGraph
    :param cfg: SimilarityConfig
    :return: float in [0, 1]
    """
    return similarity_report(g1, g2, cfg).score


def similarity_upper_bound(
    g1: ReasoningGraph, g2: ReasoningGraph, cfg: SimilarityConfig
) -> float:
    """
    Cheap bound that ``similarity`` never exceeds, from node and edge count differences.
    """
    costs = cfg.edit_costs
    n1, n2 = len(g1.nodes), len(g2.nodes)
    e1, e2 = len(g1.edges), len(g2.edges)
    distance_floor = (
        costs.node_delete * max(0, n1 - n2)
        + costs.node_insert * max(0, n2 - n1)
        + costs.edge_delete * max(0, e1 - e2)
        + costs.edge_insert * max(0, e2 - e1)
    )
    structural_ceiling = _clamp(1.0 - distance_floor / _normalizer(g1, g2, costs))
    return _blend(structural_ceiling, s_sem(g1, g2), cfg.alpha) + SCORE_SLACK
