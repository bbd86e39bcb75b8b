"""
Graph edit distance between reasoning graphs.

A node mapping sends every node of the first graph to a distinct node of the second or
deletes it; unmapped nodes of the second graph are inserted. Edges are identified by
(src, dst, kind) under the mapping. Small instances are solved exactly by branch and
bound, larger ones by a greedy matching whose cost is an upper bound.
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from memograph.constants import DEFAULT_EXACT_GED_MAX_NODES
from memograph.embedding import same_token_bag
from memograph.graph_core import ReasoningGraph, ReasoningNode
from memograph.similarity.config import EditCosts

logger = logging.getLogger(__name__)

Mapping = list[Optional[int]]


@dataclass(frozen=True)
class GedResult:
    distance: float
    approximate: bool


def relabel_cost(first: ReasoningNode, second: ReasoningNode, costs: EditCosts) -> float:
    """
    Full relabel price across kinds; within a kind, scaled by feature dissimilarity.
    Equal features only count as a match when the labels share their token bag, otherwise
    they are a hash collision and carry no evidence.
    """
    if first.kind != second.kind:
        return costs.node_relabel
    if first.label == second.label and first.feature == second.feature:
        return 0.0
    first_norm = np.linalg.norm(first.vector)
    second_norm = np.linalg.norm(second.vector)
    if first_norm == 0 or second_norm == 0:
        similarity = 0.0
    elif first.feature == second.feature:
        similarity = 1.0 if same_token_bag(first.label, second.label) else 0.0
    else:
        similarity = float(np.dot(first.vector, second.vector) / (first_norm * second_norm))
    return costs.node_relabel * min(1.0, max(0.0, 1.0 - similarity))


def _edge_table(graph: ReasoningGraph) -> dict[tuple[int, int], frozenset[str]]:
    index = {node.id: position for position, node in enumerate(graph.nodes)}
    table: dict[tuple[int, int], set[str]] = {}
    for edge in graph.edges:
        if edge.src in index and edge.dst in index:
            table.setdefault((index[edge.src], index[edge.dst]), set()).add(edge.kind.value)
    return {pair: frozenset(kinds) for pair, kinds in table.items()}


class EditProblem:
    """
    Precomputed cost tables for transforming ``source`` into ``target``.
    """

    def __init__(self, source: ReasoningGraph, target: ReasoningGraph, costs: EditCosts) -> None:
        self.costs = costs
        self.n = len(source.nodes)
        self.m = len(target.nodes)
        self.relabel = [
            [relabel_cost(left, right, costs) for right in target.nodes] for left in source.nodes
        ]
        self.left_edges = _edge_table(source)
        self.right_edges = _edge_table(target)
        self.right_edge_count = sum(len(kinds) for kinds in self.right_edges.values())

    def mapping_cost(self, mapping: Mapping) -> float:
        """
        Exact edit cost of a complete mapping.
        """
        costs = self.costs
        node_cost = 0.0
        for left, right in enumerate(mapping):
            node_cost += costs.node_delete if right is None else self.relabel[left][right]
        mapped = sum(1 for right in mapping if right is not None)
        node_cost += costs.node_insert * (self.m - mapped)

        deleted = 0
        matched = 0
        for (src, dst), kinds in self.left_edges.items():
            image_src, image_dst = mapping[src], mapping[dst]
            if image_src is None or image_dst is None:
                deleted += len(kinds)
                continue
            shared = len(kinds & self.right_edges.get((image_src, image_dst), frozenset()))
            matched += shared
            deleted += len(kinds) - shared
        inserted = self.right_edge_count - matched
        return node_cost + costs.edge_delete * deleted + costs.edge_insert * inserted

    def greedy_mapping(self) -> Mapping:
        """
        Cheapest-pair-first matching; a pair is taken only if it beats delete plus insert.
        """
        pairs = sorted(
            (self.relabel[left][right], left, right)
            for left in range(self.n)
            for right in range(self.m)
        )
        threshold = self.costs.node_delete + self.costs.node_insert
        mapping: Mapping = [None] * self.n
        used: set[int] = set()
        for cost, left, right in pairs:
            if cost >= threshold:
                break
            if mapping[left] is None and right not in used:
                mapping[left] = right
                used.add(right)
        return mapping

    def _lower_bound(self, depth: int, used: set[int]) -> float:
        costs = self.costs
        remaining = range(depth, self.n)
        unused = [right for right in range(self.m) if right not in used]

        row_bound = 0.0
        for left in remaining:
            best = costs.node_delete
            for right in unused:
                if self.relabel[left][right] < best:
                    best = self.relabel[left][right]
            row_bound += best
        row_bound += costs.node_insert * max(0, len(unused) - len(remaining))

        column_bound = 0.0
        for right in unused:
            best = costs.node_insert
            for left in remaining:
                if self.relabel[left][right] < best:
                    best = self.relabel[left][right]
            column_bound += best
        column_bound += costs.node_delete * max(0, len(remaining) - len(unused))

        unused_set = set(unused)
        left_open = sum(
            len(kinds)
            for (src, dst), kinds in self.left_edges.items()
            if src >= depth or dst >= depth
        )
        right_open = sum(
            len(kinds)
            for (src, dst), kinds in self.right_edges.items()
            if src in unused_set or dst in unused_set
        )
        edge_bound = costs.edge_delete * max(0, left_open - right_open)
        edge_bound += costs.edge_insert * max(0, right_open - left_open)
        return max(row_bound, column_bound) + edge_bound

    def _step_cost(self, mapping: Mapping, left: int, right: Optional[int]) -> float:
        costs = self.costs
        cost = costs.node_delete if right is None else self.relabel[left][right]
        for other in range(left):
            image = mapping[other]
            directions = (((left, other), (right, image)), ((other, left), (image, right)))
            for pair, image_pair in directions:
                kinds = self.left_edges.get(pair, frozenset())
                if right is None or image is None:
                    cost += costs.edge_delete * len(kinds)
                    continue
                image_kinds = self.right_edges.get(image_pair, frozenset())
                cost += costs.edge_delete * len(kinds - image_kinds)
                cost += costs.edge_insert * len(image_kinds - kinds)
        return cost

    def solve(self, upper_bound: float, incumbent: Mapping) -> tuple[float, Mapping]:
        """
        Branch and bound over node assignments in id order.
        :param upper_bound: cost of ``incumbent``
        :param incumbent: any complete mapping
        :return: optimal cost and a mapping achieving it
        """
        best_cost = upper_bound
        best_mapping = list(incumbent)
        mapping: Mapping = [None] * self.n
        used: set[int] = set()

        def branch(depth: int, partial: float) -> None:
            nonlocal best_cost, best_mapping
            if depth == self.n:
                total = self.mapping_cost(mapping)
                if total < best_cost:
                    best_cost = total
                    best_mapping = list(mapping)
                return
            options: list[tuple[float, int, Optional[int]]] = [
                (self.relabel[depth][right], right, right)
                for right in range(self.m)
                if right not in used
            ]
            options.sort()
            options.append((self.costs.node_delete, self.m, None))
            for _, _, right in options:
                step = self._step_cost(mapping, depth, right)
                mapping[depth] = right
                if right is not None:
                    used.add(right)
                if partial + step + self._lower_bound(depth + 1, used) < best_cost:
                    branch(depth + 1, partial + step)
                if right is not None:
                    used.discard(right)
                mapping[depth] = None

        branch(0, 0.0)
        return best_cost, best_mapping


def approximate_ged(g1: ReasoningGraph, g2: ReasoningGraph, costs: EditCosts) -> float:
    """
    Upper bound on GED: the cheaper of the greedy matchings built in both directions.
    """
    forward = EditProblem(g1, g2, costs)
    backward = EditProblem(g2, g1, costs.swapped())
    return min(
        forward.mapping_cost(forward.greedy_mapping()),
        backward.mapping_cost(backward.greedy_mapping()),
    )


def exact_ged(g1: ReasoningGraph, g2: ReasoningGraph, costs: EditCosts) -> float:
    """
    Minimum edit cost by branch and bound, seeded with the greedy upper bound.
    """
    problem = EditProblem(g1, g2, costs)
    incumbent = problem.greedy_mapping()
    upper_bound = min(problem.mapping_cost(incumbent), approximate_ged(g1, g2, costs))
    best, _ = problem.solve(upper_bound, incumbent)
    return best


def ged(
    g1: ReasoningGraph,
    g2: ReasoningGraph,
    costs: EditCosts,
    exact_max_nodes: int = DEFAULT_EXACT_GED_MAX_NODES,
) -> GedResult:
    """
    Graph edit distance; exact when both graphs have at most ``exact_max_nodes`` nodes.
    :param g1: ReasoningGraph
    :param g2: ReasoningGraph
    :param costs: EditCosts
    :param exact_max_nodes: size limit for the exact search
    :return: GedResult flagged approximate when the greedy bound was used
    """
    if max(len(g1.nodes), len(g2.nodes)) <= exact_max_nodes:
        return GedResult(distance=exact_ged(g1, g2, costs), approximate=False)
    logger.debug(f"Approximate GED for graphs of {len(g1.nodes)} and {len(g2.nodes)} nodes")
    return GedResult(distance=approximate_ged(g1, g2, costs), approximate=True)
