"""
Node alignment between a frontier node's plan neighbourhood and a retrieved subgraph.
"""
from collections import deque
from typing import AbstractSet, Optional

from memograph.embedding import cosine, same_token_bag
from memograph.graph_core import ReasoningGraph, ReasoningNode
from memograph.memo_engine.policy import ReusePolicy


def node_affinity(first: ReasoningNode, second: ReasoningNode) -> float:
    """
    Feature cosine of two nodes; 0 for equal features of labels with different tokens.
    """
    if first.feature == second.feature and not same_token_bag(first.label, second.label):
        return 0.0
    return cosine(first.vector, second.vector)


def can_replace(planned: ReasoningNode, source: ReasoningNode, policy: ReusePolicy) -> bool:
    return (
        policy.compatible(planned.kind, source.kind)
        and node_affinity(planned, source) >= policy.node_affinity
    )


def align(
    plan: ReasoningGraph,
    covered: AbstractSet[str],
    frontier: str,
    source: ReasoningGraph,
    anchor: str,
    policy: ReusePolicy,
) -> Optional[dict[str, str]]:
    """
    Map ``frontier`` onto ``anchor`` and walk both graphs breadth first, pairing every
    uncovered plan child with the best unused source child of its mapped parent: same label
    first, then highest feature cosine, then smallest id. Only pairs that are kind
    compatible and reach the policy's node affinity are taken.
    :param plan: the cold plan
    :param covered: plan nodes already grafted
    :param frontier: plan node id
    :param source: repository graph
    :param anchor: source node id
    :param policy: ReusePolicy
    :return: plan node id -> source node id, None when the anchor itself cannot be paired
    """
    if frontier in covered:
        return None
    if not can_replace(plan.node(frontier), source.node(anchor), policy):
        return None

    mapping = {frontier: anchor}
    used = {anchor}
    queue = deque([(frontier, anchor, 0)])
    while queue:
        planned_id, source_id, depth = queue.popleft()
        if depth >= policy.candidate_depth:
            continue
        for child_id in plan.successors(planned_id):
            if child_id in mapping or child_id in covered:
                continue
            child = plan.node(child_id)
            options = [
                source.node(option_id)
                for option_id in source.successors(source_id)
                if option_id not in used and can_replace(child, source.node(option_id), policy)
            ]
            if not options:
                continue
            best = min(
                options,
                key=lambda option: (
                    option.label != child.label,
                    -node_affinity(child, option),
                    option.id,
                ),
            )
            mapping[child_id] = best.id
            used.add(best.id)
            queue.append((child_id, best.id, depth + 1))
    return mapping
