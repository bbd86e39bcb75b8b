"""
Memo(T, R; S, pi): stitch a task's cold plan with subgraphs retrieved from the repository.

The cold plan fixes the structure. A graft marks a connected group of plan nodes as reused
from one pinned entry, so every intermediate state is a complete graph and the marginal
loss change of a candidate is simply L(state + graft) - L(state).
"""
import logging
from dataclasses import replace
from typing import Optional, Sequence, Union

from memograph.constants import MergeAction, ReasonCode
from memograph.cost_model import (
    CostCoefficients,
    LossBreakdown,
    ReuseRegion,
    regions_from_provenance,
    total_loss,
)
from memograph.embedding import pool_graph
from memograph.error_handler import CycleIntroduced, InvalidGraph, NotFound, VersionNotFound
from memograph.graph_core import (
    Provenance,
    ReasoningGraph,
    content_digest,
    descendant_subgraph,
    induced_subgraph,
    replace_nodes,
    topological_order,
    validate,
)
from memograph.memo_engine.alignment import align, node_affinity
from memograph.memo_engine.policy import ReusePolicy
from memograph.memo_engine.task import Planner, TaskSpec
from memograph.memo_engine.trace import MatchCandidate, MergeEvent, StitchState, StitchTrace
from memograph.repository import QueryResult, RepositoryView, TaskQuery
from memograph.similarity import SimilarityConfig

logger = logging.getLogger(__name__)

Demand = Sequence[float]
PassResult = tuple[StitchState, list[MergeEvent], Optional[float]]
Hypothesis = tuple[StitchState, tuple[MergeEvent, ...]]


class MemoEngine:
    """
    Stitching for tasks against one repository view. Losses of visited states are memoized,
    so an engine should not outlive the snapshot it was built on.
    """

    def __init__(
        self,
        repo_view: RepositoryView,
        policy: ReusePolicy,
        coeffs: CostCoefficients,
        cfg: Optional[SimilarityConfig] = None,
    ) -> None:
        self.repo_view = repo_view
        self.policy = policy
        self.coeffs = coeffs
        self.cfg = policy.similarity_config(cfg)
        self._losses: dict[tuple, LossBreakdown] = {}

    def loss(self, state: StitchState) -> LossBreakdown:
        key = (content_digest(state.graph), state.key)
        cached = self._losses.get(key)
        if cached is None:
            cached = total_loss(
                state.graph,
                list(state.regions),
                self.coeffs,
                self.policy.lam,
                self.repo_view,
                self.cfg,
            )
            self._losses[key] = cached
        return cached

    def stub(self, state: StitchState, node_id: str) -> ReasoningGraph:
        """
        Uncovered part of the plan below ``node_id``, down to the candidate depth.
        """
        reachable = descendant_subgraph(state.graph, node_id, self.policy.candidate_depth)
        return induced_subgraph(
            state.graph, [member for member in reachable.node_ids if member not in state.covered]
        )

    def retrieve(self, demand: Demand, state: StitchState, node_id: str) -> list[QueryResult]:
        planned = state.graph.node(node_id)
        return self.repo_view.query(
            TaskQuery(tuple(demand), self.stub(state, node_id)),
            top_k=2 * self.policy.max_candidates_per_node,
            tau_sim=0.0,
            cfg=self.cfg,
            depth=self.policy.candidate_depth,
            anchor_filter=lambda node: node_affinity(planned, node) >= self.policy.node_affinity,
        )

    def graft(
        self, state: StitchState, result: QueryResult, mapping: dict[str, str]
    ) -> StitchState:
        """
        Mark the mapped plan nodes as reused from ``result``'s entry.
        """
        replacements = {
            planned_id: replace(
                state.graph.node(planned_id),
                origin=Provenance(result.graph_id, result.version, source_id),
            )
            for planned_id, source_id in mapping.items()
        }
        region = ReuseRegion(frozenset(mapping), (result.graph_id, result.version, result.anchor))
        return StitchState(replace_nodes(state.graph, replacements), state.regions + (region,))

    def find_candidates(
        self, demand: Demand, state: StitchState, node_id: str
    ) -> list[MatchCandidate]:
        """
        Retrieved candidates for ``node_id``: admissible ones first, ordered by
        (delta_loss, -score, graph_id, version, anchor), then the rejected ones with reasons.
        """
        planned = state.graph.node(node_id)
        base = self.loss(state).total
        admissible: list[MatchCandidate] = []
        rejected: list[MatchCandidate] = []
        for result in self.retrieve(demand, state, node_id):
            try:
                entry = self.repo_view.get(result.graph_id, result.version)
            except (NotFound, VersionNotFound):
                rejected.append(
                    MatchCandidate(node_id, result, reasons=(ReasonCode.DANGLING_PROVENANCE,))
                )
                continue

            reasons = []
            if node_id in state.covered:
                reasons.append(ReasonCode.NODE_COVERED)
            if not self.policy.compatible(planned.kind, entry.graph.node(result.anchor).kind):
                reasons.append(ReasonCode.TYPE_MISMATCH)
            if result.score < self.policy.tau_sim:
                reasons.append(ReasonCode.BELOW_THRESHOLD)
            mapping = None
            if not reasons:
                mapping = align(
                    state.graph, state.covered, node_id, entry.graph, result.anchor, self.policy
                )
                if mapping is None:
                    reasons.append(ReasonCode.NO_ALIGNMENT)
            if reasons or mapping is None:
                rejected.append(MatchCandidate(node_id, result, reasons=tuple(reasons)))
                continue
            if len(admissible) >= self.policy.max_candidates_per_node:
                continue

            stitched = self.graft(state, result, mapping)
            if validate(stitched.graph):
                rejected.append(
                    MatchCandidate(node_id, result, reasons=(ReasonCode.CYCLE_INTRODUCED,))
                )
                continue
            delta = self.loss(stitched).total - base
            logger.debug(
                f"Candidate {result.graph_id}@{result.version}:{result.anchor} for {node_id}: "
                f"score={result.score:.6f} delta={delta:.6g}"
            )
            admissible.append(
                MatchCandidate(node_id, result, delta, True, (), mapping, stitched)
            )

        admissible.sort(key=lambda candidate: candidate.sort_key)
        return admissible + rejected

    def _accept(
        self,
        task: TaskSpec,
        state: StitchState,
        candidate: MatchCandidate,
        candidates: list[MatchCandidate],
        pass_index: int,
    ) -> tuple[StitchState, MergeEvent]:
        assert candidate.stitched is not None
        before = self.loss(state).total
        after = self.loss(candidate.stitched).total
        result = candidate.result
        logger.info(
            f"Task {task.id}: reused {result.graph_id}@{result.version}:{result.anchor} at "
            f"{candidate.node} ({len(candidate.mapping)} nodes), delta={after - before:.6g}, "
            f"loss {before:.6g} -> {after:.6g}"
        )
        event = MergeEvent(
            node=candidate.node,
            action=MergeAction.REUSE,
            loss_before=before,
            loss_after=after,
            source=(result.graph_id, result.version, result.anchor),
            delta=after - before,
            pass_index=pass_index,
            candidates=tuple(candidates),
        )
        return candidate.stitched, event

    def _generate(
        self, node_id: str, state: StitchState, candidates: list[MatchCandidate]
    ) -> MergeEvent:
        loss = self.loss(state).total
        return MergeEvent(
            node=node_id,
            action=MergeAction.GENERATE,
            loss_before=loss,
            loss_after=loss,
            candidates=tuple(candidates),
        )

    def _gated(self, candidates: list[MatchCandidate]) -> list[MatchCandidate]:
        return [
            candidate
            for candidate in candidates
            if candidate.admissible and candidate.delta_loss < -self.policy.tau_margin
        ]

    def greedy_passes(
        self,
        task: TaskSpec,
        state: StitchState,
        first_pass: int = 0,
        steps: Optional[dict[str, Hypothesis]] = None,
    ) -> PassResult:
        """
        Thresholded greedy reuse over the plan in topological order, repeated until a full
        pass accepts nothing. Generate decisions are only recorded in pass 0.
        :param task: TaskSpec
        :param state: starting StitchState
        :param first_pass: index of the first pass
        :param steps: filled with the pass-0 state and events after every plan node
        :return: final state, merge events, best admissible delta of the last pass
        """
        order = topological_order(state.graph)
        events: list[MergeEvent] = []
        if self.policy.retrieval_disabled:
            events = [self._generate(node_id, state, []) for node_id in order]
            if steps is not None:
                for index, node_id in enumerate(order):
                    steps[node_id] = (state, tuple(events[: index + 1]))
            return state, events, None

        pass_index = first_pass
        while True:
            accepted = False
            residual: Optional[float] = None
            for node_id in order:
                if node_id not in state.covered:
                    candidates = self.find_candidates(task.demand, state, node_id)
                    gated = self._gated(candidates)
                    if gated:
                        state, event = self._accept(task, state, gated[0], candidates, pass_index)
                        events.append(event)
                        accepted = True
                    else:
                        if candidates and candidates[0].admissible:
                            best = candidates[0].delta_loss
                            residual = best if residual is None else min(residual, best)
                        if pass_index == 0:
                            events.append(self._generate(node_id, state, candidates))
                if steps is not None and pass_index == 0:
                    steps[node_id] = (state, tuple(events))
            if not accepted:
                return state, events, residual
            pass_index += 1

    def complete(self, task: TaskSpec, state: StitchState) -> PassResult:
        """
        Finish a partial stitching with greedy rescans until it is stable.
        """
        return self.greedy_passes(task, state, first_pass=1)

    def _trace(
        self,
        task: TaskSpec,
        state: StitchState,
        events: Sequence[MergeEvent],
        residual: Optional[float],
        strategy: str,
    ) -> StitchTrace:
        violations = validate(state.graph)
        if violations:
            raise InvalidGraph(violations)
        loss = self.loss(state)
        logger.info(
            f"Task {task.id} stitched ({strategy}): total={loss.total:.6g} cost={loss.cost:.6g} "
            f"inconsistency={loss.inconsistency:.6g} reused={loss.reused}/{len(state.graph)} "
            f"calls={loss.cost_calls:.6g} latency={loss.cost_latency:.6g} "
            f"depth={loss.cost_depth:.6g} meters={loss.cost_meters:.6g} "
            f"retrieval={loss.retrieval_overhead:.6g}"
        )
        return StitchTrace(
            task_id=task.id,
            events=tuple(events),
            final_graph=state.graph,
            regions=state.regions,
            loss=loss,
            tau_margin=self.policy.tau_margin,
            residual_delta=residual,
            strategy=strategy,
        )

    def _checked_plan(self, plan: ReasoningGraph) -> ReasoningGraph:
        violations = validate(plan)
        if violations:
            raise InvalidGraph(violations)
        return plan

    def greedy(self, task: TaskSpec, plan: ReasoningGraph) -> StitchTrace:
        state, events, residual = self.greedy_passes(task, StitchState(self._checked_plan(plan)))
        return self._trace(task, state, events, residual, "greedy")

    def beam(self, task: TaskSpec, plan: ReasoningGraph) -> StitchTrace:
        """
        Beam search over stitchings in plan order. Every hypothesis branches into generate
        and each admissible candidate, including merges that raise the loss for now; those
        are recorded as lookahead events. The greedy pass-0 state is kept alive at every
        step next to the ``beam_width - 1`` best other states, and each survivor is
        completed by greedy rescans. A survivor replaces the greedy result only when it is
        strictly better, and by more than ``tau_margin`` when it took a lookahead merge.
        :param task: TaskSpec
        :param plan: cold plan
        :return: StitchTrace
        """
        plan = self._checked_plan(plan)
        steps: dict[str, Hypothesis] = {}
        start = StitchState(plan)
        greedy_state, greedy_events, greedy_residual = self.greedy_passes(task, start, steps=steps)
        greedy_trace = self._trace(task, greedy_state, greedy_events, greedy_residual, "greedy")
        if self.policy.beam_width == 1 or self.policy.retrieval_disabled:
            return greedy_trace

        hypotheses: list[Hypothesis] = [(start, ())]
        for node_id in topological_order(plan):
            greedy_step = steps[node_id]
            pool: dict[tuple, Hypothesis] = {greedy_step[0].key: greedy_step}
            for state, events in hypotheses:
                for branch in self._branches(task, state, events, node_id):
                    pool.setdefault(branch[0].key, branch)
            others = sorted(
                (hypothesis for key, hypothesis in pool.items() if key != greedy_step[0].key),
                key=lambda hypothesis: (self.loss(hypothesis[0]).total, hypothesis[0].order_key),
            )
            hypotheses = [greedy_step] + others[: self.policy.beam_width - 1]

        best_state, best_events, best_residual = greedy_state, greedy_events, greedy_residual
        greedy_total = best_total = self.loss(greedy_state).total
        for state, events in hypotheses:
            final_state, more_events, residual = self.complete(task, state)
            total = self.loss(final_state).total
            bar = best_total
            if any(event.lookahead for event in events):
                bar = min(bar, greedy_total - self.policy.tau_margin)
            if total < bar:
                best_total = total
                best_state, best_events, best_residual = (
                    final_state,
                    list(events) + more_events,
                    residual,
                )
        if best_state is greedy_state:
            return greedy_trace
        return self._trace(task, best_state, best_events, best_residual, "beam")

    def _branches(
        self, task: TaskSpec, state: StitchState, events: tuple[MergeEvent, ...], node_id: str
    ) -> list[Hypothesis]:
        if node_id in state.covered:
            return [(state, events)]
        candidates = self.find_candidates(task.demand, state, node_id)
        branches = [(state, events + (self._generate(node_id, state, candidates),))]
        for candidate in candidates:
            if not candidate.admissible:
                continue
            stitched, event = self._accept(task, state, candidate, candidates, 0)
            if not candidate.delta_loss < -self.policy.tau_margin:
                event = replace(event, lookahead=True)
            branches.append((stitched, events + (event,)))
        return branches

    def rescan(self, task: TaskSpec, trace: StitchTrace) -> list[MatchCandidate]:
        """
        Fresh candidate search at every uncovered node of a finished stitching.
        :param task: TaskSpec the trace was stitched for
        :param trace: StitchTrace
        :return: candidates of all uncovered nodes in plan order, rejected ones included
        """
        state = StitchState(trace.final_graph, trace.regions)
        return [
            candidate
            for node_id in topological_order(state.graph)
            if node_id not in state.covered
            for candidate in self.find_candidates(task.demand, state, node_id)
        ]

    def stitch(self, task: TaskSpec, plan: ReasoningGraph) -> StitchTrace:
        if self.policy.beam_width == 1:
            return self.greedy(task, plan)
        return self.beam(task, plan)


def _as_state(plan_context: Union[StitchState, ReasoningGraph]) -> StitchState:
    if isinstance(plan_context, StitchState):
        return plan_context
    return StitchState(plan_context, tuple(regions_from_provenance(plan_context)))


def find_candidates(
    v: str,
    plan_context: Union[StitchState, ReasoningGraph],
    repo_view: RepositoryView,
    policy: ReusePolicy,
    cfg: Optional[SimilarityConfig] = None,
    coeffs: Optional[CostCoefficients] = None,
    demand: Optional[Demand] = None,
) -> list[MatchCandidate]:
    """
    Candidate matches M(v) for frontier node ``v``, annotated with their loss change.
    :param v: plan node id
    :param plan_context: current stitched plan, as a state or a graph with provenance
    :param repo_view: repository or snapshot
    :param policy: ReusePolicy
    :param cfg: SimilarityConfig; alpha comes from the policy
    :param coeffs: CostCoefficients, defaults when omitted
    :param demand: task embedding, the pooled plan features when omitted
    :return: admissible candidates first, then rejected ones with reason codes
    """
    state = _as_state(plan_context)
    engine = MemoEngine(repo_view, policy, coeffs or CostCoefficients(), cfg)
    if demand is None:
        demand = tuple(pool_graph(state.graph))
    return engine.find_candidates(demand, state, v)


def delta_loss(
    v: str,
    m: MatchCandidate,
    plan_context: Union[StitchState, ReasoningGraph],
    policy: ReusePolicy,
    coeffs: CostCoefficients,
    repo_view: RepositoryView,
    cfg: Optional[SimilarityConfig] = None,
) -> float:
    """
    L(plan with ``m`` grafted at ``v``) - L(plan with ``v`` expanded natively).
    """
    state = _as_state(plan_context)
    engine = MemoEngine(repo_view, policy, coeffs, cfg)
    mapping = dict(m.mapping)
    if not mapping:
        entry = repo_view.get(m.result.graph_id, m.result.version)
        aligned = align(state.graph, state.covered, v, entry.graph, m.result.anchor, policy)
        if aligned is None:
            raise ValueError(f"candidate {m.result.entry_ref}:{m.result.anchor} cannot align")
        mapping = aligned
    stitched = engine.graft(state, m.result, mapping)
    if validate(stitched.graph):
        raise CycleIntroduced(v, m.result.anchor)
    return engine.loss(stitched).total - engine.loss(state).total


def greedy_stitch(
    task: TaskSpec,
    planner: Planner,
    repo_view: RepositoryView,
    policy: ReusePolicy,
    coeffs: CostCoefficients,
    cfg: Optional[SimilarityConfig] = None,
) -> StitchTrace:
    return MemoEngine(repo_view, policy, coeffs, cfg).greedy(task, planner.plan(task))


def beam_stitch(
    task: TaskSpec,
    planner: Planner,
    repo_view: RepositoryView,
    policy: ReusePolicy,
    coeffs: CostCoefficients,
    cfg: Optional[SimilarityConfig] = None,
) -> StitchTrace:
    return MemoEngine(repo_view, policy, coeffs, cfg).beam(task, planner.plan(task))


def memo(
    task: TaskSpec,
    repo_view: RepositoryView,
    policy: ReusePolicy,
    coeffs: CostCoefficients,
    cfg: Optional[SimilarityConfig],
    planner: Planner,
) -> StitchTrace:
    """
    Stitched graph for ``task``: greedy for beam width 1, beam search otherwise.
    :param task: TaskSpec
    :param repo_view: repository or snapshot to retrieve from
    :param policy: ReusePolicy
    :param coeffs: CostCoefficients
    :param cfg: SimilarityConfig; alpha comes from the policy
    :param planner: cold planner for the task
    :return: StitchTrace
    """
    return MemoEngine(repo_view, policy, coeffs, cfg).stitch(task, planner.plan(task))
