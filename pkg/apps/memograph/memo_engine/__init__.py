from .alignment import align, can_replace, node_affinity
from .engine import (
    MemoEngine,
    beam_stitch,
    delta_loss,
    find_candidates,
    greedy_stitch,
    memo,
)
from .policy import ReusePolicy, identity_compat
from .task import Planner, TaskSpec
from .trace import (
    LOSS_TOLERANCE,
    MatchCandidate,
    MergeEvent,
    StitchState,
    StitchTrace,
    best_admissible_delta,
    verify_monotone,
)
