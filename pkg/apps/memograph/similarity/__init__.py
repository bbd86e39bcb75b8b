from .config import EditCosts, SimilarityConfig
from .ged import EditProblem, GedResult, approximate_ged, exact_ged, ged, relabel_cost
from .scores import (
    SCORE_CACHE,
    SimilarityScore,
    s_sem,
    s_struct,
    similarity,
    similarity_report,
    similarity_upper_bound,
    structural_score,
)
