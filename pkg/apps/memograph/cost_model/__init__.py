from .coefficients import CostCoefficients
from .loss import (
    LossBreakdown,
    ReuseRegion,
    inconsistency,
    region_similarity,
    regions_from_provenance,
    reused_node_ids,
    structural_cost,
    total_loss,
    weighted_inconsistency,
)
