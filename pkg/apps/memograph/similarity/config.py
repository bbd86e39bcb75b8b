from pydantic import BaseModel, ConfigDict, Field, PositiveInt, model_validator

from memograph.constants import DEFAULT_EXACT_GED_MAX_NODES


class EditCosts(BaseModel):
    """
    Unit prices of graph edit operations.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    node_insert: float = Field(default=1.0, ge=0)
    node_delete: float = Field(default=1.0, ge=0)
    node_relabel: float = Field(default=1.0, ge=0)
    edge_insert: float = Field(default=1.0, ge=0)
    edge_delete: float = Field(default=1.0, ge=0)

    @model_validator(mode="after")
    def check_triangle(self) -> "EditCosts":
        if self.node_relabel > self.node_insert + self.node_delete:
            raise ValueError("node_relabel must not exceed node_insert + node_delete")
        return self

    @property
    def symmetric(self) -> bool:
        return self.node_insert == self.node_delete and self.edge_insert == self.edge_delete

    def swapped(self) -> "EditCosts":
        """
        Prices of the inverse edit script (insertions become deletions).
        """
        return EditCosts(
            node_insert=self.node_delete,
            node_delete=self.node_insert,
            node_relabel=self.node_relabel,
            edge_insert=self.edge_delete,
            edge_delete=self.edge_insert,
        )


class SimilarityConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    alpha: float = Field(default=0.5, ge=0, le=1)
    edit_costs: EditCosts = EditCosts()
    exact_ged_max_nodes: PositiveInt = DEFAULT_EXACT_GED_MAX_NODES
