import math
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, PositiveInt, field_validator, model_validator

from memograph.constants import DEFAULT_CANDIDATE_DEPTH, NodeKind
from memograph.similarity import SimilarityConfig


def identity_compat() -> dict[NodeKind, frozenset[NodeKind]]:
    return {kind: frozenset({kind}) for kind in NodeKind}


class ReusePolicy(BaseModel):
    """
    Knobs of the reuse policy. ``lambda`` is accepted as the JSON key of ``lam``.

    ``type_compat`` maps the kind of a planned node to the kinds allowed to replace it;
    kinds left out only accept themselves.
    """

    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    alpha: float = Field(default=0.5, ge=0, le=1)
    lam: float = Field(default=1.0, ge=0, alias="lambda")
    tau_sim: float = Field(default=0.5, ge=0, le=1)
    tau_margin: float = Field(default=0.0, ge=0)
    beam_width: PositiveInt = 1
    max_candidates_per_node: PositiveInt = 3
    candidate_depth: PositiveInt = DEFAULT_CANDIDATE_DEPTH
    node_affinity: float = Field(default=0.75, ge=0, le=1)
    type_compat: dict[NodeKind, frozenset[NodeKind]] = Field(default_factory=identity_compat)
    pin_versions: bool = True

    @field_validator("tau_margin", mode="before")
    @classmethod
    def parse_margin(cls, value: object) -> object:
        # "inf" disables retrieval in JSON documents
        if isinstance(value, str):
            return float(value)
        return value

    @field_validator("lam")
    @classmethod
    def check_finite_lambda(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("lambda must be finite")
        return value

    @field_validator("type_compat")
    @classmethod
    def complete_type_compat(
        cls, value: dict[NodeKind, frozenset[NodeKind]]
    ) -> dict[NodeKind, frozenset[NodeKind]]:
        compat = {}
        for kind in NodeKind:
            allowed = frozenset(value.get(kind, frozenset({kind})))
            if kind not in allowed:
                raise ValueError(f"type_compat[{kind.value}] must contain {kind.value}")
            compat[kind] = allowed
        return compat

    @model_validator(mode="after")
    def check_pinned(self) -> "ReusePolicy":
        if not self.pin_versions:
            raise ValueError("pin_versions must be true: provenance always names a version")
        return self

    def compatible(self, planned: NodeKind, replacement: NodeKind) -> bool:
        return replacement in self.type_compat[planned]

    @property
    def retrieval_disabled(self) -> bool:
        return self.tau_margin == float("inf")

    def similarity_config(self, base: Optional[SimilarityConfig] = None) -> SimilarityConfig:
        """
        Similarity settings with this policy's blend weight.
        """
        base = base or SimilarityConfig()
        return base.model_copy(update={"alpha": self.alpha})

    def to_document(self) -> dict:
        document = self.model_dump(mode="json", by_alias=True)
        document["type_compat"] = {
            kind: sorted(allowed) for kind, allowed in sorted(document["type_compat"].items())
        }
        if self.retrieval_disabled:
            document["tau_margin"] = "inf"
        return document
