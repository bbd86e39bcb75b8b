"""
JSON run and sweep configuration documents.
"""
import json
from pathlib import Path
from typing import Optional, Type, TypeVar

from pydantic import BaseModel, ConfigDict, Field, PositiveInt, field_validator, model_validator

from memograph import settings
from memograph.cost_model import CostCoefficients
from memograph.embedding import EmbeddingSpec
from memograph.error_handler import InvalidConfig
from memograph.executor import ExecutorProfile
from memograph.memo_engine import ReusePolicy
from memograph.similarity import SimilarityConfig
from memograph.workload_harness.family import FamilyConfig

ConfigModel = TypeVar("ConfigModel", bound=BaseModel)


class RunConfig(BaseModel):
    """
    Everything a run needs besides the store. Every section falls back to its defaults;
    ``similarity.alpha`` is superseded by ``policy.alpha``.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    policy: ReusePolicy = Field(default_factory=ReusePolicy)
    cost: CostCoefficients = Field(default_factory=CostCoefficients)
    similarity: SimilarityConfig = Field(default_factory=SimilarityConfig)
    embedding: EmbeddingSpec = Field(default_factory=EmbeddingSpec)
    family: FamilyConfig = Field(default_factory=FamilyConfig)
    executor: ExecutorProfile = Field(default_factory=ExecutorProfile)
    seeds: list[int] = Field(default_factory=lambda: [0])
    workers: PositiveInt = settings.WORKERS

    @model_validator(mode="after")
    def check_seeds(self) -> "RunConfig":
        if not self.seeds:
            raise ValueError("seeds must not be empty")
        return self

    @property
    def similarity_config(self) -> SimilarityConfig:
        return self.policy.similarity_config(self.similarity)

    def with_policy(self, **changes: object) -> "RunConfig":
        policy = ReusePolicy.model_validate({**self.policy.to_document(), **changes})
        return self.model_copy(update={"policy": policy})

    def with_seed(self, seed: int) -> "RunConfig":
        """
        Same run on the family drawn from ``seed``.
        """
        family = self.family.model_copy(update={"seed": seed})
        return self.model_copy(update={"family": family, "seeds": [seed]})


class SweepGrid(BaseModel):
    """
    Grid of policy values; every combination is one sweep row. ``top_k`` varies
    ``max_candidates_per_node`` when given.
    """

    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    lam: list[float] = Field(alias="lambda", min_length=1)
    tau_margin: list[float] = Field(default_factory=lambda: [0.0], min_length=1)
    beam: list[PositiveInt] = Field(default_factory=lambda: [1], min_length=1)
    top_k: Optional[list[PositiveInt]] = None
    seeds: Optional[list[int]] = None
    base: RunConfig = Field(default_factory=RunConfig)

    @field_validator("tau_margin", mode="before")
    @classmethod
    def parse_margins(cls, value: object) -> object:
        if isinstance(value, list):
            return [float(item) if isinstance(item, str) else item for item in value]
        return value

    @property
    def seed_list(self) -> list[int]:
        return list(self.seeds) if self.seeds is not None else list(self.base.seeds)

    def points(self) -> list[dict[str, float]]:
        """
        Grid points in lambda, tau_margin, beam, top_k order.
        """
        top_ks = self.top_k or [self.base.policy.max_candidates_per_node]
        return [
            {"lambda": lam, "tau_margin": margin, "beam": beam, "top_k": top_k}
            for lam in self.lam
            for margin in self.tau_margin
            for beam in self.beam
            for top_k in top_ks
        ]


def load_json(path: Path) -> object:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except OSError as exc:
        raise InvalidConfig(str(path), f"cannot read: {exc}")
    except json.JSONDecodeError as exc:
        raise InvalidConfig(str(path), f"invalid JSON: {exc}")


def load_model(path: Path, model: Type[ConfigModel]) -> ConfigModel:
    """
    Parse and validate a JSON configuration file.
    :param path: file path
    :param model: pydantic model class
    :return: validated model; pydantic ``ValidationError`` propagates
    """
    return model.model_validate(load_json(path))
