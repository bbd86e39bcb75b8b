"""
Schemas of the records written to the store log.
"""
from typing import Annotated, Any, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, PositiveInt, TypeAdapter

from memograph.constants import EntrySource


class _Record(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    graph_id: str = Field(min_length=1)
    version: PositiveInt
    created_at: str


class EntryRecord(_Record):
    type: Literal["entry"] = "entry"
    graph: dict[str, Any]
    task_embedding: list[float]
    output_signature: str
    metrics: dict[str, float] = {}
    node_signatures: dict[str, str] = {}
    source: EntrySource = EntrySource.API
    environment: dict[str, str] = {}


class TombstoneRecord(_Record):
    type: Literal["tombstone"] = "tombstone"


class ReuseRecord(_Record):
    type: Literal["reuse"] = "reuse"


StoreRecord = Union[EntryRecord, TombstoneRecord, ReuseRecord]

RECORD_ADAPTER: TypeAdapter[StoreRecord] = TypeAdapter(
    Annotated[StoreRecord, Field(discriminator="type")]
)


def parse_record(document: Any) -> StoreRecord:
    """
    Validate a decoded log payload against the record union, keyed by its ``type``.
    :param document: parsed JSON value
    :return: EntryRecord, TombstoneRecord or ReuseRecord
    """
    return RECORD_ADAPTER.validate_python(document)
