from pydantic import BaseModel, ConfigDict, Field


class CostCoefficients(BaseModel):
    """
    Prices of the cost objective: ``a1``, ``a2``, ``a3`` weigh executed calls, latency and
    plan depth; ``c_llm``, ``c_tool``, ``c_lat`` price the node meters; ``c_retrieve`` is
    charged per reused node instead of its meters.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    a1: float = Field(default=0.01, ge=0)
    a2: float = Field(default=0.00001, ge=0)
    a3: float = Field(default=0.01, ge=0)
    c_llm: float = Field(default=0.00002, ge=0)
    c_tool: float = Field(default=0.01, ge=0)
    c_lat: float = Field(default=0.00001, ge=0)
    c_retrieve: float = Field(default=0.002, ge=0)
