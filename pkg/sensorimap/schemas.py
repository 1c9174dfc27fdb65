from __future__ import annotations

from typing import Any, Dict, Literal, Optional, Tuple

from pydantic import BaseModel, Field


class QueryOptions(BaseModel):
    mode: Optional[Literal["argmax", "interpolate"]] = Field(
        default=None,
        description="Decoding of the winning connection. Defaults to the server's QUERY_MODE.",
    )
    sigma_q: Optional[float] = Field(
        default=None,
        ge=0.0,
        description="Lattice radius used by 'interpolate' decoding. Defaults to QUERY_RADIUS.",
    )


class ForwardRequest(QueryOptions):
    joints_rad: Tuple[float, float] = Field(..., description="(theta1, theta2) in radians")


class ForwardResponse(BaseModel):
    joints_rad: Tuple[float, float]
    position_mm: Tuple[float, float]
    mode: str
    sigma_q: float


class InverseRequest(QueryOptions):
    position_mm: Tuple[float, float] = Field(..., description="End-effector (X, Y) in mm")


class InverseResponse(BaseModel):
    position_mm: Tuple[float, float]
    joints_rad: Tuple[float, float]
    mode: str
    sigma_q: float


class ModelInfo(BaseModel):
    path: str
    schema_version: int
    motor_grid: str
    sensory_grid: str
    connections_nonzero: int
    untrained_motor_nodes: int
    eta: float
    beta: float
    normalizer: Dict[str, Any]
