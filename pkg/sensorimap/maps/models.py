from __future__ import annotations

import math
from typing import List, Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from sensorimap.core.exceptions import ConfigurationError, StateError


class GridSpec(BaseModel):
    """Shape of a rectangular lattice and the dimension of its weight vectors."""

    model_config = ConfigDict(frozen=True)

    rows: int
    cols: int
    input_dim: int

    @model_validator(mode="after")
    def _check(self) -> "GridSpec":
        if self.rows < 2 or self.cols < 2:
            raise ConfigurationError(f"grid must be at least 2x2, got {self.rows}x{self.cols}")
        if self.input_dim < 1:
            raise ConfigurationError(f"input_dim must be >= 1, got {self.input_dim}")
        return self

    @property
    def size(self) -> int:
        return self.rows * self.cols

    @property
    def side(self) -> int:
        return max(self.rows, self.cols)

    @property
    def label(self) -> str:
        return f"{self.rows}x{self.cols}"


class TrainingSchedule(BaseModel):
    """Exponential decay schedule for the learning rate and neighborhood radius.

    ``neighborhood_cutoff`` is expressed in multiples of sigma(t); nodes farther
    than that on the lattice are skipped. ``0`` disables the cutoff (exact mode).
    """

    model_config = ConfigDict(frozen=True)

    alpha_init: float
    sigma_init: float
    time_constant: float
    total_iters: int
    seed: int = 0
    neighborhood_cutoff: float = 3.0
    trace_window: int = 500

    @model_validator(mode="after")
    def _check(self) -> "TrainingSchedule":
        if not 0.0 < self.alpha_init <= 1.0:
            raise ConfigurationError(f"alpha_init must be in (0, 1], got {self.alpha_init}")
        if not self.sigma_init > 0.0:
            raise ConfigurationError(f"sigma_init must be > 0, got {self.sigma_init}")
        if not self.time_constant > 0.0:
            raise ConfigurationError(f"time_constant must be > 0, got {self.time_constant}")
        if self.total_iters < 0:
            raise ConfigurationError(f"total_iters must be >= 0, got {self.total_iters}")
        if self.neighborhood_cutoff < 0.0:
            raise ConfigurationError("neighborhood_cutoff must be >= 0")
        if self.trace_window < 1:
            raise ConfigurationError("trace_window must be >= 1")
        return self

    @property
    def checkpoint_every(self) -> int:
        return max(1, self.total_iters // 100)

    def validate_for(self, spec: GridSpec) -> None:
        if self.sigma_init > spec.side:
            raise ConfigurationError(
                f"sigma_init={self.sigma_init} exceeds the grid dimension {spec.side}"
            )


def default_schedule(spec: GridSpec, total_iters: int, seed: int = 0, alpha_init: float = 0.1) -> TrainingSchedule:
    """alpha 0.1, sigma from half the grid side, decaying to about 1 at the end."""

    sigma_init = spec.side / 2.0
    time_constant = total_iters / math.log(sigma_init) if sigma_init > 1.0 and total_iters > 0 else float(max(total_iters, 1))
    return TrainingSchedule(
        alpha_init=alpha_init,
        sigma_init=sigma_init,
        time_constant=time_constant,
        total_iters=total_iters,
        seed=seed,
    )


class DensityParams(BaseModel):
    """Density term settings.

    Weight distances inside the density coefficient are measured in units of
    ``spacing_scale / (side - 1)``, a multiple of the spacing of a map spanning
    the unit box. ``spacing_scale=0`` uses raw weight distances.
    """

    model_config = ConfigDict(frozen=True)

    local_radius: float = 1.0
    rho_floor: float = 0.05
    onset_exponent: Literal[4] = 4
    spacing_scale: float = 2.0
    enabled: bool = True

    @model_validator(mode="after")
    def _check(self) -> "DensityParams":
        if not self.local_radius > 0.0:
            raise ConfigurationError(f"local_radius must be > 0, got {self.local_radius}")
        if not 0.0 < self.rho_floor < 1.0:
            raise ConfigurationError(f"rho_floor must be in (0, 1), got {self.rho_floor}")
        if self.spacing_scale < 0.0:
            raise ConfigurationError(f"spacing_scale must be >= 0, got {self.spacing_scale}")
        return self

    def distance_unit(self, spec: GridSpec) -> float:
        return self.spacing_scale / (spec.side - 1) if self.spacing_scale > 0 else 1.0


TraceMetric = Literal["summed", "quantization"]


class TraceCheckpoint(BaseModel):
    iteration: int
    sigma: float
    alpha: float
    distortion: float = Field(..., ge=0.0, description="Summed distortion over all nodes")
    quantization_error: float = Field(..., ge=0.0, description="Mean squared distance to the BMU")

    def metric(self, name: TraceMetric) -> float:
        return self.distortion if name == "summed" else self.quantization_error


class TrainingTrace(BaseModel):
    """Checkpoints recorded during training, in strictly increasing iteration order."""

    checkpoints: List[TraceCheckpoint] = Field(default_factory=list)

    def record(self, checkpoint: TraceCheckpoint) -> None:
        if self.checkpoints and checkpoint.iteration <= self.checkpoints[-1].iteration:
            raise StateError(
                f"checkpoint iteration {checkpoint.iteration} is not after {self.checkpoints[-1].iteration}"
            )
        self.checkpoints.append(checkpoint)

    def __len__(self) -> int:
        return len(self.checkpoints)

    @property
    def final(self) -> TraceCheckpoint:
        if not self.checkpoints:
            raise StateError("training trace is empty")
        return self.checkpoints[-1]
