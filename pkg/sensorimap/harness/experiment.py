from __future__ import annotations

import math
from pathlib import Path
from typing import Dict, List, Literal, Mapping, Optional, Union

from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from sensorimap.arm.kinematics import ArmModel
from sensorimap.core.exceptions import ConfigurationError
from sensorimap.core.expressions import parse_number
from sensorimap.learning.adaptation import AdaptationSettings
from sensorimap.maps.models import DensityParams, GridSpec, TrainingSchedule

ScenarioName = Literal["baseline_som", "vdsom", "stretch", "shorten"]

_FLOAT_FIELDS = {
    "alpha_init",
    "sigma_init",
    "time_constant",
    "neighborhood_cutoff",
    "local_radius",
    "rho_floor",
    "spacing_scale",
    "link1",
    "link2",
    "theta1_min",
    "theta1_max",
    "theta2_min",
    "theta2_max",
    "eta_init",
    "activity_floor",
    "stretch_factor",
    "shorten_factor",
    "threshold_ratio",
    "relearn_fraction",
    "relearn_beta_init",
    "relearn_eta_init",
    "query_radius",
}


class ExperimentConfig(BaseModel):
    """Every knob of a reproduction run. Seeds are explicit; nothing reads the clock."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    scenario: ScenarioName = "vdsom"
    grid_sizes: List[int] = [70]
    variant: Optional[Literal["som", "vdsom"]] = None

    # map training
    alpha_init: float = 0.1
    sigma_init: Optional[float] = None
    time_constant: Optional[float] = None
    total_iters: int = 50_000
    neighborhood_cutoff: float = 3.0
    local_radius: float = 1.0
    rho_floor: float = 0.05
    spacing_scale: float = 2.0

    # arm and babbling
    link1: float = 150.0
    link2: float = 150.0
    theta1_min: float = 0.0
    theta1_max: float = math.pi / 2
    theta2_min: float = 0.0
    theta2_max: float = math.pi * 5 / 6
    train_samples: int = 10_000
    test_samples: int = 5_000
    bridge_samples: int = 10_000
    seed: int = 0
    test_seed: Optional[int] = None

    # bridge
    eta_init: float = 0.3
    activity_floor: float = 1e-8
    query_mode: Literal["argmax", "interpolate"] = "argmax"
    query_radius: float = 1.0

    # morphology change
    perturb_link: Literal[1, 2] = 2
    stretch_factor: float = 1.5
    shorten_factor: float = 0.6
    threshold_ratio: float = 1.3
    window: int = 500
    calibration_windows: int = Field(4, ge=1)
    relearn_fraction: float = 0.2
    relearn_beta_init: float = 1.0
    relearn_eta_init: float = 0.5
    zeta_metric: Literal["summed", "quantization"] = "quantization"
    compare_scratch: bool = False

    output_dir: str = "runs"

    @field_validator("grid_sizes", mode="before")
    @classmethod
    def _split_sizes(cls, value: object) -> object:
        if isinstance(value, str):
            return [int(part) for part in value.split(",") if part.strip()]
        if isinstance(value, int):
            return [value]
        return value

    @field_validator("perturb_link", mode="before")
    @classmethod
    def _link_number(cls, value: object) -> object:
        return int(value) if isinstance(value, str) and value.strip().isdigit() else value

    @field_validator(*sorted(_FLOAT_FIELDS), mode="before")
    @classmethod
    def _numbers(cls, value: object) -> object:
        if value is None or (isinstance(value, str) and value.strip().lower() in ("", "none", "auto")):
            return None
        return parse_number(value)  # type: ignore[arg-type]

    @property
    def map_variant(self) -> Literal["som", "vdsom"]:
        if self.variant is not None:
            return self.variant
        return "som" if self.scenario == "baseline_som" else "vdsom"

    @property
    def effective_test_seed(self) -> int:
        return self.seed + 1 if self.test_seed is None else self.test_seed

    def grids(self, input_dim: int = 2) -> List[GridSpec]:
        return [GridSpec(rows=n, cols=n, input_dim=input_dim) for n in self.grid_sizes]

    def schedule(self, spec: GridSpec, seed: int) -> TrainingSchedule:
        sigma_init = self.sigma_init if self.sigma_init is not None else spec.side / 2.0
        if self.time_constant is not None:
            time_constant = self.time_constant
        elif sigma_init > 1.0:
            time_constant = self.total_iters / math.log(sigma_init)
        else:
            time_constant = float(max(self.total_iters, 1))
        return TrainingSchedule(
            alpha_init=self.alpha_init,
            sigma_init=sigma_init,
            time_constant=max(time_constant, 1e-9),
            total_iters=self.total_iters,
            seed=seed,
            neighborhood_cutoff=self.neighborhood_cutoff,
            trace_window=self.window,
        )

    def density(self) -> DensityParams:
        return DensityParams(local_radius=self.local_radius, rho_floor=self.rho_floor, spacing_scale=self.spacing_scale)

    def adaptation(self) -> AdaptationSettings:
        return AdaptationSettings(
            threshold_ratio=self.threshold_ratio,
            relearn_fraction=self.relearn_fraction,
            beta_init=self.relearn_beta_init,
            eta_init=self.relearn_eta_init,
            metric=self.zeta_metric,
        )

    def arm(self) -> ArmModel:
        return ArmModel(
            link1=self.link1,
            link2=self.link2,
            theta1_range=(self.theta1_min, self.theta1_max),
            theta2_range=(self.theta2_min, self.theta2_max),
        )


def _normalize_keys(values: Mapping[str, Optional[str]]) -> Dict[str, Optional[str]]:
    return {key.strip().lower(): value for key, value in values.items()}


def load_experiment_config(
    path: Optional[Union[str, Path]] = None,
    overrides: Optional[Mapping[str, object]] = None,
) -> ExperimentConfig:
    """Read a KEY=VALUE file, apply overrides, and validate.

    Keys are case-insensitive; unknown keys are errors.
    """

    values: Dict[str, object] = {}
    if path is not None:
        file_path = Path(path)
        if not file_path.is_file():
            raise ConfigurationError(f"config file not found: {file_path}")
        values.update(_normalize_keys(dotenv_values(file_path)))
    if overrides:
        values.update({key.strip().lower(): value for key, value in overrides.items()})

    unknown = sorted(set(values) - set(ExperimentConfig.model_fields))
    if unknown:
        raise ConfigurationError(f"unknown config keys: {', '.join(unknown)}")
    empty = sorted(key for key, value in values.items() if value is None)
    if empty:
        raise ConfigurationError(f"config keys without a value: {', '.join(empty)}")

    try:
        return ExperimentConfig.model_validate(values)
    except ValidationError as e:
        problems = "; ".join(f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors())
        raise ConfigurationError(f"invalid experiment config: {problems}") from e


def dump_experiment_config(config: ExperimentConfig, path: Union[str, Path]) -> Path:
    """Write the resolved config back as KEY=VALUE lines, sorted by key."""

    lines = []
    for key, value in sorted(config.model_dump().items()):
        if value is None:
            continue
        if isinstance(value, list):
            value = ",".join(str(v) for v in value)
        elif isinstance(value, float):
            value = repr(value)
        elif isinstance(value, bool):
            value = str(value).lower()
        lines.append(f"{key.upper()}={value}")
    out = Path(path)
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return out
