from __future__ import annotations

import json
import os
from pathlib import Path
from typing import List, Literal, Tuple, Union

import numpy as np
from pydantic import BaseModel, ValidationError

from sensorimap.arm.kinematics import Normalizer
from sensorimap.core.exceptions import SnapshotError, SnapshotFormatError, UnsupportedVersionError
from sensorimap.core.logging import get_logger
from sensorimap.learning.bridge import AssociativeBridge
from sensorimap.learning.model import SensorimotorModel
from sensorimap.maps.lattice import SomMap
from sensorimap.maps.models import GridSpec


logger = get_logger(__name__)

SCHEMA_VERSION = 1
SNAPSHOT_KIND = "sensorimap-snapshot"


class MapDocument(BaseModel):
    rows: int
    cols: int
    input_dim: int
    weights: List[List[float]]

    @classmethod
    def from_map(cls, map_: SomMap) -> "MapDocument":
        return cls(
            rows=map_.spec.rows,
            cols=map_.spec.cols,
            input_dim=map_.spec.input_dim,
            weights=map_.weights.tolist(),
        )

    def to_map(self) -> SomMap:
        spec = GridSpec(rows=self.rows, cols=self.cols, input_dim=self.input_dim)
        return SomMap(spec=spec, weights=np.asarray(self.weights, dtype=np.float64).reshape(spec.size, spec.input_dim))


class BridgeDocument(BaseModel):
    """Connection matrix in coordinate form: only nonzero entries are listed."""

    shape: Tuple[int, int]
    eta: float
    beta: float
    rows: List[int]
    cols: List[int]
    values: List[float]

    @classmethod
    def from_bridge(cls, bridge: AssociativeBridge) -> "BridgeDocument":
        rows, cols = np.nonzero(bridge.strengths)
        return cls(
            shape=(bridge.motor_nodes, bridge.sensory_nodes),
            eta=bridge.eta,
            beta=bridge.beta,
            rows=rows.tolist(),
            cols=cols.tolist(),
            values=bridge.strengths[rows, cols].tolist(),
        )

    def to_bridge(self) -> AssociativeBridge:
        if not len(self.rows) == len(self.cols) == len(self.values):
            raise SnapshotFormatError("bridge coordinate lists differ in length")
        strengths = np.zeros(self.shape, dtype=np.float64)
        strengths[np.asarray(self.rows, dtype=np.intp), np.asarray(self.cols, dtype=np.intp)] = self.values
        return AssociativeBridge(strengths=strengths, eta=self.eta, beta=self.beta)


class SnapshotDocument(BaseModel):
    schema_version: int
    kind: Literal["sensorimap-snapshot"] = SNAPSHOT_KIND
    motor: MapDocument
    sensory: MapDocument
    bridge: BridgeDocument
    normalizer: Normalizer


def save_snapshot(model: SensorimotorModel, path: Union[str, Path]) -> Path:
    """Write the model as one JSON document; floats keep their exact repr."""

    doc = SnapshotDocument(
        schema_version=SCHEMA_VERSION,
        motor=MapDocument.from_map(model.motor),
        sensory=MapDocument.from_map(model.sensory),
        bridge=BridgeDocument.from_bridge(model.bridge),
        normalizer=model.normalizer,
    )
    out = Path(path)
    tmp = out.with_name(out.name + ".tmp")
    try:
        with tmp.open("w", encoding="utf-8") as fh:
            json.dump(doc.model_dump(mode="python"), fh, separators=(",", ":"))
            fh.write("\n")
        os.replace(tmp, out)
    except OSError as e:
        raise SnapshotError(f"cannot write snapshot {out}: {e}") from e
    logger.info("snapshot saved path=%s grid=%s nonzero=%d", out, model.motor.spec.label, len(doc.bridge.values))
    return out


def load_snapshot(path: Union[str, Path]) -> SensorimotorModel:
    src = Path(path)
    try:
        raw = src.read_bytes()
    except OSError as e:
        raise SnapshotError(f"cannot read snapshot {src}: {e}") from e
    try:
        payload = json.loads(raw.decode("utf-8"))
    except UnicodeDecodeError as e:
        raise SnapshotFormatError(f"snapshot {src} is not UTF-8", offset=e.start) from e
    except json.JSONDecodeError as e:
        offset = len(e.doc[: e.pos].encode("utf-8"))
        raise SnapshotFormatError(f"snapshot {src} is not valid JSON: {e.msg}", offset=offset) from e

    if not isinstance(payload, dict) or "schema_version" not in payload:
        raise SnapshotFormatError(f"snapshot {src} has no schema_version")
    if payload["schema_version"] != SCHEMA_VERSION:
        raise UnsupportedVersionError(
            f"snapshot {src} has schema_version {payload['schema_version']!r}; supported: {SCHEMA_VERSION}"
        )
    try:
        doc = SnapshotDocument.model_validate(payload)
    except ValidationError as e:
        raise SnapshotFormatError(f"snapshot {src} is malformed: {e.error_count()} validation errors") from e

    return SensorimotorModel(
        motor=doc.motor.to_map(),
        sensory=doc.sensory.to_map(),
        bridge=doc.bridge.to_bridge(),
        normalizer=doc.normalizer,
    )


def describe_snapshot(path: Union[str, Path]) -> dict:
    return describe_model(load_snapshot(path), path)


def describe_model(model: SensorimotorModel, path: Union[str, Path]) -> dict:
    """Summary of a loaded model; ``path`` is only echoed back."""

    return {
        "path": str(path),
        "schema_version": SCHEMA_VERSION,
        "motor_grid": model.motor.spec.label,
        "sensory_grid": model.sensory.spec.label,
        "connections_nonzero": int(np.count_nonzero(model.bridge.strengths)),
        "untrained_motor_nodes": int(np.count_nonzero(~model.bridge.strengths.any(axis=1))),
        "eta": model.bridge.eta,
        "beta": model.bridge.beta,
        "normalizer": model.normalizer.model_dump(),
    }
