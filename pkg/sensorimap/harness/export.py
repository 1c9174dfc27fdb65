from __future__ import annotations

from pathlib import Path
from typing import Iterable, Literal, Tuple, Union

import numpy as np
import pandas as pd

from sensorimap.core.exceptions import ExportError
from sensorimap.harness.evaluation import ErrorReport, NodeErrorGrid
from sensorimap.maps.models import TrainingTrace

PathLike = Union[str, Path]


def _write(frame: pd.DataFrame, path: PathLike, header: bool) -> Path:
    out = Path(path)
    try:
        frame.to_csv(out, index=False, header=header, na_rep="", float_format="%.17g", lineterminator="\n")
    except OSError as e:
        raise ExportError(f"cannot write {out}: {e}") from e
    return out


def write_grid_csv(grid: NodeErrorGrid, path: PathLike) -> Path:
    """rows x cols of per-node values in row-major order; unvisited nodes are empty cells."""

    return _write(pd.DataFrame(grid.as_array()), path, header=False)


def export_heatmap(report: ErrorReport, path: PathLike, side: Literal["motor", "sensory"] = "motor") -> Path:
    return write_grid_csv(report.motor_grid if side == "motor" else report.sensory_grid, path)


def read_grid_csv(path: PathLike) -> np.ndarray:
    return pd.read_csv(path, header=None, float_precision="round_trip").to_numpy(dtype=np.float64)


def export_trace(trace: TrainingTrace, path: PathLike) -> Path:
    frame = pd.DataFrame(
        [(cp.iteration, cp.distortion, cp.quantization_error, cp.sigma, cp.alpha) for cp in trace.checkpoints],
        columns=["iteration", "zeta", "quantization_error", "sigma", "alpha"],
    )
    return _write(frame, path, header=True)


def export_distortion_series(series: Iterable[Tuple[int, str, float]], path: PathLike) -> Path:
    """Monitoring trace: samples seen so far, phase label, windowed distortion."""

    frame = pd.DataFrame(list(series), columns=["sample", "phase", "zeta"])
    return _write(frame, path, header=True)


def export_report(report: ErrorReport, path: PathLike) -> Path:
    out = Path(path)
    try:
        out.write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
    except OSError as e:
        raise ExportError(f"cannot write {out}: {e}") from e
    return out


def load_report(path: PathLike) -> ErrorReport:
    return ErrorReport.model_validate_json(Path(path).read_text(encoding="utf-8"))
