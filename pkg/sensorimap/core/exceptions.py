from __future__ import annotations

from typing import Optional


class SensorimapError(Exception):
    """Base exception for the package."""


class ConfigurationError(SensorimapError):
    """Raised when a configuration value or key is invalid."""


class InputError(SensorimapError):
    """Raised for malformed inputs: wrong dimension, empty data, non-finite values."""


class ParameterError(SensorimapError):
    """Raised when a numeric parameter is outside its domain."""


class BoundsError(SensorimapError, IndexError):
    """Raised when a node index falls outside the lattice."""


class StateError(SensorimapError):
    """Raised when an operation runs before its prerequisites."""


class UntrainedLinkError(SensorimapError):
    """Raised when a query reaches a node whose connections are all zero."""

    def __init__(self, node: int, side: str):
        super().__init__(f"untrained link: {side} node {node} has no connections")
        self.node = node
        self.side = side


class SnapshotError(SensorimapError):
    """Raised when a snapshot cannot be read or written."""


class UnsupportedVersionError(SnapshotError):
    """Raised for snapshots written with an unknown schema version."""


class SnapshotFormatError(SnapshotError):
    """Raised when a snapshot is not valid JSON or misses required fields."""

    def __init__(self, message: str, offset: Optional[int] = None):
        if offset is not None:
            message = f"{message} (at byte {offset})"
        super().__init__(message)
        self.offset = offset


class ExportError(SensorimapError, OSError):
    """Raised when an artifact cannot be written."""


class StageError(SensorimapError):
    """Raised when a scenario stage fails; wraps the original error."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage={stage} failed: {cause}")
        self.stage = stage
        self.cause = cause
