from __future__ import annotations

import threading
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, Optional, Sequence

from cachetools import LRUCache, cached
from cachetools.keys import hashkey

from sensorimap.core.config import Settings, get_settings
from sensorimap.core.exceptions import SnapshotError
from sensorimap.core.logging import get_logger
from sensorimap.harness.snapshot import describe_model, load_snapshot
from sensorimap.learning.bridge import QueryMode
from sensorimap.learning.model import SensorimotorModel


logger = get_logger(__name__)


class SensorimapService:
    """Answers forward/inverse queries against the snapshot named in the settings.

    Loaded snapshots are cached by (path, modification time), so replacing the
    file on disk is picked up by the next request.
    """

    def __init__(self, settings: Settings):
        self.settings = settings
        self._load = cached(
            cache=LRUCache(maxsize=max(1, settings.snapshot_cache_size)),
            key=lambda path, mtime_ns: hashkey(path, mtime_ns),
            lock=threading.Lock(),
        )(self._read)

    @staticmethod
    def _read(path: str, mtime_ns: int) -> SensorimotorModel:
        logger.info("loading snapshot path=%s mtime_ns=%d", path, mtime_ns)
        return load_snapshot(path)

    def model(self) -> SensorimotorModel:
        path = Path(self.settings.snapshot_path)
        if not path.is_file():
            raise SnapshotError(f"snapshot not found: {path}")
        return self._load(str(path.resolve()), path.stat().st_mtime_ns)

    def _query_args(self, mode: Optional[QueryMode], sigma_q: Optional[float]) -> Dict[str, Any]:
        return {
            "mode": mode or self.settings.query_mode,
            "sigma_q": self.settings.query_radius if sigma_q is None else sigma_q,
        }

    def forward(
        self,
        joints: Sequence[float],
        mode: Optional[QueryMode] = None,
        sigma_q: Optional[float] = None,
    ) -> Dict[str, Any]:
        args = self._query_args(mode, sigma_q)
        position = self.model().forward(joints, **args)
        return {"joints_rad": list(joints), "position_mm": position.tolist(), **args}

    def inverse(
        self,
        position: Sequence[float],
        mode: Optional[QueryMode] = None,
        sigma_q: Optional[float] = None,
    ) -> Dict[str, Any]:
        args = self._query_args(mode, sigma_q)
        joints = self.model().inverse(position, **args)
        return {"position_mm": list(position), "joints_rad": joints.tolist(), **args}

    def describe(self) -> Dict[str, Any]:
        return describe_model(self.model(), self.settings.snapshot_path)


@lru_cache(maxsize=1)
def get_service() -> SensorimapService:
    return SensorimapService(get_settings())
