from __future__ import annotations

from functools import lru_cache
from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Runtime configuration.

    All settings can be overridden via environment variables or a local .env file.
    Experiment parameters live in ExperimentConfig files instead.
    """

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    app_env: Literal["dev", "prod", "test"] = Field(default="dev", alias="APP_ENV")
    log_level: str = Field(default="INFO", alias="LOG_LEVEL")
    output_dir: str = Field(default="runs", alias="OUTPUT_DIR")

    # Query service
    snapshot_path: str = Field(default="runs/snapshot.json", alias="SNAPSHOT_PATH")
    snapshot_cache_size: int = Field(default=4, alias="SNAPSHOT_CACHE_SIZE")
    query_mode: Literal["argmax", "interpolate"] = Field(default="argmax", alias="QUERY_MODE")
    query_radius: float = Field(default=1.0, alias="QUERY_RADIUS")


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    return Settings()
