from functools import lru_cache
from pathlib import Path

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file=".env", env_file_encoding="utf-8", env_prefix="ZOMAX_", extra="ignore"
    )

    app_name: str = "zomax"
    output_root: Path = Path.cwd() / "runs"
    log_level: str = "INFO"
    # traces include z columns only up to this dimension unless a config asks otherwise
    trace_coordinate_limit: int = 8
    diagnostic_samples: int = 16
    divergence_threshold: float = 1e12
    mvi_histogram_bins: int = 40


@lru_cache
def get_settings() -> Settings:
    return Settings()
