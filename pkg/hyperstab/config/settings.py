"""Application settings using pydantic-settings."""

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class AppSettings(BaseSettings):
    """Runtime configuration loaded from HYPERSTAB_* environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="HYPERSTAB_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    log_level: str = Field(default="INFO")
    output_dir: str = Field(default="runs")
    max_workers: int = Field(default=4, ge=1)


def get_settings() -> AppSettings:
    """Get settings instance."""
    return AppSettings()
