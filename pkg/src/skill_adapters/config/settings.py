import logging
from pathlib import Path

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

_LOG_LEVELS = {"CRITICAL", "ERROR", "WARNING", "INFO", "DEBUG"}


class LabSettings(BaseSettings):
    model_config = SettingsConfigDict(
        env_prefix="",
        case_sensitive=False,
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    output_dir: Path = Field(Path("runs"), alias="SKILL_ADAPTERS_OUTPUT_DIR")
    config_path: Path | None = Field(None, alias="SKILL_ADAPTERS_CONFIG")
    log_level: str = Field("INFO", alias="SKILL_ADAPTERS_LOG_LEVEL")
    debug_numerics: bool = Field(False, alias="SKILL_ADAPTERS_DEBUG_NUMERICS")
    workers: int = Field(1, alias="SKILL_ADAPTERS_WORKERS")

    @field_validator("log_level", mode="before")
    @classmethod
    def normalize_log_level(cls, value: str | None) -> str:
        if not value:
            return "INFO"
        return str(value).strip().upper()

    @property
    def log_level_number(self) -> int:
        return logging.getLevelName(self.log_level)


def validate_settings(settings: LabSettings) -> None:
    errors: list[str] = []
    if settings.log_level not in _LOG_LEVELS:
        errors.append(
            f"SKILL_ADAPTERS_LOG_LEVEL must be one of {sorted(_LOG_LEVELS)}, "
            f"got {settings.log_level}."
        )
    if settings.workers < 1:
        errors.append(
            f"SKILL_ADAPTERS_WORKERS must be at least 1, got {settings.workers}."
        )
    if settings.config_path is not None and not settings.config_path.is_file():
        errors.append(
            f"SKILL_ADAPTERS_CONFIG points to a missing file: {settings.config_path}"
        )
    if errors:
        raise ValueError("Errors found in configuration:\n\n" + "\n".join(errors))
