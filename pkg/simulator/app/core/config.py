from typing import ClassVar

from pydantic import field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    # Project
    PROJECT_NAME: ClassVar[str] = "Lossy Loop Simulator"
    VERSION: ClassVar[str] = "1.0.0"
    DESCRIPTION: ClassVar[str] = "Feedback control over lossy wireless sensor/actuator links"

    # Logging. The only values read from the environment; they never change a number.
    LOG_LEVEL: str = "INFO"
    LOG_FORMAT: str = "%(asctime)s %(levelname)s %(name)s: %(message)s"

    # Output
    CSV_FLOAT_FORMAT: ClassVar[str] = "%.6g"

    # Reproducibility
    DEFAULT_SEED: ClassVar[int] = 20100

    # Region search window for channel.classify_regions, meters
    REGION_SEARCH_MIN_M: ClassVar[float] = 0.1
    REGION_SEARCH_MAX_M: ClassVar[float] = 1000.0

    @field_validator("LOG_LEVEL", mode="before")
    def normalize_log_level(cls, v):
        if isinstance(v, str):
            return v.strip().upper()
        return v

    model_config = SettingsConfigDict(env_prefix="LOSSYLOOP_", extra="ignore")


settings = Settings()
