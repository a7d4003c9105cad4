from pydantic import AliasChoices, Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        case_sensitive=False,
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
        populate_by_name=True,
    )

    endpoint: str = Field(default="http://localhost:8008/v1", validation_alias=AliasChoices("STRAT_ENDPOINT", "endpoint"))
    model: str = Field(default="qwen3-4b", validation_alias=AliasChoices("STRAT_MODEL", "model"))
    api_key: str = Field(default="dummy", validation_alias=AliasChoices("STRAT_API_KEY", "api_key"))
    request_timeout_sec: float = 60.0
    max_retries: int = 3
    retry_backoff_base_sec: float = 0.1
    retry_backoff_cap_sec: float = 10.0
    max_in_flight: int = 16

    judge_cache_enabled: bool = False
    cache_host: str = "cachedb"
    cache_port: int = 6379
    cache_db: int = 1
    cache_ttl_in_seconds: int = 24 * 3600
    cache_prefix: str = "tw"

    run_root: str = "runs"

    listen_addr: str = "0.0.0.0"
    listen_port: int = 8008

    enable_metrics: bool = False
    metrics_port: int = 9108
    enable_tracing: bool = False

    log_level: str = "INFO"


settings = Settings()
