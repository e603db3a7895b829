from __future__ import annotations

from functools import lru_cache
from pathlib import Path

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Runtime configuration for siegel-lab.

    Environment variables:
    - SIEGEL_LAB_WINDOW_SIZE: maximum number of entries in one sieved window
    - SIEGEL_LAB_THREADS: default worker count for windowed correlations
    - SIEGEL_LAB_QUAD_TOL: default absolute tolerance for t-integrals
    - SIEGEL_LAB_MAX_SIEVE_SUPPORT: bound on R^2 when materializing Selberg weights
    - SIEGEL_LAB_MAX_TYPE_I_CUTOFF: bound on D when generating Type I coefficients
    - SIEGEL_LAB_BASE_PRIME_CACHE: largest base prime kept in the shared sieving table
    - SIEGEL_LAB_CACHE_DIR: optional directory enabling the binary window cache
    - SIEGEL_LAB_OUTPUT_DIR: directory for reports written without an explicit path
    - SIEGEL_LAB_LOG_LEVEL: root log level used by the CLI
    """

    SIEGEL_LAB_WINDOW_SIZE: int = Field(
        2**24, ge=1, le=2**27, description="Maximum entries per sieved window"
    )
    SIEGEL_LAB_THREADS: int = Field(1, ge=1, le=256, description="Default worker threads")
    SIEGEL_LAB_QUAD_TOL: float = Field(
        1e-9, gt=0.0, le=1e-2, description="Default absolute quadrature tolerance"
    )
    SIEGEL_LAB_MAX_SIEVE_SUPPORT: int = Field(
        10**7, ge=4, description="Largest R^2 accepted by nu_weights"
    )
    SIEGEL_LAB_MAX_TYPE_I_CUTOFF: int = Field(
        10**6, ge=2, description="Largest D accepted by lambda_sharp_coeffs"
    )
    SIEGEL_LAB_BASE_PRIME_CACHE: int = Field(
        2**26, ge=2**10, le=2**32, description="Base primes above this are sieved per segment"
    )
    SIEGEL_LAB_CACHE_DIR: Path | None = None
    SIEGEL_LAB_OUTPUT_DIR: str = Field("siegel_reports", min_length=1)
    SIEGEL_LAB_LOG_LEVEL: str = Field(
        "INFO",
        pattern=r"^(?i:debug|info|warning|error|critical)$",
        description="Logging level name",
    )

    model_config = SettingsConfigDict(
        case_sensitive=False,
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    return Settings()
