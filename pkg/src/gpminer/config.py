"""
gpminer Configuration Module

Centralized configuration management using pydantic-settings.
"""

from typing import Optional
from functools import lru_cache

try:
    from pydantic_settings import BaseSettings
except ImportError:
    from pydantic import BaseSettings


class Settings(BaseSettings):
    """Mining settings loaded from environment variables (prefix GPMINER_)."""

    # Application Info
    app_name: str = "gpminer"
    app_version: str = "0.1.0"
    debug: bool = False  # validate every embedding level after it is built
    log_level: str = "WARNING"

    # Parallel Execution
    num_workers: int = 1
    parallel_threshold: int = 2048  # smaller levels run in-process
    prefix_sum_serial_threshold: int = 4096

    # Edge Blocking
    chunk_size: int = 1024

    # Pattern Limits
    max_pattern_vertices: int = 8
    max_clique_size: int = 9

    # Default output (None means standard output)
    output_path: Optional[str] = None

    class Config:
        env_prefix = "GPMINER_"
        env_file = ".env"
        env_file_encoding = "utf-8"
        case_sensitive = False
        extra = "ignore"


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()


# Default settings instance
settings = get_settings()
