"""Configuration management using Pydantic settings."""
import os
from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Run settings loaded from CORNER_WAVES_* environment variables or .env."""

    model_config = SettingsConfigDict(
        env_prefix="CORNER_WAVES_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore"
    )

    # Output
    out: str = Field(default="corner_waves_out", description="Default output directory")
    verbose: bool = Field(default=False, description="Echo events to stderr")

    # Parallelism
    threads: int = Field(default_factory=lambda: os.cpu_count() or 1, ge=1, description="Worker threads")

    # Linear algebra
    solver_tol: float = Field(default=1e-10, gt=0, description="Relative residual for iterative solves")
    solver_maxiter: int = Field(default=20000, ge=1, description="Iteration cap for iterative solves")
    linear_solver: Literal["cg", "direct"] = Field(default="cg", description="Backend for solve_mixed")
    schur_mode: Literal["dense", "matrix-free"] = Field(default="dense", description="DtN operator storage")
    dense_limit: int = Field(default=4000, ge=1, description="Max trace nodes for a dense Schur complement")

    # Traces and meshing
    screen_radius: float = Field(default=1.0, gt=0, description="Screening radius for truncated components")
    min_angle: float = Field(default=20.0, gt=0, lt=35, description="Mesh quality threshold in degrees")

    # Run ledger
    enable_database: bool = Field(default=False, description="Record runs and events in SQLite")
    db_file: str = Field(default="corner_waves.db", description="SQLite ledger path")

    def __repr__(self) -> str:
        return (
            f"Settings("
            f"out='{self.out}', "
            f"threads={self.threads}, "
            f"linear_solver='{self.linear_solver}', "
            f"schur_mode='{self.schur_mode}'"
            f")"
        )


# Singleton instance
_settings: Settings | None = None


def get_settings() -> Settings:
    """Get or create the singleton settings instance."""
    global _settings
    if _settings is None:
        _settings = Settings()
    return _settings


def override_settings(**overrides) -> Settings:
    """Replace the singleton with a copy carrying the given field overrides.

    None values are skipped so CLI flags that were not given keep the
    environment value.
    """
    global _settings
    current = get_settings()
    updates = {k: v for k, v in overrides.items() if v is not None}
    _settings = Settings.model_validate({**current.model_dump(), **updates})
    return _settings


def reset_settings() -> None:
    """Drop the singleton so the next get_settings() re-reads the environment."""
    global _settings
    _settings = None
