from pathlib import Path
from typing import Literal

from pydantic import BaseModel
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Application configuration settings."""

    # Overrides --seed when set (RBINDEX_SEED)
    seed: int | None = None

    # Logging Configuration
    log_level: str = "WARNING"
    log_dir: Path = Path("logs")
    log_to_file: bool = False

    # Quadratic reference oracles refuse larger inputs from the CLI
    naive_limit: int = 512

    # Generator Configuration
    generation_retries: int = 100
    coordinate_bound: int = 1 << 20
    # Generated instances up to this size go through the exhaustive validator
    validate_limit: int = 2048

    class Config:
        env_prefix = "RBINDEX_"
        env_file = ".env"
        env_file_encoding = "utf-8"
        extra = "ignore"


class RunConfig(BaseModel):
    """One CLI invocation, fully resolved."""

    command: Literal["count", "report", "index", "batched", "terrain-dist", "gen", "validate"]
    inputs: list[Path] = []
    output: Path | None = None
    seed: int = 0
    reds: int = 0
    blues: int = 0
    mode: Literal["general", "grid-like", "bundle-heavy"] = "general"
    terrain: bool = False
    vertices: int = 12
    planes: int = 5
    output_format: Literal["text", "json"] = "text"
    stats: bool = False
    strict: bool = False
    dump: bool = False
    against_naive: bool = False
    target_x: str | None = None
    target_blue: list[int] | None = None
    distance: Literal["max", "min"] = "max"


# Global settings instance
settings = Settings()
