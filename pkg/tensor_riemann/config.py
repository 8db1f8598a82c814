"""
Runtime configuration for tensor_riemann.
"""

import os
from pathlib import Path

from dotenv import load_dotenv
from pydantic import BaseModel, Field

# Load environment variables from .env file
load_dotenv()


def _env_int(name: str, default: int) -> int:
    try:
        return int(os.getenv(name, default))
    except ValueError:
        return default


class RuntimeConfig(BaseModel):
    """Execution settings."""

    jobs: int = Field(default_factory=lambda: max(1, _env_int("TENSOR_RIEMANN_JOBS", 1)))
    log_level: str = Field(
        default_factory=lambda: os.getenv("TENSOR_RIEMANN_LOG_LEVEL", "WARNING").upper()
    )


class OutputConfig(BaseModel):
    """Where generated files go by default."""

    directory: Path = Field(
        default_factory=lambda: Path(
            os.getenv("TENSOR_RIEMANN_OUTPUT_DIR", "./results")
        ).expanduser()
    )


class Config(BaseModel):
    """Main configuration."""

    runtime: RuntimeConfig = Field(default_factory=RuntimeConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)

    def get_output_dir(self) -> Path:
        """Get the output directory, creating it if it doesn't exist."""
        path = self.output.directory
        path.mkdir(parents=True, exist_ok=True)
        return path


def load_config() -> Config:
    """Load configuration from the environment."""
    return Config()


# Global config instance
config = load_config()
