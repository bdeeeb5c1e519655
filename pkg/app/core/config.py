import os
from typing import List, Optional

from pydantic import AliasChoices, Field, field_validator
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    designs_dir: Optional[str] = Field(
        None,
        validation_alias=AliasChoices("HYPERAPPROX_DESIGNS", "designs_dir"),
    )

    output_folder: str = "./results"
    reports_folder: str = "./results/reports"

    jobs: int = Field(
        default_factory=lambda: os.cpu_count() or 1,
        validation_alias=AliasChoices("HYPERAPPROX_JOBS", "jobs"),
    )

    # Moments and oracle
    moment_tolerance: float = 1e-13
    oracle_max_evaluations: int = 1_000_000

    # Reference quadrature for error norms
    reference_points: int = 2000
    reference_panels: int = 40
    grading_ratio: float = 0.15
    grading_levels: int = 40

    # Stability audit
    sup_norm_samples: int = 100_000
    bound_slack: float = 1e-9

    log_level: str = Field(
        "INFO",
        validation_alias=AliasChoices("HYPERAPPROX_LOG_LEVEL", "log_level"),
    )

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, value: str) -> str:
        level = value.upper()
        if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"unknown log level '{value}'")
        return level

    model_config = {
        "env_file": ".env",
        "env_file_encoding": "utf-8",
        "extra": "ignore"
    }


def get_settings() -> Settings:
    return Settings()


SUPPORTED_KERNELS: List[str] = [
    "osc",
    "alg-left",
    "alg-right",
    "cheb-weight",
    "harmonic",
    "sph-alg",
    "sph-log",
    "sph-double",
    "unit",
]
