"""Toolkit configuration using Pydantic Settings."""

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Process-level settings loaded from environment variables (prefix CHG_)."""

    # =====================================
    # LOGGING CONFIGURATION
    # =====================================
    LOG_LEVEL: str = "INFO"
    LOG_FORMAT: str = "console"

    # =====================================
    # LINEAR SOLVER CONFIGURATION
    # =====================================
    LINEAR_SOLVER_RTOL: float = 1e-10
    GMRES_RESTART: int = 50
    GMRES_MAXITER: int = 200
    PICARD_MAX_ITER: int = 10
    PICARD_TOL: float = 1e-10

    # =====================================
    # EXTENSION QUADRATURE
    # =====================================
    QUAD_TOL: float = 1e-10
    QUAD_LIMIT: int = 200

    # =====================================
    # SYMBOL SCANS
    # =====================================
    SECTOR_PHI: float = 0.55
    SECTOR_RAYS: int = 24
    SECTOR_LAMBDA_MODULI: int = 25
    SECTOR_XI_DIRECTIONS: int = 16
    SECTOR_XI_MODULI: int = 25
    MIKHLIN_STEP: float = 1e-4

    # =====================================
    # RUN DEFAULTS
    # =====================================
    STEADY_WINDOW: int = 50
    VALIDATOR_TOL: float = 1e-8
    SWEEP_MAX_WORKERS: int = 4
    CSV_FLOAT_DIGITS: int = 17

    model_config = SettingsConfigDict(
        env_prefix="CHG_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore",
    )


# Singleton instance
settings = Settings()
