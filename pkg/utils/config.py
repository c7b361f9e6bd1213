import math
import sys
from typing import Literal, Optional
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict
from dotenv import load_dotenv

# Load .env file if it exists
load_dotenv()

class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_prefix="CURVFLOW_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Environment
    environment: str = Field(default="development")
    debug: bool = Field(default=False)

    # Logging Configuration
    log_level: str = Field(default="INFO")
    log_format: str = Field(default="%(asctime)s - %(name)s - %(levelname)s - %(message)s")
    log_file: Optional[str] = Field(default=None)

    # Solver Configuration
    solver_rel_tol: float = Field(default=1e-9, gt=0)
    solver_abs_tol: float = Field(default=1e-12, gt=0)
    solver_max_step: float = Field(default=0.1, gt=0)
    solver_min_step: float = Field(default=1e-12, gt=0)
    blowup_threshold: float = Field(default=1e8, gt=0)
    solver_method: Literal["DOP853", "RK45"] = Field(default="DOP853")

    # Curvature Configuration
    psd_tolerance: float = Field(default=1e-11, gt=0)
    curvature_tolerance: float = Field(default=1e-10, gt=0)
    kernel_tolerance: float = Field(default=1e-12, gt=0)
    reversibility_rtol: float = Field(default=1e-12, gt=0)

    # Verdict Configuration
    verdict_tolerance: float = Field(default=1e-7, gt=0)
    grid_points: int = Field(default=40, ge=2)
    grid_t_min: float = Field(default=1e-3, gt=0)
    grid_t_max: float = Field(default=10.0, gt=0)
    refinement_rounds: int = Field(default=3, ge=0)
    harnack_times: int = Field(default=10, ge=2)
    alpha_hi: float = Field(default=1.60)
    alpha_lo: float = Field(default=0.76)
    l1_alpha_hi: float = Field(default=math.log(3.0))
    l1_alpha_lo: float = Field(default=1.0)

    # Worker Configuration
    max_workers: int = Field(default=4, ge=1)
    parallel_threshold: int = Field(default=64, ge=1)

    # Randomized commands
    default_seed: int = Field(default=0)

# Create settings instance
try:
    settings = Settings()
except Exception as e:
    print(f"Warning: Configuration loading failed: {e}", file=sys.stderr)
    print("Using default configuration values.", file=sys.stderr)
    settings = Settings.model_construct()

# Environment-specific overrides
if settings.environment == "production":
    settings.debug = False
    settings.log_level = "WARNING"
elif settings.environment == "staging":
    settings.debug = False
    settings.log_level = "INFO"
