# src/config/app_config.py
import os
from pathlib import Path
from typing import Optional

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError, field_validator

from src.utils.logging import logger
from src.validation.error_handler import ConfigurationError

PROJECT_ROOT = Path(__file__).resolve().parent.parent.parent
DEFAULT_CONFIG_PATH = PROJECT_ROOT / "config" / "app_config.yaml"
TOLERANCE_ENV = "FITZKIT_TOL"


class AppConfig(BaseModel):
    """Application Configuration Model"""
    logging_level: str = Field("INFO", description="Logging level (e.g., DEBUG, INFO, WARNING, ERROR)")
    tolerance: float = Field(1e-9, gt=0, description="Absolute tolerance for grid comparisons")
    gate_tolerance: float = Field(1e-6, gt=0, description="Tolerance of the representability gate on grids")
    seed: int = Field(20240611, description="Seed for every randomized catalog entry")
    window: float = Field(2.0, gt=0, description="Half-width of the default symmetric grid window")
    resolution: int = Field(33, ge=2, description="Default node count per axis")
    output_dir: str = Field("output", description="Directory receiving CSV and JSON artifacts")
    random_finite_sets: int = Field(50, ge=0)
    random_linear_maps: int = Field(20, ge=0)

    @field_validator("logging_level")
    @classmethod
    def _known_level(cls, value: str) -> str:
        value = value.upper()
        if value not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"unknown logging level '{value}'")
        return value


def _apply_environment(config: AppConfig) -> AppConfig:
    """Overlay FITZKIT_TOL (from the process environment or a .env file)."""
    load_dotenv(override=False)
    raw = os.environ.get(TOLERANCE_ENV)
    if raw is None or raw.strip() == "":
        return config
    try:
        tolerance = float(raw)
    except ValueError as e:
        raise ConfigurationError(f"{TOLERANCE_ENV} must be a number", raw) from e
    if not tolerance > 0:
        raise ConfigurationError(f"{TOLERANCE_ENV} must be positive", raw)
    logger.info(f"Tolerance overridden from {TOLERANCE_ENV}: {tolerance}")
    return config.model_copy(update={"tolerance": tolerance})


def load_config(config_path: Optional[Path] = None) -> AppConfig:
    """Loads application configuration from a YAML file."""
    config_path = Path(config_path or DEFAULT_CONFIG_PATH)
    try:
        if not config_path.exists():
            logger.warning(f"Configuration file not found at {config_path}. Using default configuration.")
            default_config = AppConfig()
            try:
                config_path.parent.mkdir(parents=True, exist_ok=True)
                with open(config_path, 'w', encoding='utf-8') as f:
                    yaml.safe_dump(default_config.model_dump(), f, default_flow_style=False, sort_keys=False)
                logger.info(f"Created default configuration file at {config_path}")
            except OSError as e:
                logger.error(f"Failed to create default config file at {config_path}: {e}")
            return _apply_environment(default_config)

        with open(config_path, 'r', encoding='utf-8') as f:
            config_data = yaml.safe_load(f)
        if not config_data:
            logger.warning(f"Configuration file {config_path} is empty. Using default configuration.")
            return _apply_environment(AppConfig())
        if not isinstance(config_data, dict):
            raise ConfigurationError(f"Configuration in {config_path} must be a mapping")
        return _apply_environment(AppConfig(**config_data))
    except yaml.YAMLError as e:
        logger.error(f"Error parsing YAML configuration file {config_path}: {e}")
        raise ConfigurationError(f"Invalid YAML format in {config_path}") from e
    except ValidationError as e:
        logger.error(f"Configuration validation error in {config_path}: {e}")
        error_messages = [f"Field '{err['loc'][0]}': {err['msg']}" for err in e.errors()]
        detailed_error_msg = f"Invalid configuration data in {config_path}: {'; '.join(error_messages)}"
        raise ConfigurationError(detailed_error_msg) from e

