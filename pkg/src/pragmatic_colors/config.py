"""Configuration for pragmatic-colors.

Settings resolve with the precedence CLI flags > config file > environment
(``PRAGCOLOR_*`` or ``.env``) > defaults. Config files are flat
``key=value`` text in dotenv syntax.
"""

from pathlib import Path
from typing import Any, Dict, Literal, Mapping, Optional, Tuple

from dotenv import dotenv_values
from pydantic import Field, ValidationError, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from pragmatic_colors.domain.exceptions import ConfigurationError


class Settings(BaseSettings):
    """Application settings with validation."""

    model_config = SettingsConfigDict(
        env_prefix="PRAGCOLOR_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # Logging
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "INFO"
    log_format: Literal["console", "json"] = "console"

    # Network shape
    embedding_dim: int = Field(default=300, ge=1)
    hidden_size: int = Field(default=30, ge=1)
    activation: Literal["identity", "relu"] = "identity"

    # Training
    epochs: int = Field(default=500, ge=1)
    learning_rate: float = Field(default=1e-3, gt=0)
    optimizer: Literal["adam", "sgd"] = "adam"
    batch_size: int = Field(default=0, ge=0)  # 0 = full batch
    loss_weight_cosine: float = Field(default=1.0, ge=0)
    loss_weight_mse: float = Field(default=1.0, ge=0)
    samples_per_triple: int = Field(default=10, ge=1)

    # Pragmatic inference
    n_candidates: int = Field(default=10, ge=1)
    k_draws: int = Field(default=100, ge=1)
    pragmatic_lambda: float = Field(default=0.33, ge=0, le=1)
    metric: Literal["delta_e_2000_lab", "cosine_rgb"] = "delta_e_2000_lab"
    temperature: float = Field(default=1.0, gt=0)
    lambda_grid_step: float = Field(default=0.01, gt=0, le=1)
    grid_objective: Literal["cosine", "delta_e"] = "cosine"

    # Data
    train_fraction: float = Field(default=0.6, gt=0, lt=1)
    validation_fraction: float = Field(default=0.2, gt=0, lt=1)
    test_fraction: float = Field(default=0.2, gt=0, lt=1)
    partition_seed: int = Field(default=0, ge=0)
    validation_size: int = Field(default=100, ge=1)
    strict_validation: bool = False
    oov_policy: Literal["zero", "error"] = "zero"

    # Execution
    workers: int = Field(default=1, ge=1, le=64)

    @model_validator(mode="after")
    def check_weights_and_fractions(self) -> "Settings":
        """Reject all-zero loss weights and fractions that do not sum to 1."""
        if self.loss_weight_cosine + self.loss_weight_mse <= 0:
            raise ValueError("loss weights must not both be zero")
        total = self.train_fraction + self.validation_fraction + self.test_fraction
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"partition fractions must sum to 1, got {total}")
        return self

    @property
    def fractions(self) -> Tuple[float, float, float]:
        """Train, validation and test fractions in that order."""
        return (self.train_fraction, self.validation_fraction, self.test_fraction)

    def lambda_grid(self) -> Tuple[float, ...]:
        """Evenly spaced lambda values from 0 to 1 inclusive."""
        steps = int(round(1.0 / self.lambda_grid_step))
        return tuple(round(i / steps, 10) for i in range(steps + 1))


def read_config_file(path: Path) -> Dict[str, str]:
    """Read a flat key=value config file.

    Args:
        path: Config file path

    Returns:
        Lower-cased keys mapped to raw string values

    Raises:
        ConfigurationError: If the file is missing or names unknown keys
    """
    if not path.is_file():
        raise ConfigurationError(f"Config file not found: {path}")
    raw = dotenv_values(path)
    values = {k.strip().lower(): v for k, v in raw.items() if v is not None}
    unknown = sorted(set(values) - set(Settings.model_fields))
    if unknown:
        raise ConfigurationError(f"Unknown config keys in {path}: {', '.join(unknown)}")
    return values


def load_settings(
    config_file: Optional[Path] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> Settings:
    """Build settings from defaults, environment, a config file and flags.

    Args:
        config_file: Optional flat key=value file
        overrides: Values from CLI flags; None entries are ignored

    Returns:
        Validated settings

    Raises:
        ConfigurationError: If any value fails validation
    """
    values: Dict[str, Any] = {}
    if config_file is not None:
        values.update(read_config_file(config_file))
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return Settings(**values)
    except ValidationError as e:
        raise ConfigurationError(str(e)) from e

