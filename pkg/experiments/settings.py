from functools import lru_cache
from pathlib import Path
from typing import Literal

import yaml
from pydantic import BaseModel, ConfigDict, Field

from utils.errors import ConfigurationError

ROOT = Path(__file__).parent.parent
PROFILE_YAML = ROOT / "config" / "profiles.yaml"
PRESETS_DIR = ROOT / "config" / "experiments"


class CapDefaults(BaseModel):
    model_config = ConfigDict(extra="forbid")

    direct_solve: int = Field(default=400_000, gt=0)
    oracle_acms: int = Field(default=2_000, gt=0)
    oracle_fem: int = Field(default=50_000, gt=0)


class SolverDefaults(BaseModel):
    model_config = ConfigDict(extra="forbid")

    acms: Literal["banded", "splu"] = "banded"
    reference: Literal["banded", "splu"] = "banded"


class Settings(BaseModel):
    """Package-wide defaults from config/profiles.yaml"""

    model_config = ConfigDict(extra="forbid")

    caps: CapDefaults = CapDefaults()
    solver: SolverDefaults = SolverDefaults()
    raster_size: int = Field(default=256, ge=2)
    timing_repetitions: int = Field(default=3, ge=1)
    gamma_half_width: float = Field(default=3.0, gt=0.0)


@lru_cache(maxsize=None)
def load_settings(path: Path = PROFILE_YAML) -> Settings:
    if not path.exists():
        return Settings()
    try:
        profile = yaml.safe_load(path.read_text()) or {}
        return Settings.model_validate(profile.get("defaults", {}))
    except (yaml.YAMLError, ValueError) as e:
        raise ConfigurationError(f"invalid profile {path}: {e}") from e
