import json
import logging
import math
import os
from functools import lru_cache
from importlib import resources
from typing import Dict, Literal, Optional

from dotenv import dotenv_values, load_dotenv
from pydantic import BaseModel, ConfigDict, Field

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

# Cs ground-state hyperfine splitting, exact by the SI definition of the second.
CS_CLOCK_OMEGA_10 = 2 * math.pi * 9_192_631_770.0

DEFAULT_EXCLUSION_RADIUS = 2e-6

logger = logging.getLogger(__name__)


def configure_logging(level=None):
    load_dotenv()
    level = level or os.getenv("CIRCGATE_LOG_LEVEL", "INFO")
    logging.basicConfig(level=level.upper(), format=LOG_FORMAT)


def max_workers():
    load_dotenv()
    return int(os.getenv("CIRCGATE_MAX_WORKERS", "4"))


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", ser_json_inf_nan="strings")

    species: str = Field(default="133Cs", description="Species tag, informational only")
    n: int = Field(..., ge=2, description="Principal quantum number of the circular state")
    temperature: float = Field(default=0.0, ge=0.0, description="Blackbody temperature (K)")
    separation: float = Field(default=2e-6, gt=0.0, description="Interatomic separation R (m)")
    omega_10: float = Field(default=CS_CLOCK_OMEGA_10, gt=0.0, description="Qubit splitting (rad/s)")
    omega: Optional[float] = Field(default=None, gt=0.0, description="Rabi frequency override (rad/s); default is the optimum")
    tau: Optional[float] = Field(default=None, gt=0.0, description="Lifetime override (s); inf switches decay off")
    blockade_B: Optional[float] = Field(default=None, gt=0.0, description="Blockade shift override (rad/s)")
    exclusion_radius: float = Field(default=DEFAULT_EXCLUSION_RADIUS, gt=0.0, description="Overlap warning threshold (m)")
    output_format: Literal["csv", "json"] = Field(default="json", description="Report format")
    output_path: Optional[str] = Field(default=None, description="Report destination; stdout when absent")
    seed: Optional[int] = Field(default=None, ge=0, description="Seed for the sampling mode")
    shots: Optional[int] = Field(default=None, gt=0, description="Shots per setting; exact probabilities when absent")


class PresetReference(BaseModel):
    """Published reference values for one gate-error column."""

    omega_mhz: float
    blockade_ghz: float
    lifetime_ms: float
    e_cb: float
    trace_loss: float
    e_o: float


class Preset(BaseModel):
    model_config = ConfigDict(extra="forbid")

    description: str
    config: Dict[str, object]
    reference: Optional[PresetReference] = None

    def run_config(self, **overrides):
        return RunConfig.model_validate({**self.config, **overrides})


@lru_cache(maxsize=1)
def load_presets():
    text = resources.files("circgate").joinpath("presets.json").read_text(encoding="utf-8")
    raw = json.loads(text)
    return {name: Preset.model_validate(body) for name, body in raw.items()}


def get_preset(name):
    presets = load_presets()
    if name not in presets:
        raise KeyError(f"Unknown preset '{name}'. Available: {', '.join(sorted(presets))}")
    return presets[name]


def load_run_config(path=None, preset=None, **overrides):
    """Build a RunConfig from a preset and/or a dotenv-style KEY=value file.

    File values override the preset; explicit keyword overrides win over both.
    """
    data = {}
    if preset:
        data.update(get_preset(preset).config)
    if path:
        file_values = {key.lower(): value for key, value in dotenv_values(path).items()}
        logger.debug(f"Loaded {len(file_values)} keys from {path}")
        data.update(file_values)
    data.update({key: value for key, value in overrides.items() if value is not None})
    return RunConfig.model_validate(data)
