import json
import os
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError, field_validator

from errors import ConfigError

# Load environment variables from .env file
load_dotenv()


def _floats(raw: str) -> List[float]:
    return [float(part) for part in raw.split(",") if part.strip()]


def _ints(raw: str) -> List[int]:
    return [int(part) for part in raw.split(",") if part.strip()]


class Config:
    """Configuration class for ConeCalc"""

    # Default config file, overridden by CLI flags
    CONECALC_CONFIG = os.getenv("CONECALC_CONFIG", "")

    # Scale parameter (mass units)
    DEFAULT_M = float(os.getenv("CONECALC_M", "1.0"))

    # Tolerances
    CONE_TOL = float(os.getenv("CONECALC_CONE_TOL", "1e-12"))
    DEGENERATE_EPS = float(os.getenv("CONECALC_DEGENERATE_EPS", "1e-14"))
    IDENTITY_TOL = float(os.getenv("CONECALC_IDENTITY_TOL", "1e-10"))
    FFT_TOL = float(os.getenv("CONECALC_FFT_TOL", "1e-8"))
    FD_TOL = float(os.getenv("CONECALC_FD_TOL", "1e-6"))
    CONSTRAINT_TOL = float(os.getenv("CONECALC_CONSTRAINT_TOL", "1e-10"))

    # iε width in units of M^2
    POLE_EPSILON = float(os.getenv("CONECALC_POLE_EPSILON", "1e-6"))

    # Lattice
    LATTICE_DIMS = _ints(os.getenv("CONECALC_LATTICE", "16,16,16,16"))
    LATTICE_SPACING = _floats(os.getenv("CONECALC_SPACING", "0.25,0.25,0.25,0.25"))

    # Fifth-coordinate samples for the coupled-condition check
    X5_SAMPLES = _floats(os.getenv("CONECALC_X5_SAMPLES", "0,0.5,1,1.5,2,2.5,3,3.5"))

    SEED = int(os.getenv("CONECALC_SEED", "1234"))
    LOG_LEVEL = os.getenv("CONECALC_LOG_LEVEL", "INFO")

    @classmethod
    def get_run_defaults(cls) -> Dict[str, Any]:
        """Get RunConfig defaults from the environment"""
        return {
            "dims": list(cls.LATTICE_DIMS),
            "spacing": list(cls.LATTICE_SPACING),
            "M": cls.DEFAULT_M,
            "identity_tol": cls.IDENTITY_TOL,
            "fft_tol": cls.FFT_TOL,
            "epsilon": cls.POLE_EPSILON,
            "x5_samples": list(cls.X5_SAMPLES),
            "seed": cls.SEED,
            "output_format": "json",
        }


class RunConfig(BaseModel):
    """Validated run configuration shared by all CLI subcommands"""

    dims: List[int] = Field(default_factory=lambda: list(Config.LATTICE_DIMS))
    spacing: List[float] = Field(default_factory=lambda: list(Config.LATTICE_SPACING))
    M: float = Config.DEFAULT_M
    identity_tol: float = Config.IDENTITY_TOL
    fft_tol: float = Config.FFT_TOL
    epsilon: float = Config.POLE_EPSILON
    x5_samples: List[float] = Field(default_factory=lambda: list(Config.X5_SAMPLES))
    seed: int = Config.SEED
    output_format: Literal["json", "csv"] = "json"

    @field_validator("dims")
    @classmethod
    def _check_dims(cls, value: List[int]) -> List[int]:
        if len(value) != 4:
            raise ValueError(f"dims needs 4 entries, got {len(value)}")
        for n in value:
            if n < 2 or n % 2:
                raise ValueError(f"lattice sizes must be even and >= 2, got {n}")
        return value

    @field_validator("spacing")
    @classmethod
    def _check_spacing(cls, value: List[float]) -> List[float]:
        if len(value) != 4:
            raise ValueError(f"spacing needs 4 entries, got {len(value)}")
        if any(d <= 0 for d in value):
            raise ValueError("spacing must be positive")
        return value

    @field_validator("M", "identity_tol", "fft_tol", "epsilon")
    @classmethod
    def _check_positive(cls, value: float) -> float:
        if not value > 0:
            raise ValueError(f"must be > 0, got {value}")
        return value

    @classmethod
    def load(cls, path: Optional[str] = None, **overrides: Any) -> "RunConfig":
        """
        Build a RunConfig from a JSON file, then apply non-None overrides

        Args:
            path: JSON config file; falls back to CONECALC_CONFIG, then defaults
            overrides: values from command-line flags

        Returns:
            validated RunConfig
        """
        data: Dict[str, Any] = Config.get_run_defaults()
        source = path or Config.CONECALC_CONFIG
        if source:
            try:
                data.update(json.loads(Path(source).read_text()))
            except (OSError, json.JSONDecodeError) as e:
                raise ConfigError(f"cannot read config '{source}': {e}") from e
        data.update({k: v for k, v in overrides.items() if v is not None})
        try:
            return cls(**data)
        except ValidationError as e:
            raise ConfigError(str(e)) from e

    @classmethod
    def from_env(cls) -> "RunConfig":
        """RunConfig from CONECALC_CONFIG when set, else the Config defaults"""
        return cls.load(None)
