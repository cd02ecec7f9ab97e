"""Environment-driven defaults for runs of the harness."""
import logging
import os
import sys
from dataclasses import dataclass
from typing import Literal, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field

from .errors import ArgumentError

logger = logging.getLogger(__name__)

DEFAULT_SEED = 20240917
DEFAULT_PROBES = 50
DEFAULT_GRID_N = 64
DEFAULT_EXTRACT_GRID_N = 21
DEFAULT_VALIDATION_N = 100
DEFAULT_TOLERANCE = 1e-9
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


@dataclass(frozen=True)
class Settings:
    """Defaults resolved from the environment (and a .env file if present)."""
    seed: int = DEFAULT_SEED
    probes: int = DEFAULT_PROBES
    grid_n: int = DEFAULT_GRID_N
    extract_grid_n: int = DEFAULT_EXTRACT_GRID_N
    validation_n: int = DEFAULT_VALIDATION_N
    tolerance: float = DEFAULT_TOLERANCE
    log_level: str = "INFO"
    log_file: Optional[str] = None


def _env(name: str, cast, default):
    raw = os.getenv(name)
    if raw is None or raw == "":
        return default
    try:
        return cast(raw)
    except ValueError as e:
        raise ArgumentError(f"Invalid value for {name}: {raw!r}") from e


def load_settings(dotenv: bool = True) -> Settings:
    """Load Settings from the environment.

    Args:
        dotenv: Whether to read a .env file first

    Returns:
        Settings with every unset variable at its default
    """
    if dotenv:
        load_dotenv()

    settings = Settings(
        seed=_env("FCAF_SEED", int, DEFAULT_SEED),
        probes=_env("FCAF_PROBES", int, DEFAULT_PROBES),
        grid_n=_env("FCAF_GRID_N", int, DEFAULT_GRID_N),
        extract_grid_n=_env("FCAF_EXTRACT_GRID_N", int, DEFAULT_EXTRACT_GRID_N),
        validation_n=_env("FCAF_VALIDATION_N", int, DEFAULT_VALIDATION_N),
        tolerance=_env("FCAF_TOL", float, DEFAULT_TOLERANCE),
        log_level=_env("FCAF_LOG_LEVEL", str, "INFO").upper(),
        log_file=_env("FCAF_LOG_FILE", str, None),
    )
    logger.debug(f"Settings loaded: {settings}")
    return settings


def configure_logging(settings: Settings):
    """Log to stderr (stdout carries reports) and optionally to FCAF_LOG_FILE."""
    handlers: list[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if settings.log_file:
        handlers.append(logging.FileHandler(settings.log_file))
    logging.basicConfig(level=settings.log_level, format=LOG_FORMAT, handlers=handlers, force=True)


class RunConfig(BaseModel):
    """One CLI invocation, flags resolved over Settings defaults."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    command: Literal["example1", "axioms", "extract", "counterexamples", "aggregate"]
    aggregator_path: Optional[str] = None
    profile_path: Optional[str] = None
    measure_path: Optional[str] = None
    seed: int = DEFAULT_SEED
    probes: int = Field(default=DEFAULT_PROBES, ge=1)
    grid_n: int = Field(default=DEFAULT_GRID_N, ge=2)
    validation_n: int = Field(default=DEFAULT_VALIDATION_N, ge=0)
    tolerance: float = Field(default=DEFAULT_TOLERANCE, gt=0.0)
    output: Literal["json", "csv"] = "json"
    out_path: Optional[str] = None
    mode: Literal["measure", "h"] = "measure"
