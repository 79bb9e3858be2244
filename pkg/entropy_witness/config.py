"""Run configuration models and the JSON/CLI loader.

Precedence is model defaults, then the JSON file passed with ``--config``,
then CLI flags. Every model rejects unknown fields.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .constants import (
    CANONICAL_WITNESSES,
    CASES,
    DEFAULT_CONSTRAINT_TOL,
    DEFAULT_DARK_RATE,
    DEFAULT_DURATION,
    DEFAULT_JITTER_DEG,
    DEFAULT_MAX_ITERS,
    DEFAULT_OBJECTIVE_TOL,
    DEFAULT_PAIR_RATE,
    DEFAULT_PENALTY_SCHEDULE,
    DEFAULT_STARTS,
    MODES,
)
from .exceptions import ConfigurationError
from .validators import (
    validate_case,
    validate_grid,
    validate_mode,
    validate_witness_name,
)

logger = logging.getLogger(__name__)


class OptimizationConfig(BaseModel):
    """Settings of the multistart quantum entropy minimizer."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    starts: int = Field(DEFAULT_STARTS, ge=1)
    max_iters: int = Field(DEFAULT_MAX_ITERS, ge=1)
    penalty_schedule: tuple[float, ...] = DEFAULT_PENALTY_SCHEDULE
    objective_tol: float = Field(DEFAULT_OBJECTIVE_TOL, gt=0)
    constraint_tol: float = Field(DEFAULT_CONSTRAINT_TOL, gt=0)
    seed: int = Field(0, ge=0)
    workers: int = Field(1, ge=1)
    refine: bool = True

    @field_validator("penalty_schedule")
    @classmethod
    def _validate_schedule(cls, value: tuple[float, ...]) -> tuple[float, ...]:
        if not value:
            raise ValueError("penalty_schedule must not be empty")
        if value[0] <= 0:
            raise ValueError("penalty weights must be positive")
        if any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError("penalty_schedule must be strictly increasing")
        return value


class SimConfig(BaseModel):
    """Settings of the polarization experiment simulator."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    pair_rate: float = Field(DEFAULT_PAIR_RATE, ge=0)
    duration_per_setting: float = Field(DEFAULT_DURATION, gt=0)
    angle_jitter_deg: float = Field(DEFAULT_JITTER_DEG, ge=0)
    dark_rate: float = Field(DEFAULT_DARK_RATE, ge=0)
    seed: int = Field(0, ge=0)
    exact: bool = False
    tomography: str = Field("mle", pattern=r"^(mle|linear)$")


class GridConfig(BaseModel):
    """Evenly spaced witness values ``start .. stop`` with ``points`` samples."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    start: float
    stop: float
    points: int = Field(20, ge=1)

    @model_validator(mode="after")
    def _validate_order(self) -> GridConfig:
        is_valid, message = validate_grid(self.start, self.stop, self.points)
        if not is_valid:
            raise ValueError(message)
        return self

    def values(self) -> list[float]:
        """The grid as a list; a single point is ``start``."""
        return [float(w) for w in np.linspace(self.start, self.stop, self.points)]


class RunConfig(BaseModel):
    """Resolved parameters of one CLI run."""

    model_config = ConfigDict(extra="forbid")

    witness: Union[str, dict[str, Any]] = "I3"
    witnesses: list[str] = Field(default_factory=lambda: list(CANONICAL_WITNESSES))
    W: Optional[list[float]] = None  # noqa: N815
    grid: Optional[GridConfig] = None
    kind: str = Field("both", pattern=r"^(classical|quantum|both)$")
    d_max: Optional[int] = Field(None, ge=1)
    optimization: OptimizationConfig = Field(default_factory=OptimizationConfig)
    simulation: SimConfig = Field(default_factory=SimConfig)
    out: str = "results"
    seed: int = Field(0, ge=0)
    check: bool = False
    case: str = "I3"
    mode: str = "quantum"
    which: str = Field("all", pattern=r"^(hyp1-I4|hyp1-R4|hyp2|all)$")
    trials: int = Field(20, ge=2)
    counts: Optional[str] = None

    @field_validator("witnesses")
    @classmethod
    def _validate_witnesses(cls, value: list[str]) -> list[str]:
        unknown = [name for name in value if not validate_witness_name(name)]
        if unknown:
            raise ValueError(f"unknown witnesses {unknown}")
        return [name.strip().upper() for name in value]

    @field_validator("case")
    @classmethod
    def _validate_case(cls, value: str) -> str:
        if not validate_case(value):
            raise ValueError(f"case must be one of {CASES}")
        return value.strip().upper()

    @field_validator("mode")
    @classmethod
    def _validate_mode(cls, value: str) -> str:
        if not validate_mode(value):
            raise ValueError(f"mode must be one of {MODES}")
        return value


def _merge(base: dict[str, Any], overrides: dict[str, Any]) -> dict[str, Any]:
    merged = dict(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_config(
    path: Optional[Union[str, Path]] = None,
    overrides: Optional[dict[str, Any]] = None,
) -> RunConfig:
    """Resolve a run configuration from defaults, a JSON file and overrides.

    Parameters
    ----------
    path : str | Path, optional
        JSON document with any subset of the :class:`RunConfig` fields
    overrides : dict[str, Any], optional
        Values from CLI flags; ``None`` values are ignored. A ``seed`` here
        is also copied into the optimization and simulation settings.

    Returns
    -------
    RunConfig
        The validated configuration

    Raises
    ------
    ConfigurationError
        If the file cannot be read or any value fails validation
    """
    try:
        data: dict[str, Any] = {}
        if path is not None:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
            if not isinstance(data, dict):
                raise ConfigurationError("Config file must hold a JSON object")
            logger.debug(f"Loaded config file {path} with keys {sorted(data)}")

        flags = {k: v for k, v in (overrides or {}).items() if v is not None}
        if "seed" in flags:
            seed = flags["seed"]
            flags = _merge(
                flags, {"optimization": {"seed": seed}, "simulation": {"seed": seed}}
            )
        return RunConfig.model_validate(_merge(data, flags))
    except ConfigurationError:
        raise
    except Exception as e:
        raise ConfigurationError(f"Failed to load configuration: {e}") from e
