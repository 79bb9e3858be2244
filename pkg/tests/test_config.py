"""Unit tests for the config module."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from entropy_witness.config import (
    GridConfig,
    OptimizationConfig,
    RunConfig,
    SimConfig,
    load_config,
)
from entropy_witness.constants import DEFAULT_STARTS
from entropy_witness.exceptions import ConfigurationError


class TestModels:
    """Test cases for the configuration models."""

    def test_defaults(self) -> None:
        """Test the defaults of a run."""
        cfg = RunConfig()
        assert cfg.witness == "I3"
        assert cfg.witnesses == ["I3", "I4", "R4"]
        assert cfg.optimization.starts == DEFAULT_STARTS
        assert cfg.simulation.pair_rate == 900.0
        assert cfg.simulation.duration_per_setting == 30.0
        assert cfg.simulation.tomography == "mle"
        assert cfg.check is False

    def test_unknown_field(self) -> None:
        """Test unknown fields are rejected."""
        with pytest.raises(ValueError):
            RunConfig(witnes="I3")
        with pytest.raises(ValueError):
            SimConfig(rate=1.0)

    def test_penalty_schedule(self) -> None:
        """Test penalty schedules must be positive and increasing."""
        assert OptimizationConfig(penalty_schedule=(1.0, 5.0)).penalty_schedule == (
            1.0,
            5.0,
        )
        with pytest.raises(ValueError):
            OptimizationConfig(penalty_schedule=())
        with pytest.raises(ValueError):
            OptimizationConfig(penalty_schedule=(10.0, 10.0))
        with pytest.raises(ValueError):
            OptimizationConfig(penalty_schedule=(-1.0, 1.0))

    def test_grid(self) -> None:
        """Test grid validation and sampling."""
        assert GridConfig(start=1.0, stop=2.0, points=3).values() == [1.0, 1.5, 2.0]
        assert GridConfig(start=1.0, stop=1.0, points=1).values() == [1.0]
        with pytest.raises(ValueError):
            GridConfig(start=2.0, stop=1.0)

    def test_normalized_names(self) -> None:
        """Test witness and case names are upper-cased."""
        cfg = RunConfig(witnesses=["i3", "r4"], case="i4")
        assert cfg.witnesses == ["I3", "R4"]
        assert cfg.case == "I4"

    @pytest.mark.parametrize(
        "field, value",
        [
            ("witnesses", ["I5"]),
            ("case", "X"),
            ("mode", "hybrid"),
            ("kind", "mixed"),
            ("which", "hyp3"),
            ("trials", 1),
        ],
    )
    def test_invalid_values(self, field: str, value: object) -> None:
        """Test invalid values are rejected."""
        with pytest.raises(ValueError):
            RunConfig(**{field: value})


class TestLoadConfig:
    """Test cases for resolving configurations."""

    def test_defaults_only(self) -> None:
        """Test loading without a file or flags."""
        assert load_config() == RunConfig()

    def test_precedence(self, tmp_path: Path) -> None:
        """Test flags override the file and the file overrides defaults."""
        path = tmp_path / "run.json"
        path.write_text(
            json.dumps(
                {
                    "case": "R4",
                    "trials": 5,
                    "simulation": {"pair_rate": 100.0, "exact": True},
                }
            )
        )
        cfg = load_config(path, {"trials": 3, "simulation": {"exact": False}})
        assert cfg.case == "R4"
        assert cfg.trials == 3
        assert cfg.simulation.pair_rate == 100.0
        assert cfg.simulation.exact is False

    def test_none_flags_ignored(self) -> None:
        """Test unset flags keep the configured values."""
        cfg = load_config(None, {"case": None, "out": "elsewhere"})
        assert cfg.case == "I3"
        assert cfg.out == "elsewhere"

    def test_seed_propagates(self) -> None:
        """Test the master seed reaches the optimizer and the simulator."""
        cfg = load_config(None, {"seed": 17})
        assert cfg.seed == 17
        assert cfg.optimization.seed == 17
        assert cfg.simulation.seed == 17

    def test_inline_witness(self, tmp_path: Path) -> None:
        """Test a witness object in the file is kept as a mapping."""
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"witness": {"alpha": [[1, 1], [1, -1]]}}))
        cfg = load_config(path)
        assert cfg.witness == {"alpha": [[1, 1], [1, -1]]}

    def test_errors(self, tmp_path: Path) -> None:
        """Test unreadable files and invalid values raise ConfigurationError."""
        with pytest.raises(ConfigurationError):
            load_config(tmp_path / "missing.json")

        path = tmp_path / "list.json"
        path.write_text("[1, 2]")
        with pytest.raises(ConfigurationError):
            load_config(path)

        path = tmp_path / "bad.json"
        path.write_text('{"trials": 0}')
        with pytest.raises(ConfigurationError):
            load_config(path)
