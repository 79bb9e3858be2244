"""Unit tests for the parser module."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from entropy_witness.exceptions import ParseError
from entropy_witness.parser import RunParser


class TestRunParser:
    """Test cases for RunParser class."""

    @pytest.fixture
    def parser(self) -> RunParser:
        """Create a RunParser instance for testing."""
        return RunParser()

    def test_parse_witness_names(self, parser: RunParser) -> None:
        """Test parsing named witnesses."""
        # Canonical names, any case
        assert parser.parse_witness("I3").name == "I3"
        assert parser.parse_witness("r4").name == "R4"
        assert parser.parse_witness("  I4 ").n == 4

        # Extra named witness
        spec = parser.parse_witness("mixed-sign")
        assert spec.label == "mixed-sign"
        assert (spec.n, spec.l) == (4, 2)

    def test_parse_witness_json(self, parser: RunParser) -> None:
        """Test parsing inline JSON witnesses."""
        # Object with a name
        spec = parser.parse_witness('{"alpha": [[1, 0.5], [-1, 2]], "name": "mine"}')
        assert spec.label == "mine"
        assert spec.alpha.tolist() == [[1.0, 0.5], [-1.0, 2.0]]

        # Bare matrix
        spec = parser.parse_witness("[[1, 1], [1, -1], [-1, 0]]")
        assert spec.label == "custom-3x2"

        # Already decoded object, as found in config files
        spec = parser.parse_witness({"alpha": [[1, 1], [1, -1]]})
        assert spec.n == 2

    def test_parse_witness_invalid(self, parser: RunParser) -> None:
        """Test invalid witnesses raise ParseError."""
        # Unknown name with suggestions
        with pytest.raises(ParseError) as exc_info:
            parser.parse_witness("I9")
        assert "I3" in str(exc_info.value)
        assert exc_info.value.source == "I9"

        # Malformed name
        with pytest.raises(ParseError):
            parser.parse_witness("3x")

        # Broken JSON
        with pytest.raises(ParseError):
            parser.parse_witness("[[1, 1]")

        # Vector instead of a matrix
        with pytest.raises(ParseError):
            parser.parse_witness("[1, 2, 3]")

        # Declared shape does not match
        with pytest.raises(ParseError):
            parser.parse_witness('{"alpha": [[1, 1]], "n": 2}')

    def test_parse_grid(self, parser: RunParser) -> None:
        """Test parsing grid specifications."""
        grid = parser.parse_grid("3:3.6:4")
        assert (grid.start, grid.stop, grid.points) == (3.0, 3.6, 4)
        assert np.allclose(grid.values(), [3.0, 3.2, 3.4, 3.6])

        # Whitespace and exponents
        grid = parser.parse_grid(" -1e0 : 2 : 2 ")
        assert grid.values() == [-1.0, 2.0]

    def test_parse_grid_invalid(self, parser: RunParser) -> None:
        """Test invalid grids raise ParseError."""
        # Missing part
        with pytest.raises(ParseError):
            parser.parse_grid("3:4")

        # Descending
        with pytest.raises(ParseError):
            parser.parse_grid("4:3:5")

        # Zero points
        with pytest.raises(ParseError):
            parser.parse_grid("3:4:0")

    def test_parse_values(self, parser: RunParser) -> None:
        """Test parsing comma-separated witness values."""
        assert parser.parse_values("3.622") == [3.622]
        assert parser.parse_values("1, 2.5,") == [1.0, 2.5]

        with pytest.raises(ParseError):
            parser.parse_values(" , ")
        with pytest.raises(ParseError):
            parser.parse_values("1, two")

    def test_parse_counts(self, parser: RunParser, tmp_path: Path) -> None:
        """Test reading a counts file."""
        path = tmp_path / "counts.csv"
        path.write_text("state_index,setting_index,count\n0,0,5\n1,2,7\n")
        data = parser.parse_counts(path)
        assert data.counts.shape == (2, 3)
        assert data.counts[1, 2] == 7.0

        with pytest.raises(ParseError):
            parser.parse_counts(tmp_path / "missing.csv")
