"""Parsing of command-line values for the entropy-witness CLI."""

from __future__ import annotations

import json
import re
from pathlib import Path
from typing import Any, Union

from .certificates import mixed_sign_witness
from .config import GridConfig
from .constants import GRID_PATTERN, WITNESS_NAME_PATTERN
from .exceptions import ParseError, ValidationError
from .tomo import TomographyDataset
from .validators import suggest_witness, validate_witness_matrix, validate_witness_name
from .witness import WitnessSpec, canonical_witness

# Named witnesses beyond the canonical three
EXTRA_WITNESSES = {"MIXED-SIGN": mixed_sign_witness}


class RunParser:
    """Parser for witness, grid and value arguments."""

    def __init__(self) -> None:
        """Initialize the parser with compiled regex patterns."""
        self.name_pattern = re.compile(WITNESS_NAME_PATTERN)
        self.grid_pattern = re.compile(GRID_PATTERN)

    def parse_witness(self, text: Union[str, dict[str, Any]]) -> WitnessSpec:
        """Parse a witness given by name or as inline JSON.

        Parameters
        ----------
        text : str | dict[str, Any]
            ``"I3"``, ``"I4"``, ``"R4"`` or ``"mixed-sign"``; a JSON object
            with an ``alpha`` matrix; a bare JSON matrix; or an already
            decoded object

        Returns
        -------
        WitnessSpec
            The parsed witness

        Raises
        ------
        ParseError
            If the text is neither a known name nor a valid witness object

        Examples
        --------
        >>> parser = RunParser()
        >>> parser.parse_witness("i4").name
        'I4'
        >>> parser.parse_witness('[[1, 1], [1, -1]]').n
        2
        """
        if isinstance(text, dict):
            return self._witness_from_object(text, json.dumps(text))

        stripped = text.strip()
        if stripped[:1] in ("{", "["):
            try:
                data = json.loads(stripped)
            except json.JSONDecodeError as e:
                raise ParseError(f"Invalid witness JSON: {e}", text) from e
            if isinstance(data, list):
                data = {"alpha": data}
            if not isinstance(data, dict):
                raise ParseError("Witness JSON must be an object or a matrix", text)
            return self._witness_from_object(data, text)

        if not self.name_pattern.match(stripped):
            raise ParseError(f"Invalid witness name '{text}'", text)
        key = stripped.upper()
        if key in EXTRA_WITNESSES:
            return EXTRA_WITNESSES[key]()
        if not validate_witness_name(stripped):
            hints = suggest_witness(stripped[:1])
            hint = f" Did you mean {', '.join(hints)}?" if hints else ""
            raise ParseError(f"Unknown witness '{text}'.{hint}", text)
        return canonical_witness(stripped)

    def _witness_from_object(self, data: dict[str, Any], source: str) -> WitnessSpec:
        is_valid, message = validate_witness_matrix(data.get("alpha", []))
        if not is_valid:
            raise ParseError(message or "Invalid witness", source)
        try:
            return WitnessSpec.from_dict(data)
        except ValidationError as e:
            raise ParseError(str(e), source) from e

    def parse_grid(self, text: str) -> GridConfig:
        """Parse ``"start:stop:points"`` into a grid.

        Examples
        --------
        >>> RunParser().parse_grid("0:1:3").values()
        [0.0, 0.5, 1.0]
        """
        match = self.grid_pattern.match(text)
        if not match:
            raise ParseError(
                f"Invalid grid '{text}': expected 'start:stop:points'", text
            )
        try:
            return GridConfig(
                start=float(match.group("start")),
                stop=float(match.group("stop")),
                points=int(match.group("points")),
            )
        except ValueError as e:
            raise ParseError(f"Invalid grid '{text}': {e}", text) from e

    def parse_values(self, text: str) -> list[float]:
        """Parse a comma-separated list of witness values.

        Examples
        --------
        >>> RunParser().parse_values("3.622, 5.76")
        [3.622, 5.76]
        """
        parts = [part.strip() for part in text.split(",") if part.strip()]
        if not parts:
            raise ParseError("No witness values given", text)
        try:
            return [float(part) for part in parts]
        except ValueError as e:
            raise ParseError(f"Invalid witness value list '{text}': {e}", text) from e

    def parse_counts(self, path: Union[str, Path]) -> TomographyDataset:
        """Read a tomography counts CSV."""
        return TomographyDataset.from_csv(path)
