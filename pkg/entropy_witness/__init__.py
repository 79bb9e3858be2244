"""Entropy bounds of prepare-and-measure dimension witnesses.

Computes the minimal Shannon entropy of classical strategies and the
minimal von Neumann entropy of quantum ensembles that reach a given value
of a linear witness, and simulates the polarization experiment that
certifies them.
"""

from __future__ import annotations

from typing import Any

__version__ = "1.0.0"

_LAZY = {
    "WitnessSpec": "witness",
    "canonical_witness": "witness",
    "min_classical_entropy": "classical",
    "classical_bound": "classical",
    "min_quantum_entropy": "qopt",
    "entropy_curve": "qopt",
    "run_protocol": "polsim",
    "reconstruct": "tomo",
    "RunConfig": "config",
    "load_config": "config",
}


def __getattr__(name: str) -> Any:
    """Lazy import to avoid circular import issues."""
    if name in _LAZY:
        from importlib import import_module

        module = import_module(f".{_LAZY[name]}", __name__)
        return getattr(module, name)
    raise AttributeError(f"module '{__name__}' has no attribute '{name}'")
