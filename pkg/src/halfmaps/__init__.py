"""Spectral laboratory for half-harmonic maps from the circle into spheres."""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import HalfMapError
from .spectral import Field, PeriodicGrid
from .halfharmonic import BlaschkeSpec, SphereMap, blaschke_trace, energy

__all__ = [
    "__version__",
    "HalfMapError",
    "Field",
    "PeriodicGrid",
    "BlaschkeSpec",
    "SphereMap",
    "blaschke_trace",
    "energy",
]
