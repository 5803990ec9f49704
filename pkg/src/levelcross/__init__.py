"""Level crossings of one-parameter integrable billiards.

Exact crossing enumeration for a rectangular box and an Aharonov-Bohm
cylinder, smooth semiclassical crossing densities, slope-jump
distributions and truncated periodic-orbit sums, plus a small harness that
compares them.
"""

from .billiards import (DEFAULT_GAMMA, CylinderBilliard, DomainError, LevelKey, OffShellError,
                        RectBilliard, energy, frequencies_and_actions, get_model, slope)
from .crossings import Crossing, CrossingSet, CrossingWindow, crossing_of_pair, enumerate_crossings, scan_crossings
from .spectrum import SpectrumWindow, enumerate_levels

__all__ = [
    "DEFAULT_GAMMA",
    "CylinderBilliard",
    "DomainError",
    "LevelKey",
    "OffShellError",
    "RectBilliard",
    "energy",
    "frequencies_and_actions",
    "get_model",
    "slope",
    "Crossing",
    "CrossingSet",
    "CrossingWindow",
    "crossing_of_pair",
    "enumerate_crossings",
    "scan_crossings",
    "SpectrumWindow",
    "enumerate_levels",
]

__version__ = "0.1.0"
