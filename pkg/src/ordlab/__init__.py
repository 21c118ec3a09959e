"""Left-orders on groups with peripheral ℤ² subgroups: cone search, dynamic
realisations, slope detection and gluing checks."""
from __future__ import annotations

from .groups import GroupBackend, PeripheralSubgroup, load_group
from .lattice import QuadIrr, Rational, parse_slope
from .orders import OrderOracle, snapshot
from .presentations import Presentation, Word, parse_presentation, serialise_presentation

__version__ = "0.1.0"

__all__ = ["GroupBackend", "OrderOracle", "PeripheralSubgroup", "Presentation", "QuadIrr",
           "Rational", "Word", "load_group", "parse_presentation", "parse_slope",
           "serialise_presentation", "snapshot"]
