"""Exact finite-precision computations with Fontaine rings, p-adic function
spaces and rank-one (phi, Gamma)-module cohomology."""

from .config import Config
from .errors import DomainError, FontaineLabError, PrecisionError
from .padic_core import Character, HomQpStar, PadicInt, QpStarElement
from .series_rings import LaurentSeries, Truncation

__version__ = "0.1.0"

__all__ = [
    "Character",
    "Config",
    "DomainError",
    "FontaineLabError",
    "HomQpStar",
    "LaurentSeries",
    "PadicInt",
    "PrecisionError",
    "QpStarElement",
    "Truncation",
]
