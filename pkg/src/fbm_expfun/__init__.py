"""Bounds, exact laws and Monte Carlo checks for exponential functionals of fBM."""

from .errors import (AccuracyError, BracketError, DegenerateError, DivergenceError,
                     DomainError, MembershipError, NotCoveredError)
from .fbm_finite import FbmParams
from .series_fbm import SeriesParams

__all__ = [
    "AccuracyError", "BracketError", "DegenerateError", "DivergenceError",
    "DomainError", "MembershipError", "NotCoveredError", "FbmParams", "SeriesParams",
]
__version__ = "0.1.0"
