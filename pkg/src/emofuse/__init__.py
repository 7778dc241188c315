"""Facial-emotion classification from landmark geometry, with two-branch probability fusion."""

__version__ = "0.1.0"

from .errors import DegenerateGeometryError, EmofuseError, InvalidInputError, ParseError
from .labels import EMOTIONS, N_CLASSES

__all__ = [
    "DegenerateGeometryError",
    "EMOTIONS",
    "EmofuseError",
    "InvalidInputError",
    "N_CLASSES",
    "ParseError",
    "__version__",
]
