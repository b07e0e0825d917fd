"""Hölder-Minkowski colors: an associative, invertible p-family of color operators."""

from .core import *  # noqa: F401,F403
from .errors import *  # noqa: F401,F403

__version__ = "0.1.0"
