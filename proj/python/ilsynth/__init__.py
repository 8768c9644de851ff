"""Blackbox expression synthesis from input/output samples."""

from ._ilsynth import *  # noqa: F401,F403
from ._ilsynth import __doc__  # noqa: F401

__version__ = "0.1.0"
