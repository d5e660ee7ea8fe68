"""Radial ground states of the Schrodinger-Poisson-Slater equation."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
