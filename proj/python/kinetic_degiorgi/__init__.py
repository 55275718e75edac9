"""Numerical checks for the De Giorgi/Harnack theory of kinetic integro-differential equations."""

from ._kdg import *  # noqa: F401,F403
from ._kdg import __version__  # noqa: F401
