"""Ground-state population spectroscopy toolkit."""

from popspec._core import *  # noqa: F401,F403
from popspec._core import __doc__  # noqa: F401

__version__ = "1.0.0"
