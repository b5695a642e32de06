"""Attack-resilient state estimation: analysis, decoding and simulation."""

from ._resilest import *  # noqa: F401,F403
from ._resilest import __version__  # noqa: F401
