"""Python bindings for the GenFormer stochastic-generator core."""

from ._genformer import *  # noqa: F401,F403
from ._genformer import __version__  # noqa: F401
