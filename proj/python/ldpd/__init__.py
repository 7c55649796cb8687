"""Python interface to the ldpd sampler and posterior summaries."""

from ._ldpd import *  # noqa: F401,F403
from ._ldpd import __doc__  # noqa: F401

__version__ = "0.1.0"
