"""Time-unconditional diffusion toolkit: schedules, shell geometry, and
orthogonal time-space training/sampling on toy manifolds."""

from ._tudiff import *  # noqa: F401,F403
from ._tudiff import __doc__ as _core_doc  # noqa: F401

__version__ = "0.1.0"
