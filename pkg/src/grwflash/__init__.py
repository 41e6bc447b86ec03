"""Relativistic flash-collapse model with interaction on a 1+1-dimensional lattice."""

__version__ = "0.1.0"

from .kernels import BACKEND as KERNEL_BACKEND  # noqa: E402
from .lattice import Cut, Event, Strip  # noqa: E402

__all__ = ["Cut", "Event", "Strip", "KERNEL_BACKEND", "__version__"]
